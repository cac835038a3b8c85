import math

import numpy as np
import pytest

from triangulum.error import InvalidArgument
from triangulum.quadrature import PlaneRule, QuadratureScheme, gauss_legendre


def test_gauss_legendre_is_exact_on_polynomials():
    x, w = gauss_legendre(0.0, 2.0, 3)
    assert abs(np.sum(w * x ** 4) - 32.0 / 5.0) < 1e-12
    assert abs(np.sum(w) - 2.0) < 1e-14


def test_gauss_legendre_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        gauss_legendre(1.0, 1.0, 4)
    with pytest.raises(InvalidArgument):
        gauss_legendre(0.0, 1.0, 0)


def test_plane_rule_integrates_gaussian():
    rule = PlaneRule(6.0, 60)
    assert abs(rule.integrate(np.exp(-rule.x ** 2 - rule.y ** 2)) - math.pi) < 1e-10
    assert rule.doubled().nodes == 120


def test_scheme_doubling():
    scheme = QuadratureScheme()
    assert scheme.doubled('bin').bin_nodes == 2 * scheme.bin_nodes
    assert scheme.doubled('bin').q0_nodes == scheme.q0_nodes
    every = scheme.doubled()
    assert every.q2_nodes == 2 * scheme.q2_nodes and every.smear_nodes == 2 * scheme.smear_nodes
    with pytest.raises(InvalidArgument):
        scheme.doubled('q9')


def test_scheme_validation():
    with pytest.raises(InvalidArgument):
        QuadratureScheme(bin_nodes=0)
    with pytest.raises(InvalidArgument):
        QuadratureScheme(smear_width=-1.0)


def test_smear_rule_covers_widened_bin():
    scheme = QuadratureScheme()
    q, w = scheme.smear_rule(0.3, 0.1, 0.2)
    reach = scheme.smear_width * 0.2
    assert abs(np.sum(w) - 2.0 * (0.1 + reach)) < 1e-12
    assert q.min() > 0.3 - 0.1 - reach and q.max() < 0.3 + 0.1 + reach
    assert q.size == scheme.smear_nodes
