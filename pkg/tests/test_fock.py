import math

import numpy as np
import pytest

from triangulum.error import InvalidArgument, TruncationError
from triangulum.fock import (
    FockOperator,
    FockVector,
    FockDensity,
    build_displaced_squeezed,
    build_kerr_trisqueezed,
    build_trisqueezed,
    db_to_xi,
    fock_overlap,
    ladder_operators,
    matrix_exponential,
    number_operator,
    quadrature_operators,
    rotation_operator,
    squeeze_operator,
    xi_to_db,
)
from triangulum.wavefunction import displaced_squeezed_wavefunction, position_wavefunction


def test_ladder_operators():
    a, ad = ladder_operators(5)
    one = FockVector.basis(1, 5)
    assert np.abs(a.matrix @ one.amplitudes - FockVector.basis(0, 5).amplitudes).max() < 1e-12
    comm = (a @ ad - ad @ a).matrix
    # the commutator is the identity except at the cutoff
    assert np.allclose(np.diag(comm)[:-1], 1.0)
    assert np.allclose((ad @ a).matrix, number_operator(5).matrix)


def test_vacuum_quadrature_variance():
    q, p = quadrature_operators(10)
    assert abs((q @ q).matrix[0, 0] - 0.25) < 1e-12
    assert abs((p @ p).matrix[0, 0] - 0.25) < 1e-12
    assert q.is_hermitian() and p.is_hermitian()


def test_numpy_scalar_times_operator():
    q, _ = quadrature_operators(4)
    scaled = np.float64(2.0) * q
    assert isinstance(scaled, FockOperator)
    assert np.allclose(scaled.matrix, 2.0 * q.matrix)


def test_fock_vector_validation():
    with pytest.raises(InvalidArgument):
        FockVector(np.zeros(4))
    with pytest.raises(InvalidArgument):
        FockVector([1.0])
    with pytest.raises(InvalidArgument):
        FockVector.basis(6, 5)
    v = FockVector([3.0, 4.0j])
    assert abs(v.norm() - 1.0) < 1e-12


def test_trisqueezed_vacuum_limit():
    state = build_trisqueezed(0.0, 12)
    assert np.abs(state.amplitudes - FockVector.basis(0, 12).amplitudes).max() < 1e-12


def test_trisqueezed_lowest_order():
    t = 0.001
    state = build_trisqueezed(t)
    assert abs(state.amplitudes[3] - 1j * t * math.sqrt(6.0)) < 1e-7
    assert abs(state.amplitudes[0] - 1.0) < 1e-5


def test_trisqueezed_support_is_multiple_of_three():
    state = build_trisqueezed(0.1)
    assert np.all(state.support() % 3 == 0)
    assert abs(state.norm() - 1.0) < 1e-12


def test_trisqueezed_rejects_large_triplicity():
    with pytest.raises(InvalidArgument):
        build_trisqueezed(0.25)


def test_truncation_error_suggests_cutoff():
    with pytest.raises(TruncationError) as err:
        build_trisqueezed(0.15, 9, tolerance=1e-8)
    assert err.value.suggested_cutoff == 18


def test_default_cutoff_passes_tail_check():
    for t in (0.1, 0.125, 0.15):
        state = build_trisqueezed(t)
        assert state.tail_mass() < 1e-2
    assert build_trisqueezed(0.1).tail_mass() < 1e-4


def test_doubling_the_cutoff_keeps_the_state():
    coarse = build_trisqueezed(0.1)
    fine = build_trisqueezed(0.1, 2 * coarse.get_cutoff())
    f = abs(fock_overlap(coarse.resize(fine.get_cutoff()), fine)) ** 2
    assert f > 1.0 - 1e-3


def test_kerr_free_limit_matches_trisqueezed():
    ideal = build_trisqueezed(0.1)
    kerr = build_kerr_trisqueezed(0.1, 0.0, 1.0)
    assert np.abs(ideal.amplitudes - kerr.amplitudes).max() < 1e-10


def test_kerr_deformation_lowers_overlap():
    ideal = build_trisqueezed(0.1)
    kerr = build_kerr_trisqueezed(0.1, 0.05, 1.0)
    f = abs(fock_overlap(ideal, kerr)) ** 2
    assert 0.0 < f < 1.0 - 1e-6


def test_squeezed_vacuum_elements():
    r = 0.5
    state = squeeze_operator(r, 60).apply(FockVector.basis(0, 60))
    assert abs(state.amplitudes[0] - 1.0 / math.sqrt(math.cosh(r))) < 1e-9
    expected = -math.tanh(r) * (math.sqrt(2.0) / 2.0) / math.sqrt(math.cosh(r))
    assert abs(state.amplitudes[2] - expected) < 1e-9


def test_displaced_squeezed_matches_wavefunction():
    xi, beta = 0.3, complex(0.2, 0.1)
    fock = position_wavefunction(build_displaced_squeezed(xi, beta, 60))
    closed = displaced_squeezed_wavefunction(xi, beta)
    q = np.linspace(-2.0, 2.0, 21)
    assert np.abs(fock(q) - closed(q)).max() < 1e-6


def test_matrix_exponential_is_unitary():
    q, p = quadrature_operators(15)
    u = matrix_exponential(FockOperator(1j * (q @ p + p @ q).matrix))
    assert np.allclose(u.matrix @ u.matrix.conj().T, np.eye(16), atol=1e-10)


def test_overlap_requires_equal_cutoffs():
    with pytest.raises(InvalidArgument):
        fock_overlap(FockVector.basis(0, 3), FockVector.basis(0, 4))


def test_json_round_trip():
    state = build_trisqueezed(0.05)
    back = FockVector.from_json(state.to_json())
    assert np.abs(back.amplitudes - state.amplitudes).max() < 1e-15
    rho = FockDensity.from_json(state.density().to_json())
    assert abs(rho.purity() - 1.0) < 1e-12


def test_decibel_conversion():
    xi = db_to_xi(5.0)
    assert xi < 0.0
    assert abs(xi + math.log(10.0 ** 0.25)) < 1e-12
    assert abs(xi_to_db(xi) - 5.0) < 1e-12


def test_rotation_turns_triplicity():
    state = build_trisqueezed(0.1)
    turned = rotation_operator(-math.pi / 6.0, state.get_cutoff()).matrix @ state.amplitudes
    assert np.abs(turned - build_trisqueezed(0.1j).amplitudes).max() < 1e-12
    n = number_operator(4)
    gen = FockOperator(-0.3j * n.matrix)
    assert np.abs(rotation_operator(0.3, 4).matrix - matrix_exponential(gen).matrix).max() < 1e-12
