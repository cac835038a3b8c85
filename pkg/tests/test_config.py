import argparse

import pytest

from triangulum.config import Defaults, RunConfig, defaults, get_config_path
from triangulum.env import KvPair, Seed
from triangulum.error import InvalidArgument, Status


def test_packaged_defaults():
    cfg = defaults()
    assert cfg.path == get_config_path()
    assert cfg.get_int('fock.cutoff') == 60
    assert cfg.get_float('gkp.delta') == 0.2
    assert cfg.get('fock.missing', 7) == 7
    assert cfg.get('fock.cutoff.deeper') is None
    with pytest.raises(InvalidArgument):
        cfg.require('nothing.here')


def test_defaults_from_file(tmp_path):
    path = tmp_path / 'alt.toml'
    path.write_text('[fock]\ncutoff = 12\n')
    assert Defaults(str(path)).get_int('fock.cutoff') == 12


def test_run_config_round_trip(tmp_path):
    cfg = RunConfig('prob-opt', {'t': 0.1, 'free': ('theta', 'd')}, seed=42, threads=2, output='run')
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.params['free'] == ['theta', 'd']
    path = str(tmp_path / 'run.json')
    cfg.save(path)
    assert RunConfig.load(path) == cfg


def test_run_config_from_toml(tmp_path):
    path = tmp_path / 'run.toml'
    path.write_text('command = "mana"\nseed = 3\n[params]\nvalues = [0.1, 0.12]\n')
    cfg = RunConfig.load(str(path))
    assert cfg.command == 'mana' and cfg.seed == 3 and cfg.threads == 1
    assert cfg.params == {'values': [0.1, 0.12]}


def test_run_config_validation():
    with pytest.raises(InvalidArgument):
        RunConfig.from_dict({'params': {}})
    with pytest.raises(InvalidArgument):
        RunConfig.from_dict({'command': 'mana', 'colour': 'red'})
    with pytest.raises(InvalidArgument):
        RunConfig('mana', threads=0)


def test_kv_pairs():
    pair = KvPair.from_str('theta=0.25')
    assert pair.key == 'theta' and pair.as_float() == 0.25
    assert KvPair.from_str('theta') is None
    assert KvPair.from_str('=1') is None
    assert KvPair.from_arg('d=-1:0').as_range() == (-1.0, 0.0)
    with pytest.raises(argparse.ArgumentTypeError):
        KvPair.from_arg('theta')
    with pytest.raises(ValueError):
        KvPair('d', '1').as_range()


def test_seed():
    assert Seed(5).get_seed() == 5
    assert 0 <= Seed().get_seed() <= Seed.MAX_SEED_VALUE
    with pytest.raises(ValueError):
        Seed(-1)
    with pytest.raises(argparse.ArgumentTypeError):
        Seed.from_arg('abc')


def test_status_codes():
    assert int(Status.OKAY) == 0
    assert int(InvalidArgument.status) == 2
    assert int(Status.NUMERICAL) == 3
