"""
Reports package configurations.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, asdict

import toml

from triangulum.error import InvalidArgument


def get_config_path() -> str:
    """
    Returns the absolute path to the default settings file packaged with Triangulum.
    """
    abs_cfg_path = os.path.abspath(os.path.join(os.path.dirname(__file__), 'config.toml')).replace('\\', '/')
    return abs_cfg_path


class Defaults:
    """
    Read-only view over the packaged numerical defaults.
    """

    def __init__(self, path: str=None):
        self.path = path if path is not None else get_config_path()
        with open(self.path, 'r') as fd:
            self.data = toml.loads(fd.read())

    def get(self, table: str, default=None):
        """
        Attempts to fetch data from `table` with the internal TOML dictionary.

        Returns `default` if missing a key along the way.
        """
        parts = table.split('.')
        subtable = self.data
        for p in parts:
            try:
                subtable = subtable[p]
            except (KeyError, TypeError):
                return default
        return subtable

    def get_float(self, table: str) -> float:
        return float(self.require(table))

    def get_int(self, table: str) -> int:
        return int(self.require(table))

    def require(self, table: str):
        value = self.get(table)
        if value is None:
            raise InvalidArgument('missing default setting "'+table+'" in '+self.path)
        return value


_DEFAULTS = None


def defaults() -> Defaults:
    """
    Returns the packaged defaults, loading them on first use.
    """
    global _DEFAULTS
    if _DEFAULTS is None:
        _DEFAULTS = Defaults()
    return _DEFAULTS


@dataclass
class RunConfig:
    """
    Everything needed to replay one command: its name, parameters, seed,
    thread count and output stem.
    """
    command: str
    params: dict = field(default_factory=dict)
    seed: int = None
    threads: int = 1
    output: str = None

    def __post_init__(self):
        # canonical JSON types so that a round-trip compares equal
        self.params = json.loads(json.dumps(self.params))
        if self.threads is None or int(self.threads) < 1:
            raise InvalidArgument('thread count must be at least 1')
        self.threads = int(self.threads)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str):
        data = json.loads(text)
        return RunConfig.from_dict(data)

    @staticmethod
    def from_dict(data: dict):
        if 'command' not in data:
            raise InvalidArgument('run configuration is missing "command"')
        known = {'command', 'params', 'seed', 'threads', 'output'}
        unknown = set(data.keys()) - known
        if len(unknown) > 0:
            raise InvalidArgument('unknown run configuration keys: '+', '.join(sorted(unknown)))
        return RunConfig(
            command=data['command'],
            params=data.get('params', {}),
            seed=data.get('seed'),
            threads=data.get('threads', 1),
            output=data.get('output'),
        )

    @staticmethod
    def load(path: str):
        """
        Reads a run configuration from a `.json` or `.toml` file.
        """
        with open(path, 'r') as fd:
            text = fd.read()
        if path.endswith('.toml'):
            return RunConfig.from_dict(toml.loads(text))
        return RunConfig.from_json(text)

    def save(self, path: str):
        with open(path, 'w') as fd:
            fd.write(self.to_json() + '\n')


class _TriangulumConfig:

    def __init__(self, cfg_path: bool, show: bool):
        self.cfg_path = cfg_path
        self.show = show

    def run(self):
        if self.cfg_path:
            print(get_config_path())
        if self.show:
            print(json.dumps(defaults().data, indent=2, sort_keys=True))

    @staticmethod
    def from_args(args: list):
        parser = argparse.ArgumentParser('triangulum-config', allow_abbrev=False)
        parser.add_argument('--config-path', action='store_true', help='print the absolute path to the config.toml file')
        parser.add_argument('--show', action='store_true', help='print the packaged defaults as JSON')
        args = parser.parse_args(args)

        return _TriangulumConfig(
            cfg_path=args.config_path,
            show=args.show,
        )


def main():
    tc = _TriangulumConfig.from_args(sys.argv[1:])
    tc.run()


if __name__ == "__main__":
    main()
