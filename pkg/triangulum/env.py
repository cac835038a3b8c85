"""
Command-line value types and access to environment variables.
"""

import os


class KvPair:
    """
    A key-value pair, useful for storing parameters provided on the command-line.
    """
    def __init__(self, key: str, val: str):
        self.key = key
        self.val = val

    @staticmethod
    def from_str(s: str):
        # split on equal sign
        words = s.split('=', 1)
        if len(words) != 2 or len(words[0]) == 0:
            return None
        return KvPair(words[0], words[1])

    @staticmethod
    def from_arg(s: str):
        import argparse
        result = KvPair.from_str(s)
        if result is None:
            msg = "key-value pair "+_quote_str(s)+" is missing <value>"
            raise argparse.ArgumentTypeError(msg)
        return result

    def as_float(self) -> float:
        return float(self.val)

    def as_range(self) -> tuple:
        """
        Interprets the value as an interval written `LO:HI`.
        """
        words = self.val.split(':')
        if len(words) != 2:
            raise ValueError('interval '+_quote_str(self.val)+' must be written as LO:HI')
        return (float(words[0]), float(words[1]))


class Seed:
    """
    An integer value used to set randomness.
    """

    MIN_SEED_VALUE = 0
    MAX_SEED_VALUE = (2**64)-1

    def __init__(self, seed: int=None):
        import random
        self.seed = seed
        if seed is None:
            self.seed = random.randint(Seed.MIN_SEED_VALUE, Seed.MAX_SEED_VALUE)
        if self.seed < Seed.MIN_SEED_VALUE or self.seed > Seed.MAX_SEED_VALUE:
            raise ValueError('seed '+str(self.seed)+' is outside of [0, 2^64)')

    def get_seed(self) -> int:
        """
        Returns the random seed.
        """
        return self.seed

    @staticmethod
    def from_str(s: str):
        if s is not None:
            s = int(s)
        return Seed(s)

    @staticmethod
    def from_arg(s: str):
        import argparse
        try:
            return Seed.from_str(s)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e))


def read(key: str, default: str=None, missing_ok: bool=True) -> str:
    try:
        value = os.environ[key]
    except KeyError:
        value = None
    # do not allow empty values to trigger variable
    if value is not None and len(value) == 0:
        value = None
    if value is None:
        if missing_ok == False:
            exit("error: environment variable "+_quote_str(key)+" does not exist")
        else:
            value = default
    return value


def _quote_str(s: str) -> str:
    """
    Wraps the string `s` around double quotes `\"` characters."
    """
    return '\"' + s + '\"'
