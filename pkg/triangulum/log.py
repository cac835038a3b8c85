import json
import sys

from termcolor import colored

from triangulum import env
from triangulum.error import Status

_QUIET = False


def set_quiet(quiet: bool):
    """
    Silence (or restore) informational messages.
    """
    global _QUIET
    _QUIET = quiet


def _banner(word: str, color: str) -> str:
    if env.read('NO_COLOR') is not None:
        return word + ':'
    return colored(word, color, attrs=['bold']) + ':'


def info(*values, end: str='\n'):
    """
    Print an informational message to the console.
    """
    if _QUIET:
        return
    print(_banner('info', 'blue'), *values, end=end, file=sys.stderr)


def warn(*values, end: str='\n'):
    """
    Print a warning message to the console.
    """
    print(_banner('warn', 'yellow'), *values, end=end, file=sys.stderr)


def error(*values, end: str='\n', exit_on_err: bool=True, code: Status=Status.NUMERICAL):
    """
    Print an error message to the console.

    If `exit_on_err` is true, exit with the value of `code`.
    """
    print(_banner('error', 'red'), *values, end=end, file=sys.stderr)
    if exit_on_err:
        exit(int(code))


class Progress:
    """
    Line-delimited JSON record of an optimization run.

    One line is written per iteration with the best objective value seen so far.
    """

    def __init__(self, stream=None, path: str=None):
        self._owned = False
        self._stream = stream
        if path is not None:
            self._stream = open(path, 'w')
            self._owned = True

    def __call__(self, iteration: int, best_value: float, evaluations: int):
        if self._stream is None:
            return
        record = {'iteration': int(iteration), 'best_value': float(best_value), 'evaluations': int(evaluations)}
        self._stream.write(json.dumps(record) + '\n')
        self._stream.flush()

    def close(self):
        if self._owned and self._stream is not None:
            self._stream.close()
        self._stream = None
