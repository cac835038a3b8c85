"""
Buffered output files. Nothing reaches the disk until `save` is called, so a
command that fails part way leaves no partial results behind.
"""

import json
import os


def fmt(value) -> str:
    """
    Formats a number in full double precision.
    """
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, '.17g')
    if isinstance(value, complex):
        return format(value.real, '.17g')+('+' if value.imag >= 0 else '')+format(value.imag, '.17g')+'j'
    return str(value)


class ReportFile:
    """
    Text destined to be written to `path`.
    """

    def __init__(self, path: str, token: str='#'):
        self._file = path
        self._data = ''
        self._token = token

    def push(self, line: str='', end: str='\n'):
        self._data += line + end

    def comment(self, msg, end: str='\n'):
        self._data += self._token + ' ' + str(msg) + end

    def get_data(self) -> str:
        return self._data

    def get_path(self) -> str:
        return self._file

    def save(self):
        parent = os.path.dirname(self._file)
        if len(parent) > 0:
            os.makedirs(parent, exist_ok=True)
        with open(self._file, 'w') as f:
            f.write(self._data)


class CsvTable(ReportFile):
    """
    A comma-separated table with a header row.
    """

    def __init__(self, path: str, columns: list, notes: list=None):
        super().__init__(path)
        self._columns = list(columns)
        for note in (notes if notes is not None else []):
            self.comment(note)
        self.push(','.join(self._columns))

    def add_row(self, values):
        values = list(values)
        if len(values) != len(self._columns):
            raise ValueError('expected '+str(len(self._columns))+' values, got '+str(len(values)))
        self.push(','.join([fmt(v) for v in values]))


class JsonReport(ReportFile):

    def __init__(self, path: str, data: dict):
        super().__init__(path)
        self.push(json.dumps(data, indent=2, sort_keys=True))


class Bundle:
    """
    The set of files a command produces, written together once it succeeds.
    """

    def __init__(self):
        self._files = []

    def add(self, file: ReportFile) -> ReportFile:
        self._files.append(file)
        return file

    def get_paths(self) -> list:
        return [f.get_path() for f in self._files]

    def save(self):
        for f in self._files:
            f.save()
