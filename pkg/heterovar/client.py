"""Module with simple wrappers for file input and output."""

import csv
import io
import json

import numpy as np

from .exception import InvalidInput


def format_value(value):
    """Formats a cell; floats get 17 significant digits so they re-parse exactly."""
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '%.17g' % value
    return str(value)


class CsvClient:
    """Simple wrapper for reading and writing comma-separated tables.

    A header row is mandatory, the decimal point is '.', no locale handling.

    Attributes:
        _opener (callable): Object that implements the builtin open() interface.
        _stdout (obj): Stream used when no output path is given.

    """

    def __init__(self, opener, stdout):
        """Object initializer.

        Args:
            opener (callable): Object that implements the builtin open() interface.
            stdout (obj): Stream used when no output path is given.

        """
        self._opener = opener
        self._stdout = stdout

    def read_columns(self, path, columns):
        """Reads float columns from a CSV file.

        Args:
            path (str): File to read.
            columns (list): Header names that must be present.

        Returns:
            dict: Column name to numpy array.

        Raises:
            InvalidInput: If the file can't be read, a column is missing or a
                cell isn't a number.

        """
        try:
            with self._opener(path, newline='') as handle:
                rows = list(csv.reader(handle))
        except OSError as e:
            raise InvalidInput(message='Input file can not be read.', payload={'path': path, 'error': str(e)})
        if not rows:
            raise InvalidInput(message='Input file is empty.', payload={'path': path})
        header = [name.strip() for name in rows[0]]
        missing = [name for name in columns if name not in header]
        if missing:
            raise InvalidInput(
                message='Input file is missing required columns.',
                payload={'path': path, 'missing': missing, 'header': header}
            )
        positions = {name: header.index(name) for name in columns}
        data = {name: [] for name in columns}
        for line, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            for name, position in positions.items():
                try:
                    data[name].append(float(row[position]))
                except (IndexError, ValueError):
                    raise InvalidInput(
                        message='Input cell is not a number.',
                        payload={'path': path, 'line': line, 'column': name}
                    )
        return {name: np.array(values, dtype=float) for name, values in data.items()}

    def render(self, header, rows):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
        return buffer.getvalue()

    def write(self, path, header, rows):
        _write_text(self._opener, self._stdout, path, self.render(header, rows))


class JsonClient:
    """Simple wrapper for reading and writing JSON documents.

    Output keys are sorted so identical data give identical bytes.

    """

    def __init__(self, opener, stdout):
        self._opener = opener
        self._stdout = stdout

    def read(self, path):
        try:
            with self._opener(path) as handle:
                return json.load(handle)
        except OSError as e:
            raise InvalidInput(message='Config file can not be read.', payload={'path': path, 'error': str(e)})
        except ValueError as e:
            raise InvalidInput(message='Config file is not valid JSON.', payload={'path': path, 'error': str(e)})

    def render(self, data):
        return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + '\n'

    def write(self, path, data):
        _write_text(self._opener, self._stdout, path, self.render(data))


def _write_text(opener, stdout, path, text):
    if path is None:
        stdout.write(text)
        return
    try:
        with opener(path, 'w', newline='') as handle:
            handle.write(text)
    except OSError as e:
        raise InvalidInput(message='Output file can not be written.', payload={'path': path, 'error': str(e)})
