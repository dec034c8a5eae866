import csv
import json
import os

import numpy as np
import toml
import yaml

from .types import *

PLAIN_TEXT_FILES = [".txt", ".log", ".md", ".csv"]


def makedirs(file: str) -> None:
    """Make the directory of the file if it does not exist."""
    if folder := os.path.dirname(file):
        os.makedirs(folder, exist_ok=True)


def get_ext(file: str) -> str:
    """Get the extension of a file."""
    return os.path.splitext(file)[1]


def dump_file(
    data: Any,
    file: str,
    mode: str = "w",
    ensure_folder_exists: bool = True,
    file_type: Optional[str] = None,
    *args: Any,
    **kwargs: Any,
) -> None:
    """Write the data to a file based on the file extension."""
    if file_type is None:
        file_type = get_ext(file)
    if ensure_folder_exists:
        makedirs(file)

    if file_type == ".json":
        dump_func: Callable = json.dump
    elif file_type in [".yaml", ".yml"]:
        dump_func = yaml.dump
    elif file_type == ".toml":
        dump_func = toml.dump
    elif file_type in PLAIN_TEXT_FILES:

        def dump_func(data, f, *args, **kwargs):
            f.write(data)

    else:
        raise ValueError(f"Unsupported file type {file_type}")
    with open(file, mode) as f:
        dump_func(data, f, *args, **kwargs)


def load_file(
    file: str,
    mode: str = "r",
    file_type: Optional[str] = None,
    *args: Any,
    **kwargs: Any,
) -> Any:
    """Load a file based on the file extension and return the data."""
    if file_type is None:
        file_type = get_ext(file)
    if file_type == ".json":
        load_func: Callable = json.load
    elif file_type in [".yaml", ".yml"]:
        load_func = yaml.safe_load
    elif file_type == ".toml":
        load_func = toml.load
    elif file_type in PLAIN_TEXT_FILES:

        def load_func(f, *args, **kwargs):
            return f.read()

    else:
        raise ValueError(f"Unsupported file type {file_type}")
    with open(file, mode) as f:
        return load_func(f, *args, **kwargs)


def _format_cell(value: Any, float_format: str) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return float_format % value
    if value is None:
        return ""
    return str(value)


def dump_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    file: str,
    float_format: str = "%.12g",
) -> None:
    """Write rows to a CSV file with a header line.

    Floats are written with a fixed format so that repeated runs produce
    identical bytes.
    """
    makedirs(file)
    with open(file, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_format_cell(v, float_format) for v in row])


def load_csv(file: str) -> Tuple[List[str], FloatArray]:
    """Read a numeric CSV written by `dump_csv`, returning header and values."""
    with open(file, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        values = [[float(v) if v else np.nan for v in row] for row in reader]
    return header, np.asarray(values, dtype=float).reshape(-1, len(header))


def dump_plot_data(
    x: ArrayLike, y: ArrayLike, names: Tuple[str, str], file: str
) -> None:
    """Write a two-column plot-data CSV."""
    dump_csv(names, zip(np.asarray(x, float), np.asarray(y, float)), file)


def dump_summary(summary: Dict[str, Any], file: str) -> None:
    """Write a summary JSON with sorted keys and rounded floats."""

    def _clean(v: Any) -> Any:
        if isinstance(v, dict):
            return {k: _clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [_clean(x) for x in v]
        if isinstance(v, (np.bool_, bool)):
            return bool(v)
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (float, np.floating)):
            v = float(v)
            return v if np.isfinite(v) else None
        return v

    dump_file(_clean(summary), file, indent=2, sort_keys=True)
