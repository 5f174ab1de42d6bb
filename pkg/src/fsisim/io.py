"""Snapshot files, timeseries CSV and the JSON-lines event log.

A snapshot is plain text.  It starts with ``#`` header lines giving
``t``, ``Nx``, ``Nz`` and ``L``, followed by one block per field
(``sigma``, ``w1``, ``w2``, ``eta``, ``eta_t``).  Each block opens with a
``# field <name>`` line and lists the values row-major with x varying
fastest, one z-row per line, at 17 significant digits, which round-trips
every finite double exactly.  Files are written to a temporary name and
renamed into place.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError, ShapeMismatch
from .fields import Grid
from .sources import CoupledState

FIELD_ORDER = ("sigma", "w1", "w2", "eta", "eta_t")


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_rows(rows) -> list[str]:
    return [" ".join(f"{v:.17g}" for v in row) for row in rows]


def format_snapshot(state: CoupledState, grid: Grid) -> str:
    lines = [f"# t {state.t!r}", f"# Nx {grid.Nx}", f"# Nz {grid.Nz}", f"# L {grid.L!r}"]
    blocks = {
        "sigma": state.sigma.T,
        "w1": state.w[0].T,
        "w2": state.w[1].T,
        "eta": state.eta[None, :],
        "eta_t": state.eta_t[None, :],
    }
    for name in FIELD_ORDER:
        lines.append(f"# field {name}")
        lines.extend(_fmt_rows(blocks[name]))
    return "\n".join(lines) + "\n"


def write_snapshot(state: CoupledState, path, grid: Grid) -> None:
    _atomic_write(Path(path), format_snapshot(state, grid))


def _parse_header(lines, key, conv):
    for ln in lines:
        parts = ln[1:].split()
        if len(parts) == 2 and parts[0] == key:
            try:
                return conv(parts[1])
            except ValueError:
                raise FormatError(f"bad header value for {key}: {parts[1]!r}") from None
    raise FormatError(f"missing header {key}")


def read_snapshot(path, expected: Grid | None = None):
    """Read a snapshot; returns ``(state, grid)``.

    ``expected`` enforces the run grid and raises ``ShapeMismatch`` if the
    file was written on a different one.
    """
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise FormatError(f"not a text snapshot: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = [ln for ln in lines if ln.startswith("#") and not ln.startswith("# field")]
    t = _parse_header(header, "t", float)
    nx = _parse_header(header, "Nx", int)
    nz = _parse_header(header, "Nz", int)
    L = _parse_header(header, "L", float)
    if expected is not None and (nx, nz) != (expected.Nx, expected.Nz):
        raise ShapeMismatch(f"snapshot grid {nx}x{nz} does not match run grid "
                            f"{expected.Nx}x{expected.Nz}")
    grid = Grid(nx, nz, L) if expected is None else expected

    blocks, current = {}, None
    for ln in lines:
        if ln.startswith("# field"):
            current = ln.split()[-1]
            if current in blocks:
                raise FormatError(f"duplicate field block {current}")
            blocks[current] = []
        elif ln.startswith("#"):
            continue
        elif current is None:
            raise FormatError("data before the first field block")
        else:
            try:
                blocks[current].append([float(v) for v in ln.split()])
            except ValueError:
                raise FormatError(f"non-numeric data in block {current}") from None

    shapes = {"sigma": (nz + 1, nx), "w1": (nz + 1, nx), "w2": (nz + 1, nx),
              "eta": (1, nx), "eta_t": (1, nx)}
    arrays = {}
    for name in FIELD_ORDER:
        rows = blocks.get(name)
        if rows is None:
            raise FormatError(f"missing field block {name}")
        if len(rows) != shapes[name][0] or any(len(r) != nx for r in rows):
            raise FormatError(f"block {name} is truncated or malformed")
        arrays[name] = np.array(rows, dtype=float)
    extra = set(blocks) - set(FIELD_ORDER)
    if extra:
        raise FormatError(f"unknown field blocks {sorted(extra)}")
    state = CoupledState(
        sigma=arrays["sigma"].T.copy(),
        w=np.stack([arrays["w1"].T, arrays["w2"].T]),
        eta=arrays["eta"][0].copy(),
        eta_t=arrays["eta_t"][0].copy(),
        t=t,
    )
    return state, grid


class TimeseriesWriter:
    """Appends rows with a fixed column order; ``repr`` keeps floats exact."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = tuple(columns)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(self.columns)

    def write(self, row: dict) -> None:
        if set(row) != set(self.columns):
            raise FormatError(f"row keys {sorted(row)} do not match columns")
        self._writer.writerow([repr(float(row[c])) if c != "picard_iters" else str(row[c])
                               for c in self.columns])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_timeseries(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _clean(v):
    # non-finite floats become null so the log stays strict JSON
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


class EventLog:
    """Line-delimited JSON records."""

    def __init__(self, path=None):
        self.records: list[dict] = []
        self._fh = None
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(path, "w")

    def emit(self, kind: str, **data) -> dict:
        rec = {"event": kind, **{k: _clean(v) for k, v in data.items()}}
        self.records.append(rec)
        if self._fh is not None:
            self._fh.write(json.dumps(rec, sort_keys=True) + "\n")
            self._fh.flush()
        return rec

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
