"""File formats: surface CSV, convergence-report CSV and flat config files.

Floats are written with ``repr`` so a rerun on the same build produces the
same bytes; results can differ in the last digit across platforms or numpy
builds.
"""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..arbitrage import SurfaceGrid
from ..bs_core import MarketFrame
from ..errors import ConfigError, DomainError

SURFACE_HEADER = ("expiry", "strike", "price")
REPORT_HEADER = ("logK", "exact", "approx", "abs_err", "err_order", "norm_err")
OUTPUT_DIR_ENV = "VOLWING_OUTPUT_DIR"


def _fmt(v: float) -> str:
    return repr(float(v))


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def write_surface_csv(path: str | Path, grid: SurfaceGrid, puts: Sequence[np.ndarray] | None = None) -> None:
    header = SURFACE_HEADER + (("put",) if puts is not None else ())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, (T, K, C) in enumerate(zip(grid.expiries, grid.strikes, grid.prices)):
            for j in range(K.size):
                row = [_fmt(T), _fmt(K[j]), _fmt(C[j])]
                if puts is not None:
                    row.append(_fmt(puts[i][j]))
                w.writerow(row)


def read_surface_csv(path: str | Path, frame: MarketFrame) -> tuple[SurfaceGrid, list[np.ndarray] | None]:
    """Parse an ``expiry,strike,price[,put]`` file into a surface (and puts)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise DomainError(f"{path}: empty surface file") from None
        if header not in (SURFACE_HEADER, SURFACE_HEADER + ("put",)):
            raise DomainError(f"{path}: header must be 'expiry,strike,price[,put]', got {','.join(header)!r}")
        has_put = len(header) == 4
        rows: dict[float, list[tuple[float, ...]]] = {}
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DomainError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                vals = tuple(float(v) for v in rec)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
            rows.setdefault(vals[0], []).append(vals[1:])
    if not rows:
        raise DomainError(f"{path}: no data rows")
    expiries = sorted(rows)
    strikes, prices, puts = [], [], []
    for T in expiries:
        block = sorted(rows[T])
        arr = np.array(block)
        strikes.append(arr[:, 0])
        prices.append(arr[:, 1])
        if has_put:
            puts.append(arr[:, 2])
    grid = SurfaceGrid(tuple(expiries), tuple(strikes), tuple(prices), frame)
    return grid, (puts if has_put else None)


def report_csv_text(rows: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow([_fmt(r.log_k), _fmt(r.exact), _fmt(r.approx), _fmt(r.abs_err), _fmt(r.err_order), _fmt(r.norm_err)])
    return buf.getvalue()


def write_report_csv(path: str | Path, rows: Iterable) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report_csv_text(rows))


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def read_config(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))

