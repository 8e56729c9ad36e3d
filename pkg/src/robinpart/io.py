"""File formats: plain PGM rasters, JSON sidecars/manifests and CSV tables.

Raster convention: pixel (row ``i``, column ``j``) is cell ``(i, j)``. CSV files use
``,`` separators, a header row and LF line endings. Floats are written with
``repr`` so values round-trip exactly.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .eigen import EigenResult
from .energy import EnergyBreakdown, PartitionState, PhaseField
from .errors import ConfigError, DimensionMismatch
from .grid import CellSet, GridSpec, make_grid


def write_pgm(path: Path | str, image: np.ndarray, maxval: int = 255) -> Path:
    image = np.asarray(image)
    if image.ndim != 2:
        raise DimensionMismatch("PGM rasters are two-dimensional")
    path = Path(path)
    rows, cols = image.shape
    lines = ["P2", f"{cols} {rows}", str(maxval)]
    lines += [" ".join(str(int(v)) for v in row) for row in image]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_pgm(path: Path | str) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens += line.split("#", 1)[0].split()
    if not tokens or tokens[0] != "P2":
        raise ConfigError(f"{path} is not a plain (P2) PGM file")
    cols, rows, _maxval = (int(t) for t in tokens[1:4])
    data = np.array([int(t) for t in tokens[4:]], dtype=int)
    if data.size != rows * cols:
        raise ConfigError(f"{path}: expected {rows * cols} pixels, found {data.size}")
    return data.reshape(rows, cols)


def _write_json(path: Path, payload: dict, one_line: bool = False) -> Path:
    text = json.dumps(payload, sort_keys=True) if one_line else json.dumps(payload, indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def save_cellset(S: CellSet, stem: Path | str) -> list[Path]:
    """``stem.pgm`` (0 outside / 255 inside) and the one-line sidecar ``stem.json``."""
    stem = Path(stem)
    pgm = write_pgm(stem.with_suffix(".pgm"), np.where(S.mask, 255, 0))
    side = _write_json(stem.with_suffix(".json"), S.grid.to_json(), one_line=True)
    return [pgm, side]


def load_cellset(pgm_path: Path | str) -> CellSet:
    pgm_path = Path(pgm_path)
    meta = json.loads(pgm_path.with_suffix(".json").read_text())
    grid = make_grid(meta["extent"], meta["h"])
    image = read_pgm(pgm_path)
    return CellSet(grid, image > 0)


def _cell_header(d: int) -> list[str]:
    return ["cell_i", "cell_j", "cell_k"][:d]


def _field_rows(u: PhaseField):
    for idx in np.argwhere(u.values > 0):
        yield [*(int(v) for v in idx), float(u.values[tuple(idx)])]


def save_eigen_result(res: EigenResult, stem: Path | str, raster: bool = True) -> list[Path]:
    """``stem.json``; for 2D grids also ``stem.pgm`` (values scaled to 0-255) and ``stem.csv``."""
    stem = Path(stem)
    out = [_write_json(stem.with_suffix(".json"), res.to_json())]
    u = res.u
    if raster and u.grid.d == 2:
        top = u.max()
        scaled = np.rint(255 * u.values / top) if top > 0 else np.zeros(u.grid.n)
        out.append(write_pgm(stem.with_suffix(".pgm"), scaled))
    out.append(write_csv(stem.with_suffix(".csv"), _cell_header(u.grid.d) + ["value"], _field_rows(u)))
    return out


def save_partition(state: PartitionState, directory: Path | str, energy: EnergyBreakdown | None = None) -> list[Path]:
    """Label map ``labels.pgm`` (phase index + 1, 0 unassigned), ``phase_<i>.csv``, ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    if state.grid.d == 2:
        labels = state.labels() + 1
        out.append(write_pgm(directory / "labels.pgm", labels, maxval=max(255, state.k)))
    for i, u in enumerate(state.phases):
        out.append(write_csv(directory / f"phase_{i}.csv", _cell_header(state.grid.d) + ["value"], _field_rows(u)))
    manifest = {"k": state.k, "beta": state.beta, **state.grid.to_json()}
    if energy is not None:
        manifest["energy"] = energy.to_json()
    out.append(_write_json(directory / "manifest.json", manifest))
    return out


def load_partition(directory: Path | str) -> PartitionState:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    grid: GridSpec = make_grid(manifest["extent"], manifest["h"])
    phases = []
    for i in range(manifest["k"]):
        values = np.zeros(grid.n)
        with (directory / f"phase_{i}.csv").open() as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                values[tuple(int(v) for v in row[: grid.d])] = float(row[grid.d])
        phases.append(PhaseField(grid, values))
    return PartitionState(grid, float(manifest["beta"]), phases)


def write_trace(trace, k: int, path: Path | str) -> Path:
    header = ["sweep", "total_energy", *[f"lambda_{i + 1}" for i in range(k)], "moved", "seconds"]
    return write_csv(path, header, trace.csv_rows())
