"""Uniform rectilinear grids: data model, ingestion and regularization.

Cells are stored row-major, bottom-up: cell ``j`` sits at column ``j % n_cols``
and row ``j // n_cols``, with row 0 at the lower edge of the grid.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "GridError",
    "ParseError",
    "DuplicateCellError",
    "LatticeError",
    "DegenerateGridError",
    "Geometry",
    "Grid",
    "SparseCells",
    "parse_csv_grid",
    "parse_esri_ascii",
    "format_esri_ascii",
    "grid_from_json",
    "grid_to_json",
    "read_grid",
    "regularize",
    "cell_hypervolume",
    "total_mass",
    "normalize",
    "split_signs",
]

LATTICE_RTOL = 1e-6
NODATA = -9999


class GridError(ValueError):
    """Base class for invalid grid data."""


class ParseError(GridError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCellError(GridError):
    pass


class LatticeError(GridError):
    pass


class DegenerateGridError(GridError):
    pass


@dataclass(frozen=True)
class Geometry:
    """Placement of a grid in data coordinates.

    Parameters
    ----------
    origin : (float, float)
        Lower-left corner of cell (0, 0).
    cell_size : (float, float)
        Cell edge lengths along x and y, both strictly positive.
    dims : (int, int)
        ``(n_cols, n_rows)``.
    """

    origin: tuple[float, float]
    cell_size: tuple[float, float]
    dims: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(
            self, "cell_size", (float(self.cell_size[0]), float(self.cell_size[1]))
        )
        object.__setattr__(self, "dims", (int(self.dims[0]), int(self.dims[1])))
        if not (self.cell_size[0] > 0 and self.cell_size[1] > 0):
            raise GridError(f"cell_size must be strictly positive, got {self.cell_size}")
        if self.dims[0] < 1 or self.dims[1] < 1:
            raise GridError(f"dims must be >= 1, got {self.dims}")

    @property
    def n_cols(self) -> int:
        return self.dims[0]

    @property
    def n_rows(self) -> int:
        return self.dims[1]

    @property
    def size(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def cell_hypervolume(self) -> float:
        return self.cell_size[0] * self.cell_size[1]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """``(xmin, xmax, ymin, ymax)`` of the outer cell edges."""
        x0, y0 = self.origin
        return (
            x0,
            x0 + self.n_cols * self.cell_size[0],
            y0,
            y0 + self.n_rows * self.cell_size[1],
        )

    def x_centers(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.n_cols) + 0.5) * self.cell_size[0]

    def y_centers(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.n_rows) + 0.5) * self.cell_size[1]

    def centers(self) -> np.ndarray:
        """Cell centers as an ``(M, 2)`` array in canonical cell order."""
        xx, yy = np.meshgrid(self.x_centers(), self.y_centers())
        return np.column_stack([xx.ravel(), yy.ravel()])

    def locate(self, points) -> np.ndarray:
        """Index of the cell containing each point, ``-1`` outside the grid."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        col = np.floor((pts[:, 0] - self.origin[0]) / self.cell_size[0]).astype(np.int64)
        row = np.floor((pts[:, 1] - self.origin[1]) / self.cell_size[1]).astype(np.int64)
        inside = (col >= 0) & (col < self.n_cols) & (row >= 0) & (row < self.n_rows)
        return np.where(inside, row * self.n_cols + col, -1)

    @classmethod
    def covering(cls, xmin, xmax, ymin, ymax, dims) -> "Geometry":
        """Geometry with ``dims`` cells spanning the given window exactly."""
        n_cols, n_rows = dims
        return cls(
            origin=(xmin, ymin),
            cell_size=((xmax - xmin) / n_cols, (ymax - ymin) / n_rows),
            dims=(n_cols, n_rows),
        )


@dataclass(frozen=True, eq=False)
class Grid:
    """Values on a uniform rectilinear grid.

    ``values`` is a read-only float array of length ``n_cols * n_rows`` in
    row-major, bottom-up order. ``missing`` holds the indices of cells that
    were absent or NODATA in the source and have been filled with zero.
    """

    geometry: Geometry
    values: np.ndarray
    missing: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.geometry.size:
            raise GridError(
                f"expected {self.geometry.size} values for dims {self.geometry.dims}, "
                f"got {vals.size}"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        missing = frozenset(int(i) for i in self.missing)
        if missing and (min(missing) < 0 or max(missing) >= vals.size):
            raise GridError("missing index out of range")
        object.__setattr__(self, "missing", missing)

    @classmethod
    def from_array(cls, array, origin=(0.0, 0.0), cell_size=(1.0, 1.0)) -> "Grid":
        """Build from a 2-D array indexed ``[row, col]`` with row 0 at the bottom."""
        arr = np.asarray(array, dtype=float)
        if arr.ndim != 2:
            raise GridError("expected a 2-D array")
        n_rows, n_cols = arr.shape
        return cls(Geometry(origin, cell_size, (n_cols, n_rows)), arr.ravel())

    @property
    def origin(self):
        return self.geometry.origin

    @property
    def cell_size(self):
        return self.geometry.cell_size

    @property
    def dims(self):
        return self.geometry.dims

    @property
    def size(self) -> int:
        return self.geometry.size

    def as_array(self) -> np.ndarray:
        """Values reshaped to ``(n_rows, n_cols)``, row 0 at the bottom."""
        return self.values.reshape(self.geometry.n_rows, self.geometry.n_cols)

    def with_values(self, values) -> "Grid":
        return Grid(self.geometry, values)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.missing == other.missing
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


class Cell(NamedTuple):
    x: float
    y: float
    value: float


@dataclass(frozen=True)
class SparseCells:
    """Cell centers with values, before regularization onto a full lattice."""

    cells: tuple[Cell, ...] = ()

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)


def parse_csv_grid(text) -> SparseCells:
    """Read ``x,y,value`` rows of cell centers.

    Parameters
    ----------
    text : str or file-like
        CSV content with header ``x,y,value``.

    Raises
    ------
    ParseError
        Bad header or non-numeric field, with the offending line number.
    DuplicateCellError
        Two rows with the same ``(x, y)``.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    reader = csv.reader(text)
    header = next(reader, None)
    if header is None:
        raise ParseError("empty input: expected header x,y,value", line=1)
    if [h.strip().lower() for h in header] != ["x", "y", "value"]:
        raise ParseError(f"expected header x,y,value, got {','.join(header)}", line=1)

    cells = []
    seen = set()
    for row in reader:
        lineno = reader.line_num
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        try:
            x, y, v = (float(f) for f in row)
        except ValueError:
            raise ParseError(f"malformed numeric field in {row!r}", line=lineno) from None
        if (x, y) in seen:
            raise DuplicateCellError(f"line {lineno}: duplicate cell at ({x}, {y})")
        seen.add((x, y))
        cells.append(Cell(x, y, v))
    return SparseCells(tuple(cells))


_ESRI_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


def parse_esri_ascii(text) -> Grid:
    """Parse an ESRI ASCII grid.

    Rows in the file run top to bottom; they are flipped into the canonical
    bottom-up order. NODATA cells are set to 0 and listed in ``Grid.missing``.
    """
    if not isinstance(text, str):
        text = text.read()
    lines = text.splitlines()
    header = {}
    pos = 0
    while pos < len(lines) and len(header) < len(_ESRI_KEYS):
        line = lines[pos].strip()
        if not line:
            pos += 1
            continue
        parts = line.split()
        key = parts[0].lower()
        if key not in _ESRI_KEYS:
            break
        if len(parts) != 2:
            raise ParseError(f"malformed header line {line!r}", line=pos + 1)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric header value {parts[1]!r}", line=pos + 1) from None
        pos += 1
    missing_keys = [k for k in _ESRI_KEYS if k not in header]
    if missing_keys:
        raise ParseError(f"missing header key(s): {', '.join(missing_keys)}")

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    nodata = header["nodata_value"]
    rows = []
    for i in range(pos, len(lines)):
        line = lines[i].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != ncols:
            raise ParseError(f"expected {ncols} values, got {len(fields)}", line=i + 1)
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ParseError("malformed numeric field", line=i + 1) from None
    if len(rows) != nrows:
        raise ParseError(f"expected {nrows} data rows, got {len(rows)}")

    arr = np.array(rows, dtype=float)[::-1].reshape(nrows, ncols)
    flat = arr.ravel()
    holes = np.flatnonzero(flat == nodata)
    flat = np.where(flat == nodata, 0.0, flat)
    size = header["cellsize"]
    geom = Geometry((header["xllcorner"], header["yllcorner"]), (size, size), (ncols, nrows))
    return Grid(geom, flat, frozenset(holes.tolist()))


def format_esri_ascii(grid: Grid) -> str:
    """Serialize to ESRI ASCII with 6 significant digits and NODATA -9999."""
    cx, cy = grid.cell_size
    if not math.isclose(cx, cy, rel_tol=LATTICE_RTOL):
        raise GridError("ESRI ASCII grids need square cells")
    n_cols, n_rows = grid.dims
    out = [
        f"ncols {n_cols}",
        f"nrows {n_rows}",
        f"xllcorner {grid.origin[0]:.10g}",
        f"yllcorner {grid.origin[1]:.10g}",
        f"cellsize {cx:.10g}",
        f"NODATA_value {NODATA}",
    ]
    vals = grid.values.copy()
    if grid.missing:
        vals[list(grid.missing)] = NODATA
    arr = vals.reshape(n_rows, n_cols)
    for row in arr[::-1]:
        out.append(" ".join(f"{v:.6g}" for v in row))
    return "\n".join(out) + "\n"


def grid_to_json(grid: Grid) -> dict:
    doc = {
        "origin": list(grid.origin),
        "cell_size": list(grid.cell_size),
        "dims": list(grid.dims),
        "values": grid.values.tolist(),
    }
    if grid.missing:
        doc["missing"] = sorted(grid.missing)
    return doc


def grid_from_json(doc) -> Grid:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    try:
        geom = Geometry(tuple(doc["origin"]), tuple(doc["cell_size"]), tuple(doc["dims"]))
        return Grid(geom, doc["values"], frozenset(doc.get("missing", ())))
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r} in grid JSON") from None
    except (TypeError, IndexError) as exc:
        raise ParseError(f"malformed grid JSON: {exc}") from None


def read_grid(path, fmt=None, cell_size=None) -> Grid:
    """Load a grid from ``.csv``, ``.asc`` or ``.json``, sniffing by extension.

    CSV input holds sparse cell centers and is regularized; ``cell_size``
    defaults to the smallest positive spacing between distinct centers.
    """
    path = str(path)
    if fmt is None:
        ext = path.rsplit(".", 1)[-1].lower() if "." in path else ""
        fmt = {"csv": "csv", "asc": "asc", "json": "json"}.get(ext)
        if fmt is None:
            raise GridError(f"cannot infer grid format from {path!r}; pass a format")
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if fmt == "json":
        return grid_from_json(text)
    if fmt == "asc":
        return parse_esri_ascii(text)
    if fmt == "csv":
        cells = parse_csv_grid(text)
        if cell_size is None:
            cell_size = _infer_cell_size(cells)
        return regularize(cells, cell_size)
    raise GridError(f"unknown grid format {fmt!r}")


def _infer_cell_size(cells: SparseCells):
    if len(cells) == 0:
        raise GridError("cannot infer cell size from an empty file")
    sizes = []
    for axis in (0, 1):
        u = np.unique([c[axis] for c in cells])
        d = np.diff(u)
        d = d[d > 0]
        sizes.append(float(d.min()) if d.size else 1.0)
    if len(np.unique([c.x for c in cells])) == 1:
        sizes[0] = sizes[1]
    if len(np.unique([c.y for c in cells])) == 1:
        sizes[1] = sizes[0]
    return tuple(sizes)


def regularize(cells: SparseCells, cell_size) -> Grid:
    """Materialize the bounding lattice of ``cells``, filling holes with 0.

    Raises
    ------
    LatticeError
        A center lies off the common lattice by more than ``1e-6`` cell sizes.
    """
    cell_size = (float(cell_size[0]), float(cell_size[1]))
    cells = tuple(cells)
    if not cells:
        raise GridError("no cells to regularize")
    xy = np.array([(c.x, c.y) for c in cells], dtype=float)
    vals = np.array([c.value for c in cells], dtype=float)
    step = np.asarray(cell_size)

    anchor = xy.min(axis=0)
    offsets = (xy - anchor) / step
    idx = np.rint(offsets)
    bad = np.abs(offsets - idx) > LATTICE_RTOL
    if bad.any():
        i = int(np.flatnonzero(bad.any(axis=1))[0])
        raise LatticeError(
            f"center ({xy[i, 0]}, {xy[i, 1]}) is not on the lattice of cell size {cell_size}"
        )
    idx = idx.astype(np.int64)
    n_cols, n_rows = (idx.max(axis=0) + 1).tolist()
    flat = idx[:, 1] * n_cols + idx[:, 0]
    counts = np.bincount(flat)
    if counts.max() > 1:
        dup = int(np.argmax(counts > 1))
        raise DuplicateCellError(f"two centers fall in lattice cell {dup}")

    out = np.zeros(n_cols * n_rows)
    out[flat] = vals
    present = np.zeros(out.size, dtype=bool)
    present[flat] = True
    origin = tuple((anchor - step / 2.0).tolist())
    geom = Geometry(origin, cell_size, (n_cols, n_rows))
    return Grid(geom, out, frozenset(np.flatnonzero(~present).tolist()))


def cell_hypervolume(grid) -> float:
    """Area of one cell, the product of the cell edge lengths."""
    geom = grid.geometry if isinstance(grid, Grid) else grid
    return geom.cell_hypervolume


def total_mass(grid: Grid) -> float:
    """Cell area times the sum of all values.

    Raises
    ------
    GridError
        If any value is negative; split the signs first.
    """
    if np.any(grid.values < 0):
        raise GridError("total_mass needs non-negative values; use split_signs first")
    return cell_hypervolume(grid) * math.fsum(grid.values)


def normalize(grid: Grid) -> tuple[Grid, float]:
    """Rescale a non-negative grid to unit mass; returns the grid and its mass."""
    mass = total_mass(grid)
    if not mass > 0:
        raise DegenerateGridError("grid has zero total mass")
    if mass == 1.0:
        return grid, 1.0
    return Grid(grid.geometry, grid.values / mass, grid.missing), mass


def split_signs(grid: Grid) -> tuple[Grid, Grid]:
    """Split into non-negative parts ``(neg, pos)`` with ``values = pos - neg``."""
    v = grid.values
    neg = np.where(v < 0, -v, 0.0)
    pos = np.where(v > 0, v, 0.0)
    return Grid(grid.geometry, neg), Grid(grid.geometry, pos)
