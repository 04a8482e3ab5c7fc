"""Doubled-coordinate hexagonal geometry, the map type and the ``.hexmap`` format.

Cells are addressed as ``(i, j)`` with ``i + j`` even.  ``i`` is the doubled
row (north is ``i - 2``) and ``j`` the column; diagonal moves change both
axes by one.  On disk a map is stored in offset layout, one character per
cell, and offset ``(r, c)`` maps to ``(2r + c % 2, c)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, NamedTuple

import numpy as np

from .errors import MapFormatError

SQRT3 = math.sqrt(3.0)


class HexCoord(NamedTuple):
    i: int
    j: int

    def __add__(self, other):  # type: ignore[override]
        return HexCoord(self.i + other[0], self.j + other[1])


class AbsDir(IntEnum):
    N = 0
    NE = 1
    SE = 2
    S = 3
    SW = 4
    NW = 5

    def turn(self, offset: int) -> "AbsDir":
        return AbsDir((self + offset) % 6)


# indexed by AbsDir
OFFSETS: tuple[tuple[int, int], ...] = ((-2, 0), (-1, 1), (1, 1), (2, 0), (1, -1), (-1, -1))


class CellKind(IntEnum):
    FREE = 0
    OBSTACLE = 1
    UNKNOWN = 2


CHAR_TO_KIND = {".": CellKind.FREE, "#": CellKind.OBSTACLE, "?": CellKind.UNKNOWN,
                "B": CellKind.FREE, "G": CellKind.FREE}
KIND_TO_CHAR = {CellKind.FREE: ".", CellKind.OBSTACLE: "#", CellKind.UNKNOWN: "?"}


def valid_parity(c) -> bool:
    return (c[0] + c[1]) % 2 == 0


def neighbors(c) -> list[tuple[AbsDir, HexCoord]]:
    """The six neighbours of ``c`` in direction order N, NE, SE, S, SW, NW.

    Bounds are not checked; callers filter.
    """
    i, j = c
    return [(AbsDir(d), HexCoord(i + di, j + dj)) for d, (di, dj) in enumerate(OFFSETS)]


def neighbor(c, d: int) -> HexCoord:
    di, dj = OFFSETS[d % 6]
    return HexCoord(c[0] + di, c[1] + dj)


def direction_between(a, b) -> AbsDir:
    delta = (b[0] - a[0], b[1] - a[1])
    try:
        return AbsDir(OFFSETS.index(delta))
    except ValueError:
        raise ValueError(f"{tuple(a)} and {tuple(b)} are not adjacent") from None


def step_distance(a, b) -> int:
    """Minimum number of hex moves between two cells on an empty lattice."""
    di = abs(a[0] - b[0])
    dj = abs(a[1] - b[1])
    return dj + max(0, (di - dj) // 2)


def k_ring(c, k: int) -> set[HexCoord]:
    """The ``6k`` cells at step distance exactly ``k`` from ``c``.

    Built from the six corners ``c + k * offset[d]``; from each corner the
    ring edge runs ``k`` steps in direction ``d + 2``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    i, j = c
    ring = set()
    for d in range(6):
        ci = i + k * OFFSETS[d][0]
        cj = j + k * OFFSETS[d][1]
        ei, ej = OFFSETS[(d + 2) % 6]
        for t in range(k):
            ring.add(HexCoord(ci + t * ei, cj + t * ej))
    return ring


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def rasterize_dims(length: float, width: float, edge: float) -> tuple[int, int]:
    """Number of (rows, columns) for a ``length x width`` cm area with hex edge ``edge``.

    Rows stack along ``length`` at pitch ``sqrt(3)/2 * edge`` and columns along
    ``width`` at pitch ``3/2 * edge``; both are rounded to the nearest integer.
    """
    if length <= 0 or width <= 0 or edge <= 0:
        raise ValueError("length, width and edge must all be positive")
    n = _round_half_away(length / (SQRT3 / 2 * edge) + 1)
    m = _round_half_away((width + edge) / (1.5 * edge) - 1)
    return n, m


def cell_center(c, edge: float) -> tuple[float, float]:
    return (c[1] * 1.5 * edge, c[0] * SQRT3 / 2 * edge)


@dataclass(frozen=True, eq=False)
class HexMap:
    """Rectangular hex lattice of ``n_rows`` offset rows by ``m_cols`` columns.

    ``grid[r, c]`` holds the :class:`CellKind` of offset cell ``(r, c)``.
    """

    n_rows: int
    m_cols: int
    grid: np.ndarray
    start: HexCoord
    goal: HexCoord
    name: str = ""
    edge_cm: float | None = None
    _free_count: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.uint8)
        if grid.shape != (self.n_rows, self.m_cols):
            raise ValueError(f"grid shape {grid.shape} != ({self.n_rows}, {self.m_cols})")
        grid = grid.copy()
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "start", HexCoord(*self.start))
        object.__setattr__(self, "goal", HexCoord(*self.goal))
        object.__setattr__(self, "_free_count", int((grid == CellKind.FREE).sum()))
        for label, c in (("start", self.start), ("goal", self.goal)):
            if not self.is_free(c):
                raise ValueError(f"{label} {tuple(c)} is not a free in-bounds cell")
        if self.start == self.goal:
            raise ValueError("start and goal must be distinct")

    # offset <-> doubled
    def offset_of(self, c) -> tuple[int, int]:
        i, j = c
        return (i - (j & 1)) >> 1, j

    def in_bounds(self, c) -> bool:
        i, j = c
        if (i + j) & 1 or not 0 <= j < self.m_cols:
            return False
        r = (i - (j & 1)) >> 1
        return 0 <= r < self.n_rows

    def kind(self, c) -> CellKind:
        if not self.in_bounds(c):
            raise KeyError(tuple(c))
        r, col = self.offset_of(c)
        return CellKind(int(self.grid[r, col]))

    def is_free(self, c) -> bool:
        if not self.in_bounds(c):
            return False
        r, col = self.offset_of(c)
        return self.grid[r, col] == CellKind.FREE

    @property
    def n_cells(self) -> int:
        return self.n_rows * self.m_cols

    @property
    def free_count(self) -> int:
        return self._free_count

    def index(self, c) -> int:
        r, col = self.offset_of(c)
        return r * self.m_cols + col

    def coord(self, idx: int) -> HexCoord:
        r, col = divmod(int(idx), self.m_cols)
        return HexCoord(2 * r + (col & 1), col)

    def coords(self) -> Iterator[HexCoord]:
        for idx in range(self.n_cells):
            yield self.coord(idx)

    @property
    def cells(self) -> dict[HexCoord, CellKind]:
        return {c: self.kind(c) for c in self.coords()}

    def free_cells(self) -> list[HexCoord]:
        return [c for c in self.coords() if self.is_free(c)]

    def free_neighbors(self, c) -> list[tuple[AbsDir, HexCoord]]:
        return [(d, n) for d, n in neighbors(c) if self.is_free(n)]

    def is_wall_adjacent(self, c) -> bool:
        return any(not self.is_free(n) for _, n in neighbors(c))

    def with_endpoints(self, start, goal) -> "HexMap":
        return HexMap(self.n_rows, self.m_cols, self.grid, start, goal, self.name, self.edge_cm)

    def __eq__(self, other):
        if not isinstance(other, HexMap):
            return NotImplemented
        return (self.n_rows, self.m_cols, self.start, self.goal) == (
            other.n_rows, other.m_cols, other.start, other.goal
        ) and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash((self.n_rows, self.m_cols, self.start, self.goal, self.grid.tobytes()))


def load_map(text: str) -> HexMap:
    """Parse a ``.hexmap`` document."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header: dict[str, str] = {}
    body_start = 0
    # map rows never contain spaces, so "# " unambiguously starts a header line
    for lineno, line in enumerate(lines, start=1):
        if not line.startswith("# "):
            break
        key, sep, value = line[2:].partition(":")
        key = key.strip()
        if not sep or key not in ("name", "edge_cm"):
            raise MapFormatError(f"bad header line {line!r}", line=lineno)
        header[key] = value.strip()
        body_start = lineno
    rows = lines[body_start:]
    if not rows:
        raise MapFormatError("no map rows", line=body_start + 1)
    width = len(rows[0])
    if width == 0:
        raise MapFormatError("empty map row", line=body_start + 1)
    start = goal = None
    grid = np.zeros((len(rows), width), dtype=np.uint8)
    for r, row in enumerate(rows):
        lineno = body_start + r + 1
        if row != row.rstrip():
            raise MapFormatError("trailing whitespace", line=lineno, column=len(row.rstrip()) + 1)
        if len(row) != width:
            raise MapFormatError(f"expected {width} characters, got {len(row)}", line=lineno)
        for c, ch in enumerate(row):
            kind = CHAR_TO_KIND.get(ch)
            if kind is None:
                raise MapFormatError(f"unknown character {ch!r}", line=lineno, column=c + 1)
            grid[r, c] = kind
            here = HexCoord(2 * r + (c & 1), c)
            if ch == "B":
                if start is not None:
                    raise MapFormatError("duplicate start 'B'", line=lineno, column=c + 1)
                start = here
            elif ch == "G":
                if goal is not None:
                    raise MapFormatError("duplicate goal 'G'", line=lineno, column=c + 1)
                goal = here
    if start is None:
        raise MapFormatError("missing start")
    if goal is None:
        raise MapFormatError("missing goal")
    edge = None
    if "edge_cm" in header:
        try:
            edge = float(header["edge_cm"])
        except ValueError:
            raise MapFormatError(f"bad edge_cm {header['edge_cm']!r}") from None
    return HexMap(len(rows), width, grid, start, goal, header.get("name", ""), edge)


def read_map(path) -> HexMap:
    with open(path, encoding="utf-8") as fh:
        return load_map(fh.read())


def render_ascii(hmap: HexMap, overlay=None, mark: str = "*", header: bool = True) -> str:
    """Serialise a map; cells in ``overlay`` (other than B/G) are drawn with ``mark``."""
    out = []
    if header:
        if hmap.name:
            out.append(f"# name: {hmap.name}")
        if hmap.edge_cm is not None:
            out.append(f"# edge_cm: {hmap.edge_cm:g}")
    overlay = set(overlay) if overlay is not None else ()
    sr, sc = hmap.offset_of(hmap.start)
    gr, gc = hmap.offset_of(hmap.goal)
    for r in range(hmap.n_rows):
        chars = []
        for c in range(hmap.m_cols):
            if (r, c) == (sr, sc):
                chars.append("B")
            elif (r, c) == (gr, gc):
                chars.append("G")
            elif overlay and HexCoord(2 * r + (c & 1), c) in overlay:
                chars.append(mark)
            else:
                chars.append(KIND_TO_CHAR[CellKind(int(hmap.grid[r, c]))])
        out.append("".join(chars))
    return "\n".join(out) + "\n"
