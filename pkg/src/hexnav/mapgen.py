"""Seeded synthetic maps standing in for SLAM-built environments.

Presets
-------
``room-35x19-open``
    One room, 35 rows by 19 columns, with a ragged band of unknown cells
    along the walls (scan shadows) and a few alcoves.
``room-35x19-obstacles``
    The same room plus obstacle blobs, some of them touching the walls.
``multiroom-87x59``
    An 87 by 59 floor plan cut into a 4 x 3 grid of rooms by one-cell walls.
    Two-cell doors follow a random spanning tree of the rooms; rooms also get
    scattered furniture.

In every preset the start sits halfway down the right-hand wall and the goal
near the top-left, both touching a wall.  A draw is rejected
and redrawn until the goal is reachable and both hand rules reach it.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import HexNavError, WallFollowError
from .hexgrid import CellKind, HexCoord, HexMap, neighbors
from .wallrules import Hand, wall_follow

FREE, OBST, UNK = int(CellKind.FREE), int(CellKind.OBSTACLE), int(CellKind.UNKNOWN)


def _doubled(r: int, c: int) -> HexCoord:
    return HexCoord(2 * r + (c & 1), c)


def _blob(grid: np.ndarray, rng: np.random.Generator, r: int, c: int, size: int, kind: int) -> None:
    """Grow a connected blob of ``size`` cells from offset cell (r, c)."""
    n, m = grid.shape
    cells = [(r, c)]
    grid[r, c] = kind
    for _ in range(size * 4):
        if len(cells) >= size:
            break
        br, bc = cells[rng.integers(len(cells))]
        _, nb = neighbors(_doubled(br, bc))[rng.integers(6)]
        nr, nc = (nb.i - (nb.j & 1)) >> 1, nb.j
        if 0 <= nr < n and 0 <= nc < m and grid[nr, nc] == FREE:
            grid[nr, nc] = kind
            cells.append((nr, nc))


def _ragged_margin(grid: np.ndarray, rng: np.random.Generator, depth: int, alcoves: int) -> None:
    n, m = grid.shape
    for side in range(4):
        length = m if side < 2 else n
        d = 0
        for t in range(length):
            d = int(np.clip(d + rng.integers(-1, 2), 0, depth))
            for k in range(d):
                if side == 0:
                    grid[k, t] = UNK
                elif side == 1:
                    grid[n - 1 - k, t] = UNK
                elif side == 2:
                    grid[t, k] = UNK
                else:
                    grid[t, m - 1 - k] = UNK
    # alcoves: pockets of free space pushed back into the shadow band
    for _ in range(alcoves):
        side = rng.integers(4)
        w = int(rng.integers(2, 5))
        if side < 2:
            t0 = int(rng.integers(3, m - 3 - w))
            rows = range(0, depth + 1) if side == 0 else range(n - depth - 1, n)
            for rr in rows:
                grid[rr, t0 : t0 + w] = FREE
        else:
            t0 = int(rng.integers(3, n - 3 - w))
            cols = range(0, depth + 1) if side == 2 else range(m - depth - 1, m)
            for cc in cols:
                grid[t0 : t0 + w, cc] = FREE


def _corner_cell(grid: np.ndarray, target: tuple[int, int]) -> HexCoord:
    """Free wall-adjacent cell nearest to the offset position ``target``."""
    n, m = grid.shape
    best = None
    for r in range(n):
        for c in range(m):
            if grid[r, c] != FREE:
                continue
            here = _doubled(r, c)
            wall = False
            for _, nb in neighbors(here):
                nr, nc = (nb.i - (nb.j & 1)) >> 1, nb.j
                if not (0 <= nr < n and 0 <= nc < m) or grid[nr, nc] != FREE:
                    wall = True
                    break
            if not wall:
                continue
            dist = (r - target[0]) ** 2 + (c - target[1]) ** 2
            if best is None or dist < best[0]:
                best = (dist, here)
    if best is None:
        raise HexNavError("no free wall-adjacent cell")
    return best[1]


def _room(rng: np.random.Generator, n: int, m: int, obstacles: bool) -> np.ndarray:
    grid = np.full((n, m), FREE, dtype=np.uint8)
    _ragged_margin(grid, rng, depth=2, alcoves=4)
    if obstacles:
        for _ in range(int(rng.integers(7, 11))):
            r = int(rng.integers(3, n - 3))
            c = int(rng.integers(2, m - 2))
            _blob(grid, rng, r, c, int(rng.integers(4, 12)), OBST)
        # a couple of shelves sticking out of the side walls
        for _ in range(3):
            r = int(rng.integers(6, n - 6))
            side = rng.integers(2)
            span = int(rng.integers(3, 7))
            cols = range(0, span) if side == 0 else range(m - span, m)
            for c in cols:
                grid[r, c] = OBST
    return grid


def _multiroom(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    grid = np.full((n, m), FREE, dtype=np.uint8)
    _ragged_margin(grid, rng, depth=1, alcoves=0)
    row_cuts = [int(round(n * k / 4)) for k in range(1, 4)]
    col_cuts = [int(round(m * k / 3)) for k in range(1, 3)]
    for r in row_cuts:
        grid[r, :] = OBST
    for c in col_cuts:
        grid[:, c] = OBST
    rows = [0] + [r + 1 for r in row_cuts] + [n]
    cols = [0] + [c + 1 for c in col_cuts] + [m]
    n_r, n_c = len(rows) - 1, len(cols) - 1

    # doors along a random spanning tree of the rooms
    edges = []
    for a in range(n_r):
        for b in range(n_c):
            if a + 1 < n_r:
                edges.append(((a, b), (a + 1, b)))
            if b + 1 < n_c:
                edges.append(((a, b), (a, b + 1)))
    order = rng.permutation(len(edges))
    parent = {(a, b): (a, b) for a in range(n_r) for b in range(n_c)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    doors = []
    for e in order:
        u, v = edges[e]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            doors.append(edges[e])

    for (a, b), (a2, b2) in doors:
        width = 2
        if a2 == a + 1:  # door in horizontal wall row_cuts[a]
            lo, hi = cols[b] + 2, cols[b + 1] - 3 - width
            c0 = int(rng.integers(lo, max(lo + 1, hi)))
            grid[row_cuts[a], c0 : c0 + width] = FREE
        else:  # door in vertical wall col_cuts[b]
            lo, hi = rows[a] + 2, rows[a + 1] - 3 - width
            r0 = int(rng.integers(lo, max(lo + 1, hi)))
            grid[r0 : r0 + width, col_cuts[b]] = FREE

    for a in range(n_r):
        for b in range(n_c):
            for _ in range(int(rng.integers(2, 5))):
                r = int(rng.integers(rows[a] + 3, rows[a + 1] - 3))
                c = int(rng.integers(cols[b] + 3, cols[b + 1] - 3))
                _blob(grid, rng, r, c, int(rng.integers(3, 9)), OBST)
    return grid


def _finish(grid: np.ndarray, name: str, edge_cm, start_target, goal_target) -> HexMap:
    start = _corner_cell(grid, start_target)
    goal = _corner_cell(grid, goal_target)
    return HexMap(grid.shape[0], grid.shape[1], grid, start, goal, name, edge_cm)


def _acceptable(hmap: HexMap) -> bool:
    from .planners import bfs_length

    if bfs_length(hmap) is None:
        return False
    try:
        wall_follow(hmap, Hand.LEFT)
        wall_follow(hmap, Hand.RIGHT)
    except WallFollowError:
        return False
    return True


def _draw(seed: int, build: Callable[[np.random.Generator], HexMap], tries: int = 200) -> HexMap:
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(tries):
        hmap = build(np.random.default_rng(child))
        if _acceptable(hmap):
            return hmap
    raise HexNavError(f"no acceptable map drawn for seed {seed} in {tries} tries")


def room_map(seed: int = 0, obstacles: bool = False, n: int = 35, m: int = 19) -> HexMap:
    name = f"room-{n}x{m}-" + ("obstacles" if obstacles else "open")
    return _draw(seed, lambda rng: _finish(_room(rng, n, m, obstacles), name, 15.8,
                                           (n // 2, m - 1), (1, 2)))


def multiroom_map(seed: int = 0, n: int = 87, m: int = 59) -> HexMap:
    name = f"multiroom-{n}x{m}"
    return _draw(seed, lambda rng: _finish(_multiroom(rng, n, m), name, 22.0,
                                           (n // 2, m - 1), (1, 22)))


PRESETS: dict[str, Callable[[int], HexMap]] = {
    "room-35x19-open": lambda seed: room_map(seed, obstacles=False),
    "room-35x19-obstacles": lambda seed: room_map(seed, obstacles=True),
    "multiroom-87x59": multiroom_map,
}


def generate(preset: str, seed: int = 0) -> HexMap:
    try:
        build = PRESETS[preset]
    except KeyError:
        raise HexNavError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    return build(seed)


def random_map(rng: np.random.Generator, n: int = 12, m: int = 10, density: float = 0.25) -> HexMap:
    """Small random obstacle field with endpoints on the outer wall (for property campaigns).

    May return a map whose goal is unreachable; callers filter.
    """
    grid = (rng.random((n, m)) < density).astype(np.uint8) * OBST
    border = [(r, c) for r in range(n) for c in range(m) if r in (0, n - 1) or c in (0, m - 1)]
    picks = rng.choice(len(border), size=2, replace=False)
    (sr, sc), (gr, gc) = border[picks[0]], border[picks[1]]
    grid[sr, sc] = FREE
    grid[gr, gc] = FREE
    return HexMap(n, m, grid, _doubled(sr, sc), _doubled(gr, gc), "random")


def campaign_maps(seed: int, count: int, n: int = 12, m: int = 10, density: float = 0.25,
                  wall_following: bool = True) -> list[HexMap]:
    """``count`` seeded random maps whose goal is reachable.

    With ``wall_following`` a map is also kept only if both hand rules reach
    the goal, i.e. the closed loop of the two trajectories exists.
    """
    from .planners import bfs_length

    out: list[HexMap] = []
    ss = np.random.SeedSequence(seed)
    while len(out) < count:
        for child in ss.spawn(count):
            hmap = random_map(np.random.default_rng(child), n, m, density)
            ok = _acceptable(hmap) if wall_following else bfs_length(hmap) is not None
            if ok:
                out.append(hmap)
                if len(out) == count:
                    break
    return out
