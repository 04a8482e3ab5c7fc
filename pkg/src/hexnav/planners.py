"""Shortest-path oracle and classical baselines: BFS, A* and ant colony search."""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NoPathError
from .hexgrid import SQRT3, HexMap, cell_center, step_distance
from .navenv import transition_table
from .wallrules import RegionMask, Trajectory


class Path(Trajectory):
    """A planned start-to-goal path; actions are derived from the states."""


def _walk_back(hmap: HexMap, parent: dict, goal: int) -> Path:
    out = [goal]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return Path.from_states(hmap.coord(i) for i in reversed(out))


def bfs_search(hmap: HexMap, region: Optional[RegionMask] = None) -> tuple[Optional[Path], int]:
    """Breadth-first search; returns the path and the number of expanded cells."""
    table = transition_table(hmap, region)
    start, goal = hmap.index(hmap.start), hmap.index(hmap.goal)
    if region is not None and (hmap.start not in region or hmap.goal not in region):
        return None, 0
    parent = {start: None}
    queue = deque([start])
    expanded = 0
    while queue:
        cur = queue.popleft()
        expanded += 1
        if cur == goal:
            return _walk_back(hmap, parent, goal), expanded
        for nxt in table[cur]:
            nxt = int(nxt)
            if nxt >= 0 and nxt not in parent:
                parent[nxt] = cur
                queue.append(nxt)
    return None, expanded


def bfs_shortest(hmap: HexMap, region: Optional[RegionMask] = None) -> Optional[Path]:
    return bfs_search(hmap, region)[0]


def bfs_length(hmap: HexMap, region: Optional[RegionMask] = None) -> Optional[int]:
    path = bfs_shortest(hmap, region)
    return None if path is None else path.length


def astar_search(hmap: HexMap, edge_cm: float = 1.0) -> tuple[Optional[Path], int]:
    """A* with unit hop costs and the Euclidean heuristic measured in hops."""
    if edge_cm <= 0:
        raise ValueError("edge length must be positive")
    table = transition_table(hmap)
    start, goal = hmap.index(hmap.start), hmap.index(hmap.goal)
    gx, gy = cell_center(hmap.goal, edge_cm)
    hop = SQRT3 * edge_cm
    h_cache: dict[int, float] = {}

    def h(idx):
        if idx not in h_cache:
            x, y = cell_center(hmap.coord(idx), edge_cm)
            # shaved so rounding can never make the estimate inadmissible
            h_cache[idx] = math.hypot(x - gx, y - gy) / hop * (1 - 1e-12)
        return h_cache[idx]

    g = {start: 0}
    parent = {start: None}
    counter = 0
    heap = [(h(start), counter, start)]
    closed = set()
    expanded = 0
    while heap:
        _, _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        closed.add(cur)
        expanded += 1
        if cur == goal:
            return _walk_back(hmap, parent, goal), expanded
        for nxt in table[cur]:
            nxt = int(nxt)
            if nxt < 0:
                continue
            cand = g[cur] + 1
            if cand < g.get(nxt, math.inf):
                g[nxt] = cand
                parent[nxt] = cur
                closed.discard(nxt)
                counter += 1
                heapq.heappush(heap, (cand + h(nxt), counter, nxt))
    return None, expanded


def astar(hmap: HexMap, edge_cm: float = 1.0) -> Optional[Path]:
    return astar_search(hmap, edge_cm)[0]


@dataclass(frozen=True)
class AcoParams:
    n_ants: int = 100
    iterations: int = 100
    alpha: float = 1.0
    beta: float = 5.0
    rho: float = 0.1
    deposit: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.n_ants < 1 or self.iterations < 1:
            raise ValueError("n_ants and iterations must be >= 1")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")


def aco(hmap: HexMap, params: AcoParams = AcoParams()) -> Path:
    """Ant colony search with tabu lists and global-best pheromone deposit.

    All ants of an iteration advance together; an ant picks the next cell
    with weight ``tau**alpha * (1 / (1 + d_goal))**beta`` where ``d_goal`` is
    the step distance to the goal.  Ants with no untried neighbour die.
    """
    rng = np.random.default_rng(params.seed)
    table = transition_table(hmap)
    n_cells = hmap.n_cells
    start, goal = hmap.index(hmap.start), hmap.index(hmap.goal)
    eta = np.zeros(n_cells + 1)  # slot -1 -> 0 weight for blocked moves
    for idx in range(n_cells):
        eta[idx] = 1.0 / (1.0 + step_distance(hmap.coord(idx), hmap.goal))
    eta_beta = eta ** params.beta
    tau = np.ones((n_cells, 6))
    max_len = hmap.free_count
    n = params.n_ants
    ants = np.arange(n)
    best: Optional[np.ndarray] = None

    for _ in range(params.iterations):
        pos = np.full(n, start)
        visited = np.zeros((n, n_cells), dtype=bool)
        visited[:, start] = True
        route = np.full((n, max_len + 1), -1, dtype=np.int64)
        route[:, 0] = start
        length = np.zeros(n, dtype=np.int64)
        active = np.ones(n, dtype=bool)
        arrived = np.zeros(n, dtype=bool)
        for step in range(max_len):
            live = ants[active]
            if live.size == 0:
                break
            nb = table[pos[live]]
            ok = (nb >= 0) & ~visited[live[:, None], np.where(nb >= 0, nb, 0)]
            w = (tau[pos[live]] ** params.alpha) * eta_beta[nb] * ok
            tot = w.sum(axis=1)
            dead = tot <= 0
            u = rng.random(live.size) * tot
            choice = np.minimum((np.cumsum(w, axis=1) <= u[:, None]).sum(axis=1), 5)
            nxt = nb[np.arange(live.size), choice]
            go = live[~dead]
            nxt = nxt[~dead]
            active[live[dead]] = False
            pos[go] = nxt
            visited[go, nxt] = True
            route[go, step + 1] = nxt
            length[go] = step + 1
            hit = go[nxt == goal]
            arrived[hit] = True
            active[hit] = False
        if arrived.any():
            done = ants[arrived]
            winner = done[np.argmin(length[done])]
            if best is None or length[winner] < best.size - 1:
                best = route[winner, : length[winner] + 1].copy()
        tau *= 1 - params.rho
        if best is not None:
            src = best[:-1]
            dirs = np.argmax(table[src] == best[1:, None], axis=1)
            tau[src, dirs] += params.deposit / (best.size - 1)

    if best is None:
        raise NoPathError("no path constructed by any ant")
    return Path.from_states(hmap.coord(int(i)) for i in best)
