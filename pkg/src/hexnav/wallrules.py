"""Rule-based trajectory generation on hex maps.

* hand-rule wall following (left / right),
* K-step trajectory reduction and the closed region spanned by two reduced
  trajectories,
* the Pledge rule, counter-clockwise and clockwise.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Callable, Iterable, Optional, Sequence

from .errors import ContractError, EnclosedError, WallFollowError
from .hexgrid import AbsDir, HexCoord, HexMap, direction_between, neighbor, k_ring, step_distance

Passable = Callable[[HexCoord], bool]


class RelAction(IntEnum):
    """Egocentric actions; the value is the clockwise offset from the heading."""

    F = 0
    RF = 1
    RR = 2
    R = 3
    LR = 4
    LF = 5


class Hand(Enum):
    LEFT = "left"
    RIGHT = "right"


HAND_PRIORITY = {
    Hand.RIGHT: (RelAction.RF, RelAction.F, RelAction.LF, RelAction.LR, RelAction.R, RelAction.RR),
    Hand.LEFT: (RelAction.LF, RelAction.F, RelAction.RF, RelAction.RR, RelAction.R, RelAction.LR),
}


def relative_to_absolute(heading: int, rel: int) -> AbsDir:
    return AbsDir((int(heading) + int(rel)) % 6)


@dataclass(frozen=True)
class Trajectory:
    states: tuple[HexCoord, ...]
    actions: tuple[AbsDir, ...] = field(default=())

    def __post_init__(self):
        states = tuple(HexCoord(*s) for s in self.states)
        object.__setattr__(self, "states", states)
        if not self.actions and len(states) > 1:
            acts = tuple(direction_between(a, b) for a, b in zip(states, states[1:]))
            object.__setattr__(self, "actions", acts)
        else:
            object.__setattr__(self, "actions", tuple(AbsDir(a) for a in self.actions))
        if len(self.actions) != max(0, len(states) - 1):
            raise ValueError("a trajectory needs exactly one action per transition")

    @classmethod
    def from_states(cls, states: Iterable) -> "Trajectory":
        return cls(tuple(states))

    @property
    def length(self) -> int:
        """Number of moves."""
        return len(self.actions)

    def validate(self, hmap: HexMap, passable: Optional[Passable] = None) -> None:
        ok = passable or hmap.is_free
        for s in self.states:
            if not ok(s):
                raise ValueError(f"state {tuple(s)} is not passable")
        for a, s, t in zip(self.actions, self.states, self.states[1:]):
            if neighbor(s, a) != t:
                raise ValueError(f"action {a.name} does not lead from {tuple(s)} to {tuple(t)}")
        if self.states[-1] != hmap.goal:
            raise ValueError("trajectory does not end at the goal")

    def to_json(self) -> dict:
        return {"states": [[s.i, s.j] for s in self.states], "actions": [int(a) for a in self.actions]}


def wall_follow(
    hmap: HexMap,
    hand: Hand,
    step_cap: Optional[int] = None,
    heading: int = AbsDir.N,
) -> Trajectory:
    """Follow a wall from ``hmap.start`` with the given hand until the goal.

    Each step takes the first relative action in the hand's priority order
    whose target is free; the heading becomes the direction just taken.
    """
    if step_cap is None:
        step_cap = 20 * hmap.n_cells
    pos = hmap.start
    if not hmap.free_neighbors(pos):
        raise EnclosedError(f"start enclosed at {tuple(pos)}")
    heading = AbsDir(heading)
    priority = HAND_PRIORITY[hand]
    states = [pos]
    actions = []
    seen = {(pos, heading)}
    while pos != hmap.goal:
        if len(actions) >= step_cap:
            raise WallFollowError(f"goal unreachable by wall-following ({hand.value} hand, cap {step_cap})")
        for rel in priority:
            d = relative_to_absolute(heading, rel)
            nxt = neighbor(pos, d)
            if hmap.is_free(nxt):
                break
        pos, heading = nxt, d
        states.append(pos)
        actions.append(d)
        # the rule is a deterministic function of (cell, heading)
        if pos != hmap.goal and (pos, heading) in seen:
            raise WallFollowError(f"goal unreachable by wall-following ({hand.value} hand loops)")
        seen.add((pos, heading))
    return Trajectory(tuple(states), tuple(actions))


def k_step_path(
    hmap: HexMap, s, s2, k: int, passable: Optional[Passable] = None
) -> Optional[list[HexCoord]]:
    """A free monotone ``k``-step path from ``s`` to ``s2``, or ``None``.

    Directions are tried in ``AbsDir`` order, so the first complete path is
    the lexicographically smallest action sequence.
    """
    if step_distance(s, s2) != k:
        raise ContractError(f"step distance {tuple(s)}->{tuple(s2)} is not {k}")
    ok = passable or hmap.is_free
    s, s2 = HexCoord(*s), HexCoord(*s2)
    path = [s]

    def extend(cur, remaining):
        if remaining == 0:
            return True
        for d in range(6):
            nxt = neighbor(cur, d)
            if step_distance(nxt, s2) != remaining - 1 or not ok(nxt):
                continue
            path.append(nxt)
            if extend(nxt, remaining - 1):
                return True
            path.pop()
        return False

    return path if extend(s, k) else None


@dataclass(frozen=True)
class Splice:
    """One shortcut made by :func:`reduce_trajectory`: ``replaced`` moves became ``k``."""

    start: HexCoord
    end: HexCoord
    k: int
    replaced: int


def reduce_trajectory(
    hmap: HexMap,
    traj: Trajectory,
    k: int,
    log: Optional[list] = None,
    passable: Optional[Passable] = None,
) -> Trajectory:
    """Shorten ``traj`` with ``k``-step shortcuts until nothing changes.

    For each state ``s_i`` (front to back) the farthest later state ``s_j``
    with ``j - i > k`` lying on the ``k``-ring of ``s_i`` and joined to it by
    a free ``k``-step path is spliced in.  Each splice is appended to ``log``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    states = list(traj.states)
    changed = True
    while changed:
        changed = False
        last_pos = _last_positions(states)
        i = 0
        while i < len(states) - k:
            ring = k_ring(states[i], k)
            candidates = sorted(
                (last_pos[c] for c in ring if c in last_pos and last_pos[c] - i > k), reverse=True
            )
            for j in candidates:
                path = k_step_path(hmap, states[i], states[j], k, passable)
                if path is None:
                    continue
                if log is not None:
                    log.append(Splice(states[i], states[j], k, j - i))
                states[i : j + 1] = path
                last_pos = _last_positions(states)
                changed = True
                break
            i += 1
    return Trajectory.from_states(states)


def _last_positions(states: Sequence[HexCoord]) -> dict[HexCoord, int]:
    return {s: idx for idx, s in enumerate(states)}


@dataclass(frozen=True)
class RegionMask:
    inside: frozenset

    def __contains__(self, c) -> bool:
        return HexCoord(*c) in self.inside

    def __len__(self) -> int:
        return len(self.inside)

    def __iter__(self):
        return iter(self.inside)


def closed_region(hmap: HexMap, left: Trajectory, right: Trajectory) -> RegionMask:
    """Cells on, or enclosed by, the loop formed by two trajectories.

    Everything reachable from a one-cell margin around the map without
    stepping on a trajectory cell is outside; obstacles do not stop the fill.
    """
    if left.states[0] != right.states[0] or left.states[-1] != right.states[-1]:
        raise ContractError("trajectories must share start and goal")
    wall = set(left.states) | set(right.states)

    def in_box(c):
        i, j = c
        if not -1 <= j <= hmap.m_cols:
            return False
        r = (i - (j & 1)) >> 1
        return -1 <= r <= hmap.n_rows

    seed = HexCoord(-2 + 1, -1)  # offset (-1, -1)
    outside = {seed}
    queue = deque([seed])
    while queue:
        cur = queue.popleft()
        for d in range(6):
            nxt = neighbor(cur, d)
            if nxt in outside or nxt in wall or not in_box(nxt):
                continue
            outside.add(nxt)
            queue.append(nxt)
    inside = set(wall)
    for c in hmap.coords():
        if c not in outside and hmap.is_free(c):
            inside.add(c)
    return RegionMask(frozenset(inside))


# Pledge rule ---------------------------------------------------------------

class Chirality(Enum):
    COUNTERCLOCKWISE = "ccw"
    CLOCKWISE = "cw"


# clockwise offsets, expressed for the counter-clockwise variant
_THETA0_ORDER = (0, 5, 4, 3, 2, 1)  # F > LF > LR > R > RR > RF
_FOLLOW_ORDER = (1, 0, 5, 4, 3, 2)  # RF > F > LF > LR > R > RR


@dataclass(frozen=True)
class PledgeState:
    theta: int = 0
    heading: AbsDir = AbsDir.N
    chirality: Chirality = Chirality.COUNTERCLOCKWISE


def _sweep_turn(rank: int, following: bool) -> int:
    # Both scan orders sweep counter-clockwise, so the k-th candidate means
    # the heading rotated by -k (the follow order starts one step right).
    # Counting the shortest turn instead lets theta jump over 0 on sharp
    # corners, after which the rule can circle an obstacle forever.
    return 1 - rank if following else -rank


def pledge_action(
    hmap: HexMap, pos, st: PledgeState, passable: Optional[Passable] = None
) -> tuple[AbsDir, PledgeState]:
    """Choose the next Pledge move and update the turn counter.

    With ``theta == 0`` the straight-ahead-first order is scanned, otherwise
    the wall-following order.  The turn added to ``theta`` is the rotation
    swept by the scan, so it lies in -5..0 or -4..+1.  The clockwise variant
    mirrors both orders and counts turns with the opposite sign.
    """
    ok = passable or hmap.is_free
    following = st.theta != 0
    order = _FOLLOW_ORDER if following else _THETA0_ORDER
    sign = 1 if st.chirality is Chirality.COUNTERCLOCKWISE else -1
    for rank, off in enumerate(order):
        d = AbsDir((st.heading + sign * off) % 6)
        if ok(neighbor(pos, d)):
            turn = _sweep_turn(rank, following)
            return d, PledgeState(st.theta + turn, d, st.chirality)
    raise EnclosedError(f"no passable direction from {tuple(pos)}")


def pledge_navigate(
    hmap: HexMap,
    chirality: Chirality = Chirality.COUNTERCLOCKWISE,
    heading: int = AbsDir.N,
    max_steps: Optional[int] = None,
    start=None,
    passable: Optional[Passable] = None,
) -> Trajectory:
    """Walk with the Pledge rule from ``start`` (default map start) to the goal."""
    if max_steps is None:
        max_steps = 10 * hmap.free_count
    pos = HexCoord(*(start if start is not None else hmap.start))
    st = PledgeState(0, AbsDir(heading), chirality)
    states = [pos]
    while pos != hmap.goal:
        if len(states) > max_steps:
            raise WallFollowError(f"Pledge rule did not reach the goal within {max_steps} steps")
        d, st = pledge_action(hmap, pos, st, passable)
        pos = neighbor(pos, d)
        states.append(pos)
    return Trajectory.from_states(states)


pledge = pledge_navigate
