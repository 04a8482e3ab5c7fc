"""Deterministic hex navigation MDP with bounce-on-collision."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ContractError
from .hexgrid import AbsDir, HexCoord, HexMap, neighbor
from .wallrules import RegionMask

GOAL_REWARD = 100.0
COLLISION_REWARD = -100.0
STEP_REWARD = -1.0


class Done(Enum):
    GOAL = "goal"
    STEP_LIMIT = "step_limit"


@dataclass(frozen=True)
class Transition:
    state: HexCoord
    action: AbsDir
    reward: float
    next_state: HexCoord
    done: Optional[Done] = None

    @property
    def terminal(self) -> bool:
        """True when the bootstrap must be cut (goal reached)."""
        return self.done is Done.GOAL


def transition_table(hmap: HexMap, allowed: Optional[RegionMask] = None) -> np.ndarray:
    """``table[cell, a]`` is the target cell index, or -1 when the move bounces."""
    table = np.full((hmap.n_cells, 6), -1, dtype=np.int64)
    for idx in range(hmap.n_cells):
        c = hmap.coord(idx)
        if not hmap.is_free(c) or (allowed is not None and c not in allowed):
            continue
        for d in range(6):
            n = neighbor(c, d)
            if hmap.is_free(n) and (allowed is None or n in allowed):
                table[idx, d] = hmap.index(n)
    return table


class NavEnv:
    def __init__(self, hmap: HexMap, allowed: Optional[RegionMask] = None, max_steps: int = 10_000):
        if max_steps < 1:
            raise ValueError("max_steps must be positive")
        if allowed is not None and (hmap.start not in allowed or hmap.goal not in allowed):
            raise ContractError("region must contain start and goal")
        self.map = hmap
        self.allowed = allowed
        self.max_steps = max_steps
        self.table = transition_table(hmap, allowed)
        self.start_idx = hmap.index(hmap.start)
        self.goal_idx = hmap.index(hmap.goal)
        self.pos = hmap.start
        self.steps_in_episode = 0
        self.done: Optional[Done] = None

    def passable(self, c) -> bool:
        return self.map.is_free(c) and (self.allowed is None or c in self.allowed)

    @property
    def n_states(self) -> int:
        """Number of cells the agent can occupy."""
        return int((self.table >= 0).any(axis=1).sum())

    def reset(self) -> HexCoord:
        self.pos = self.map.start
        self.steps_in_episode = 0
        self.done = None
        return self.pos

    def step(self, action: int) -> Transition:
        if self.done is not None:
            raise ContractError("episode is over; call reset()")
        action = AbsDir(action)
        target = int(self.table[self.map.index(self.pos), action])
        state = self.pos
        if target < 0:
            reward, nxt = COLLISION_REWARD, state
        elif target == self.goal_idx:
            reward, nxt = GOAL_REWARD, self.map.goal
            self.done = Done.GOAL
        else:
            reward, nxt = STEP_REWARD, self.map.coord(target)
        self.pos = nxt
        self.steps_in_episode += 1
        if self.done is None and self.steps_in_episode >= self.max_steps:
            self.done = Done.STEP_LIMIT
        return Transition(state, action, reward, nxt, self.done)


def restrict(hmap: HexMap, region: RegionMask, max_steps: int = 10_000) -> NavEnv:
    """Environment in which every cell outside ``region`` behaves as an obstacle."""
    return NavEnv(hmap, region, max_steps)
