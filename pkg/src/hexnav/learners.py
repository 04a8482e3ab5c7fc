"""Tabular Q-learning / SARSA with pluggable exploration and the rule-guided loop.

The per-step primitives are numba-compiled and shared by the Python-level
API (used in tests and tooling) and by the compiled training loop, so both
paths run the same arithmetic.  Random draws inside the training loop come
from numba's Mersenne Twister, seeded once per run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .errors import ContractError
from .hexgrid import AbsDir, HexCoord, HexMap
from .navenv import COLLISION_REWARD, GOAL_REWARD, STEP_REWARD, NavEnv, Transition, restrict
from .wallrules import (
    Hand,
    RegionMask,
    Splice,
    Trajectory,
    closed_region,
    reduce_trajectory,
    wall_follow,
)

ALGOS = ("q", "sarsa")
STRATEGIES = ("epsilon", "softmax", "count", "ucb")


# ---------------------------------------------------------------------------
# tables and schedules

@dataclass
class QTable:
    q: np.ndarray
    visits: np.ndarray
    discounted_visits: np.ndarray
    hmap: Optional[HexMap] = None

    @classmethod
    def zeros(cls, n_states: int, hmap: Optional[HexMap] = None) -> "QTable":
        return cls(
            np.zeros((n_states, 6)),
            np.zeros((n_states, 6), dtype=np.int64),
            np.zeros((n_states, 6)),
            hmap,
        )

    @classmethod
    def for_map(cls, hmap: HexMap) -> "QTable":
        return cls.zeros(hmap.n_cells, hmap)

    def idx(self, s) -> int:
        if isinstance(s, (int, np.integer)):
            return int(s)
        if self.hmap is None:
            raise ContractError("coordinate lookup needs a table built with for_map()")
        return self.hmap.index(s)

    def __getitem__(self, key):
        s, a = key
        return float(self.q[self.idx(s), int(a)])

    def __setitem__(self, key, value):
        s, a = key
        self.q[self.idx(s), int(a)] = value


@dataclass(frozen=True)
class Schedule:
    """Per-episode exploration parameter.

    ``exp``: ``scale * exp(-rate * eta)``; ``rational``: ``scale / (rate * eta + offset)``;
    ``constant``: ``scale``.  From episode ``cutoff`` on the value is ``after``.
    """

    kind: str = "exp"
    rate: float = 0.001
    scale: float = 1.0
    offset: float = 0.0
    cutoff: Optional[int] = None
    after: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exp", "rational", "constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def __call__(self, eta: int) -> float:
        if self.cutoff is not None and eta >= self.cutoff:
            return float(self.after)
        if self.kind == "exp":
            return self.scale * math.exp(-self.rate * eta)
        if self.kind == "rational":
            denom = self.rate * eta + self.offset
            return math.inf if denom == 0 else self.scale / denom
        return float(self.scale)

    def values(self, n_episodes: int) -> np.ndarray:
        """Values for episode indices ``0..n_episodes``."""
        return np.array([self(eta) for eta in range(n_episodes + 1)], dtype=np.float64)


@dataclass(frozen=True)
class ExplorationStrategy:
    """``kind`` is one of epsilon, softmax, count, ucb.

    ``schedule`` is the epsilon schedule for epsilon/count/ucb and the
    temperature schedule for softmax.
    """

    kind: str = "epsilon"
    schedule: Schedule = field(default_factory=lambda: Schedule("exp", 0.001, 1.0, cutoff=3500))
    beta: float = 0.4
    damping: float = 0.9
    c_explore: float = 0.01

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown exploration strategy {self.kind!r}")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.c_explore <= 0:
            raise ValueError("c_explore must be > 0")


@dataclass(frozen=True)
class RurlConfig:
    k: int = 3
    n_pledge: int = 100
    max_steps: int = 10_000
    max_episodes: int = 7_000
    omega: float = 0.2
    b: float = 8.0
    alpha: float = 0.01
    gamma: float = 0.99
    algo: str = "q"
    strategy: ExplorationStrategy = field(default_factory=ExplorationStrategy)
    seed: int = 0
    pledge_heading: int = AbsDir.N

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}")
        if self.k < 1 or self.max_steps < 1 or self.max_episodes < 1 or self.n_pledge < 0:
            raise ValueError("k, max_steps, max_episodes must be positive and n_pledge >= 0")
        if not 0 < self.alpha <= 1 or not 0 <= self.gamma < 1:
            raise ValueError("need 0 < alpha <= 1 and 0 <= gamma < 1")
        if self.omega < 0 or self.b <= 0:
            raise ValueError("need omega >= 0 and b > 0")


@dataclass
class TrainResult:
    steps_per_episode: np.ndarray
    pledge_used: np.ndarray
    total_steps: int
    final_greedy_path: Optional[Trajectory]
    converged: bool
    q_table: QTable
    region_size: int = 0

    @property
    def non_convergent(self) -> bool:
        return not self.converged


# ---------------------------------------------------------------------------
# compiled primitives

@njit(cache=True)
def _greedy(q, s):
    best = 0
    for a in range(1, 6):
        if q[s, a] > q[s, best]:
            best = a
    return best


@njit(cache=True)
def _td_update(q, s, a, r, boot, terminal, alpha, gamma):
    target = r if terminal else r + gamma * boot
    q[s, a] += alpha * (target - q[s, a])


@njit(cache=True)
def _eps_greedy(q, s, eps, u1, u2):
    if u1 < eps:
        return min(int(u2 * 6.0), 5)
    return _greedy(q, s)


@njit(cache=True)
def _softmax_probs(q, s, tau):
    m = q[s, 0]
    for a in range(1, 6):
        if q[s, a] > m:
            m = q[s, a]
    p = np.empty(6)
    tot = 0.0
    for a in range(6):
        p[a] = math.exp((q[s, a] - m) / tau)
        tot += p[a]
    for a in range(6):
        p[a] /= tot
    return p


@njit(cache=True)
def _softmax(q, s, tau, u):
    p = _softmax_probs(q, s, tau)
    acc = 0.0
    for a in range(5):
        acc += p[a]
        if u < acc:
            return a
    return 5


@njit(cache=True)
def _count_bonus(n, beta):
    return math.sqrt(beta / math.log(n + 1.0))


@njit(cache=True)
def _ucb_select(q, nd, s, c):
    total = 0.0
    for a in range(6):
        if nd[s, a] == 0.0:
            return a
        total += nd[s, a]
    log_total = math.log(total)
    best = 0
    best_score = -math.inf
    for a in range(6):
        score = q[s, a] + c * math.sqrt(max(log_total, 0.0) / nd[s, a])
        if score > best_score:
            best_score = score
            best = a
    return best


@njit(cache=True)
def _ucb_visit(nd, s, a, d):
    for b in range(6):
        nd[s, b] *= d
    nd[s, a] += 1.0


# Pledge on a transition table; offsets as in wallrules
@njit(cache=True)
def _pledge_step(table, s, pstate, ccw):
    theta = pstate[1]
    heading = pstate[2]
    sign = 1 if ccw else -1
    following = theta != 0
    for k in range(6):
        if following:
            off = (1 - k) % 6  # 1, 0, 5, 4, 3, 2
        else:
            off = (6 - k) % 6  # 0, 5, 4, 3, 2, 1
        d = (heading + sign * off) % 6
        if table[s, d] >= 0:
            turn = 1 - k if following else -k
            pstate[1] = theta + turn
            pstate[2] = d
            return d
    return -1


@njit(cache=True)
def _choose(q, nd, s, eta, steps, strategy, param, ucb_d, ucb_c,
            pledge_on, n_pledge, threshold, table, pstate, heading0):
    # pstate = [active, theta, heading, used]
    if pledge_on and eta <= n_pledge and steps >= threshold:
        if pstate[0] == 0:
            pstate[0] = 1
            pstate[1] = 0
            pstate[2] = heading0
            pstate[3] = 1
        a = _pledge_step(table, s, pstate, eta % 2 == 1)
        if a >= 0:
            if strategy == 3:
                _ucb_visit(nd, s, a, ucb_d)
            return a
    u1 = np.random.random()
    u2 = np.random.random()
    if strategy == 1:
        return _softmax(q, s, param, u1)
    if strategy == 3:
        if u1 < param:
            a = min(int(u2 * 6.0), 5)
        else:
            a = _ucb_select(q, nd, s, ucb_c)
        _ucb_visit(nd, s, a, ucb_d)
        return a
    return _eps_greedy(q, s, param, u1, u2)


@njit(cache=True)
def _train_kernel(table, start, goal, n_episodes, max_steps, alpha, gamma, sarsa,
                  strategy, sched, beta, ucb_d, ucb_c, pledge_on, n_pledge, thresholds,
                  heading0, seed, q, visits, nd):
    np.random.seed(seed)
    steps_out = np.zeros(n_episodes, dtype=np.int64)
    used_out = np.zeros(n_episodes, dtype=np.int64)
    pstate = np.zeros(4, dtype=np.int64)
    for eta in range(1, n_episodes + 1):
        param = sched[eta]
        thr = thresholds[eta]
        pstate[:] = 0
        s = start
        steps = 0
        a = 0
        if sarsa:
            a = _choose(q, nd, s, eta, steps, strategy, param, ucb_d, ucb_c,
                        pledge_on, n_pledge, thr, table, pstate, heading0)
        while True:
            if not sarsa:
                a = _choose(q, nd, s, eta, steps, strategy, param, ucb_d, ucb_c,
                            pledge_on, n_pledge, thr, table, pstate, heading0)
            t = table[s, a]
            terminal = False
            if t < 0:
                r = -100.0
                s2 = s
            elif t == goal:
                r = 100.0
                s2 = t
                terminal = True
            else:
                r = -1.0
                s2 = t
            steps += 1
            visits[s, a] += 1
            if strategy == 2:
                r += _count_bonus(visits[s, a], beta)
            done = terminal or steps >= max_steps
            a2 = 0
            if terminal:
                boot = 0.0
            elif sarsa:
                a2 = _choose(q, nd, s2, eta, steps, strategy, param, ucb_d, ucb_c,
                             pledge_on, n_pledge, thr, table, pstate, heading0)
                boot = q[s2, a2]
            else:
                boot = q[s2, _greedy(q, s2)]
            _td_update(q, s, a, r, boot, terminal, alpha, gamma)
            s = s2
            a = a2
            if done:
                break
        steps_out[eta - 1] = steps
        used_out[eta - 1] = pstate[3]
    return steps_out, used_out


# ---------------------------------------------------------------------------
# Python-level API

def q_update(table: QTable, t: Transition, alpha: float, gamma: float) -> QTable:
    s, s2 = table.idx(t.state), table.idx(t.next_state)
    boot = 0.0 if t.terminal else float(table.q[s2].max())
    _td_update(table.q, s, int(t.action), float(t.reward), boot, t.terminal, alpha, gamma)
    return table


def sarsa_update(table: QTable, t: Transition, next_action: int, alpha: float, gamma: float) -> QTable:
    s, s2 = table.idx(t.state), table.idx(t.next_state)
    boot = 0.0 if t.terminal else float(table.q[s2, int(next_action)])
    _td_update(table.q, s, int(t.action), float(t.reward), boot, t.terminal, alpha, gamma)
    return table


def greedy_action(table: QTable, s) -> AbsDir:
    return AbsDir(_greedy(table.q, table.idx(s)))


def select_epsilon_greedy(table: QTable, s, eps: float, rng: np.random.Generator) -> AbsDir:
    if not 0 <= eps <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    u1, u2 = rng.random(2)
    return AbsDir(_eps_greedy(table.q, table.idx(s), eps, u1, u2))


def softmax_probabilities(table: QTable, s, tau: float) -> np.ndarray:
    if tau <= 0:
        raise ValueError("tau must be > 0")
    return _softmax_probs(table.q, table.idx(s), tau)


def select_softmax(table: QTable, s, tau: float, rng: np.random.Generator) -> AbsDir:
    if tau <= 0:
        raise ValueError("tau must be > 0")
    return AbsDir(_softmax(table.q, table.idx(s), tau, rng.random()))


def count_bonus(visits: int, beta: float) -> float:
    """Exploration bonus ``sqrt(beta / ln(visits + 1))``; ``visits`` already includes this visit."""
    if visits < 1:
        raise ContractError("count bonus needs visits >= 1 (increment before computing)")
    return _count_bonus(float(visits), beta)


def ucb_bonus(table: QTable, s, c: float) -> np.ndarray:
    nd = table.discounted_visits[table.idx(s)]
    total = nd.sum()
    with np.errstate(divide="ignore"):
        return c * np.sqrt(np.log(total) / nd)


def select_ucb(table: QTable, s, damping: float, c: float, update: bool = True) -> AbsDir:
    """Discounted-UCB choice at ``s``; unvisited actions come first.

    With ``update`` the counts at ``s`` are then decayed by ``damping`` and
    the chosen action's count is incremented.
    """
    if not 0 < damping <= 1 or c <= 0:
        raise ValueError("need 0 < damping <= 1 and c > 0")
    si = table.idx(s)
    a = _ucb_select(table.q, table.discounted_visits, si, c)
    if update:
        _ucb_visit(table.discounted_visits, si, a, damping)
    return AbsDir(a)


def pledge_threshold(eta: float, max_steps: float, omega: float, b: float) -> float:
    """Step budget before the Pledge rule takes over in episode ``eta``."""
    if omega < 0 or b <= 0:
        raise ValueError("need omega >= 0 and b > 0")
    return max_steps / (omega * eta + b)


@dataclass
class RuleSpace:
    """Outcome of the rule stage: both reduced trajectories and their region."""

    left: Trajectory
    right: Trajectory
    left_reduced: Trajectory
    right_reduced: Trajectory
    region: RegionMask
    splices: list[Splice]


def build_rule_space(hmap: HexMap, k: int, heading: int = AbsDir.N) -> RuleSpace:
    left = wall_follow(hmap, Hand.LEFT, heading=heading)
    right = wall_follow(hmap, Hand.RIGHT, heading=heading)
    splices: list[Splice] = []
    left_k = reduce_trajectory(hmap, left, k, log=splices)
    right_k = reduce_trajectory(hmap, right, k, log=splices)
    region = closed_region(hmap, left_k, right_k)
    return RuleSpace(left, right, left_k, right_k, region, splices)


def greedy_path(env: NavEnv, q: np.ndarray) -> tuple[Optional[Trajectory], bool]:
    """Follow argmax actions from the start; ``(None, False)`` on a revisit or cap."""
    s = env.start_idx
    seen = {s}
    states = [env.map.start]
    for _ in range(max(env.n_states, 1)):
        t = int(env.table[s, _greedy(q, s)])
        if t < 0 or t in seen:
            return None, False
        states.append(env.map.coord(t))
        if t == env.goal_idx:
            return Trajectory.from_states(states), True
        seen.add(t)
        s = t
    return None, False


def train(
    config: RurlConfig,
    env: NavEnv,
    rules_enabled: bool = True,
    pledge_enabled: bool = True,
) -> TrainResult:
    """Run one training run of ``config.max_episodes`` episodes.

    With ``rules_enabled`` learning happens in the region enclosed by the
    reduced wall-following trajectories; with ``pledge_enabled`` the first
    ``n_pledge`` episodes hand over to the Pledge rule once their step count
    reaches the decaying threshold.
    """
    hmap = env.map
    if rules_enabled:
        space = build_rule_space(hmap, config.k, config.pledge_heading)
        env = restrict(hmap, space.region, config.max_steps)
    else:
        env = NavEnv(hmap, env.allowed, config.max_steps)
    table = QTable.for_map(hmap)
    strat = config.strategy
    sched = strat.schedule.values(config.max_episodes)
    if strat.kind == "softmax" and (sched <= 0).any():
        raise ValueError("softmax temperature must stay positive")
    etas = np.arange(config.max_episodes + 1, dtype=np.float64)
    thresholds = config.max_steps / (config.omega * etas + config.b)
    steps, used = _train_kernel(
        env.table, env.start_idx, env.goal_idx, config.max_episodes, config.max_steps,
        config.alpha, config.gamma, config.algo == "sarsa", STRATEGIES.index(strat.kind),
        sched, strat.beta, strat.damping, strat.c_explore,
        pledge_enabled and config.n_pledge > 0, config.n_pledge, thresholds,
        int(config.pledge_heading), np.uint32(config.seed),
        table.q, table.visits, table.discounted_visits,
    )
    path, ok = greedy_path(env, table.q)
    return TrainResult(steps, used, int(steps.sum()), path, ok, table, env.n_states)


def train_rurl(config: RurlConfig, env: NavEnv) -> TrainResult:
    """Full pipeline: rule-restricted environment plus Pledge-guided early episodes."""
    return train(config, env, rules_enabled=True, pledge_enabled=True)


def derive_seeds(root_seed: int, runs: int) -> list[int]:
    """Independent 32-bit seeds for runs ``0..runs-1`` of one experiment."""
    children = np.random.SeedSequence(root_seed).spawn(runs)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


__all__ = [
    "COLLISION_REWARD", "GOAL_REWARD", "STEP_REWARD", "ExplorationStrategy", "QTable", "RuleSpace",
    "RurlConfig", "Schedule", "TrainResult", "build_rule_space", "count_bonus", "derive_seeds",
    "greedy_action", "greedy_path", "pledge_threshold", "q_update", "sarsa_update", "select_epsilon_greedy",
    "select_softmax", "select_ucb", "softmax_probabilities", "train", "train_rurl", "ucb_bonus",
]
