import numpy as np
import pytest

from hexnav.errors import ContractError
from hexnav.hexgrid import AbsDir, HexCoord, load_map
from hexnav.navenv import Done, NavEnv, restrict
from hexnav.wallrules import RegionMask

from conftest import open_room

# B at (0,0); (2,0) obstacle; goal at (1,1)
SMALL = load_map("BG\n#.")


def test_reset_returns_start():
    env = NavEnv(SMALL)
    env.step(AbsDir.N)
    assert env.reset() == SMALL.start and env.steps_in_episode == 0


def test_goal_reward_and_done():
    t = NavEnv(SMALL).step(AbsDir.SE)
    assert (t.reward, t.next_state, t.done) == (100.0, (1, 1), Done.GOAL)
    assert t.terminal


def test_obstacle_bounce():
    t = NavEnv(SMALL).step(AbsDir.S)
    assert (t.reward, t.next_state, t.done) == (-100.0, (0, 0), None)


def test_out_of_bounds_bounce():
    t = NavEnv(SMALL).step(AbsDir.N)
    assert t.reward == -100.0 and t.next_state == (0, 0)


def test_free_step_costs_one():
    env = NavEnv(open_room(3, 3))
    t = env.step(AbsDir.N)
    assert t.reward == -1.0 and t.next_state == (2, 2)


def test_stepping_after_goal_is_an_error():
    env = NavEnv(SMALL)
    env.step(AbsDir.SE)
    with pytest.raises(ContractError):
        env.step(AbsDir.N)


def test_step_limit():
    env = NavEnv(SMALL, max_steps=2)
    assert env.step(AbsDir.N).done is None
    t = env.step(AbsDir.N)
    assert t.done is Done.STEP_LIMIT and not t.terminal
    with pytest.raises(ContractError):
        env.step(AbsDir.N)


def test_region_must_hold_endpoints():
    m = open_room(3, 3)
    with pytest.raises(ContractError):
        restrict(m, RegionMask(frozenset({m.start})))


def test_full_region_is_a_no_op():
    m = open_room(4, 4)
    env = restrict(m, RegionMask(frozenset(m.free_cells())))
    assert np.array_equal(env.table, NavEnv(m).table)


def test_corridor_region_bounces_sideways():
    m = open_room(4, 1)  # one column: start (6,0), goal (0,0)
    wide = open_room(4, 3)
    column = RegionMask(frozenset(HexCoord(2 * r, 0) for r in range(4)))
    env = restrict(wide.with_endpoints((6, 0), (0, 0)), column)
    assert env.step(AbsDir.NE).reward == -100.0
    assert env.pos == (6, 0)
    assert env.step(AbsDir.N).reward == -1.0
    assert env.n_states == 4 == m.free_count
