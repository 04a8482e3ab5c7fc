import numpy as np
import pytest

from hexnav.errors import HexNavError
from hexnav.harness import bundled_maps, resolve_map
from hexnav.hexgrid import render_ascii
from hexnav.mapgen import PRESETS, campaign_maps, generate
from hexnav.planners import bfs_length
from hexnav.wallrules import Hand, wall_follow


@pytest.mark.parametrize("preset", ["room-35x19-open", "room-35x19-obstacles"])
def test_room_presets(preset):
    m = generate(preset, 1)
    assert (m.n_rows, m.m_cols) == (35, 19)
    assert m.is_wall_adjacent(m.start) and m.is_wall_adjacent(m.goal)
    assert bfs_length(m) is not None
    for hand in Hand:
        wall_follow(m, hand)


def test_generation_is_seeded():
    a = generate("room-35x19-obstacles", 3)
    assert a == generate("room-35x19-obstacles", 3)
    assert a != generate("room-35x19-obstacles", 4)


def test_bundled_maps_are_seed_zero():
    assert set(bundled_maps()) == set(PRESETS)
    for name in ("room-35x19-open", "room-35x19-obstacles"):
        assert render_ascii(resolve_map(name)) == render_ascii(generate(name, 0))


def test_bundled_multiroom_shape():
    m = resolve_map("multiroom-87x59")
    assert (m.n_rows, m.m_cols) == (87, 59)
    assert bfs_length(m) is not None


def test_unknown_preset():
    with pytest.raises(HexNavError, match="unknown preset"):
        generate("cave", 0)


def test_campaign_maps():
    maps = campaign_maps(9, 25)
    assert len(maps) == 25
    assert maps == campaign_maps(9, 25)
    for m in maps:
        assert m.is_wall_adjacent(m.start) and m.is_wall_adjacent(m.goal)
        assert bfs_length(m) is not None
        wall_follow(m, Hand.LEFT)
        wall_follow(m, Hand.RIGHT)
