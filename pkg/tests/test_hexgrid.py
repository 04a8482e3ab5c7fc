import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexnav.errors import MapFormatError
from hexnav.hexgrid import (
    SQRT3, AbsDir, HexCoord, cell_center, direction_between, k_ring, load_map,
    neighbor, neighbors, rasterize_dims, render_ascii, step_distance, valid_parity,
)

from conftest import lattice_bfs

coords = st.tuples(st.integers(-30, 30), st.integers(-30, 30)).map(
    lambda t: HexCoord(t[0] * 2 + (t[1] & 1), t[1]))


def test_neighbors_of_4_4_in_direction_order():
    assert neighbors((4, 4)) == [
        (AbsDir.N, (2, 4)), (AbsDir.NE, (3, 5)), (AbsDir.SE, (5, 5)),
        (AbsDir.S, (6, 4)), (AbsDir.SW, (5, 3)), (AbsDir.NW, (3, 3)),
    ]


def test_neighbors_are_unbounded():
    assert (AbsDir.N, (-2, 0)) in neighbors((0, 0))


@given(coords)
def test_neighbors_keep_parity_and_invert(c):
    for d, nb in neighbors(c):
        assert valid_parity(nb)
        assert neighbor(nb, (d + 3) % 6) == c
        assert direction_between(c, nb) == d


@pytest.mark.parametrize("a,b,d", [((0, 0), (0, 0), 0), ((0, 0), (2, 0), 1), ((0, 0), (0, 4), 4)])
def test_step_distance_examples(a, b, d):
    assert step_distance(a, b) == d


@given(coords, coords)
def test_step_distance_matches_bfs(a, b):
    if step_distance(a, b) <= 12:
        assert step_distance(a, b) == lattice_bfs(a, b)


def test_k_ring_1_is_the_neighbours():
    assert k_ring((0, 0), 1) == {nb for _, nb in neighbors((0, 0))}


def test_k_ring_2_listing():
    i, j = 6, 3
    expected = {(i - 4, j), (i - 3, j + 1), (i - 2, j + 2), (i, j + 2), (i + 2, j + 2), (i + 3, j + 1),
                (i + 4, j), (i + 3, j - 1), (i + 2, j - 2), (i, j - 2), (i - 2, j - 2), (i - 3, j - 1)}
    assert k_ring((i, j), 2) == expected


@pytest.mark.parametrize("k", range(1, 6))
def test_k_ring_sizes_and_distances(k):
    ring = k_ring((0, 0), k)
    assert len(ring) == 6 * k
    assert all(step_distance((0, 0), c) == k == lattice_bfs((0, 0), c) for c in ring)


def test_k_ring_rejects_zero():
    with pytest.raises(ValueError):
        k_ring((0, 0), 0)


def test_rasterize_room():
    assert rasterize_dims(465, 458, 15.8) == (35, 19)


def test_rasterize_exact_rows_need_no_rounding():
    a = 10.0
    for n in (2, 7, 35):
        length = (n - 1) * SQRT3 / 2 * a
        assert rasterize_dims(length, 100, a)[0] == n


def test_rasterize_multiroom():
    assert rasterize_dims(1640, 1960, 22.0) == (87, 59)


def test_rasterize_rejects_nonpositive():
    with pytest.raises(ValueError):
        rasterize_dims(0, 1, 1)


def test_cell_centres():
    assert cell_center((0, 0), 3.0) == (0, 0)
    x, y = cell_center((2, 0), 1)
    assert (x, y) == pytest.approx((0, SQRT3))
    x, y = cell_center((1, 1), 1)
    assert (x, y) == pytest.approx((1.5, SQRT3 / 2))


@given(coords, st.floats(0.5, 50))
def test_neighbours_equidistant(c, a):
    cx, cy = cell_center(c, a)
    for _, nb in neighbors(c):
        nx, ny = cell_center(nb, a)
        assert abs(math.hypot(nx - cx, ny - cy) - SQRT3 * a) < 1e-9 * max(1.0, a)


def test_load_small_map():
    m = load_map("B.\n.G")
    assert m.start == (0, 0) and m.goal == (3, 1)
    assert m.n_rows == 2 and m.m_cols == 2 and m.free_count == 4


@pytest.mark.parametrize("text,msg", [
    ("B", "missing goal"),
    ("G", "missing start"),
    ("BB\nG.", "duplicate start"),
    ("B.\n.GG", "expected 2"),
    ("Bx\n.G", "unknown character"),
    ("B. \n.G", "trailing whitespace"),
    ("", "no map rows"),
])
def test_load_errors(text, msg):
    with pytest.raises(MapFormatError, match=msg):
        load_map(text)


def test_load_error_reports_position():
    with pytest.raises(MapFormatError) as info:
        load_map("B.\n.x\n.G")
    assert info.value.line == 2 and info.value.column == 2


def test_header_round_trip():
    text = "# name: tiny\n# edge_cm: 15.8\nB.#\n?.G\n"
    m = load_map(text)
    assert m.name == "tiny" and m.edge_cm == 15.8
    assert render_ascii(m) == text


@given(st.integers(1, 8), st.integers(2, 8), st.data())
def test_random_round_trip(n, m, data):
    cells = data.draw(st.lists(st.sampled_from(".#?"), min_size=n * m, max_size=n * m))
    b, g = data.draw(st.lists(st.integers(0, n * m - 1), min_size=2, max_size=2, unique=True))
    cells[b], cells[g] = "B", "G"
    text = "\n".join("".join(cells[r * m:(r + 1) * m]) for r in range(n)) + "\n"
    assert render_ascii(load_map(text)) == text


def test_obstacle_free_map_renders_only_free_marks(room5):
    assert set(render_ascii(room5)) <= set(".BG\n")


def test_map_queries(room5):
    assert room5.is_free(room5.start)
    assert not room5.is_free((-2, 0))
    assert not room5.is_free((1, 0))  # wrong parity
    assert room5.coord(room5.index((3, 1))) == (3, 1)
    assert len(list(room5.coords())) == 25
    assert isinstance(room5.grid, np.ndarray)
