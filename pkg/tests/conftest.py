from collections import deque

import pytest

from hexnav.hexgrid import load_map, neighbors
from hexnav.harness import resolve_map


def lattice_bfs(a, b, limit=40):
    """Step distance on the unbounded lattice by plain BFS."""
    a, b = tuple(a), tuple(b)
    seen = {a: 0}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        if cur == b:
            return seen[cur]
        if seen[cur] >= limit:
            continue
        for _, nb in neighbors(cur):
            if nb not in seen:
                seen[nb] = seen[cur] + 1
                queue.append(nb)
    raise AssertionError("target beyond search limit")


def open_room(n, m):
    """n x m free map, start bottom-right, goal top-left."""
    rows = [["."] * m for _ in range(n)]
    rows[n - 1][m - 1] = "B"
    rows[0][0] = "G"
    return load_map("\n".join("".join(r) for r in rows))


@pytest.fixture(scope="session")
def obstacle_room():
    return resolve_map("room-35x19-obstacles")


@pytest.fixture(scope="session")
def open_room_map():
    return resolve_map("room-35x19-open")


@pytest.fixture
def room5():
    return open_room(5, 5)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
