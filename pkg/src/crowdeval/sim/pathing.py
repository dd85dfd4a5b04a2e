"""A* route planning over the annotated ground grid.

Cells are (row, col) indices into the grid's label array; walkable and
entrance cells are traversable, obstacle cells are not.  Moves are
8-connected with cost 1 orthogonal and sqrt(2) diagonal.
"""

from heapq import heappop, heappush
from math import sqrt

import numpy as np

from ..errors import NoPath
from ..geometry import OBSTACLE, PerspectiveGrid

SQRT2 = sqrt(2.0)

_MOVES = [
    (-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
    (-1, -1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (1, 1, SQRT2),
]


def _walkable_mask(grid):
    if isinstance(grid, PerspectiveGrid):
        grid.require_annotated()
        labels = grid.labels
    else:
        labels = np.asarray(grid)
    return labels != OBSTACLE


def _octile(a, b):
    dr = abs(a[0] - b[0])
    dc = abs(a[1] - b[1])
    return SQRT2 * min(dr, dc) + abs(dr - dc)


def plan_path(grid, start, goal):
    """Optimal 8-connected path from start to goal, inclusive.

    Raises NoPath when the goal is unreachable or either endpoint is not
    traversable.
    """
    walk = _walkable_mask(grid)
    rows, cols = walk.shape
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    for cell in (start, goal):
        if not (0 <= cell[0] < rows and 0 <= cell[1] < cols) or not walk[cell]:
            raise NoPath(f"cell {cell} is not traversable")
    if start == goal:
        return [start]

    open_heap = [(0.0, start)]
    g_score = {start: 0.0}
    came_from = {}
    closed = set()
    while open_heap:
        _, current = heappop(open_heap)
        if current in closed:
            continue
        if current == goal:
            path = [current]
            while current in came_from:
                current = came_from[current]
                path.append(current)
            return path[::-1]
        closed.add(current)
        r, c = current
        for dr, dc, cost in _MOVES:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < rows and 0 <= nc < cols) or not walk[nr, nc]:
                continue
            tentative = g_score[current] + cost
            if tentative < g_score.get((nr, nc), np.inf):
                g_score[(nr, nc)] = tentative
                came_from[(nr, nc)] = current
                heappush(open_heap, (tentative + _octile((nr, nc), goal), (nr, nc)))
    raise NoPath(f"no route from {start} to {goal}")


def path_cost(path):
    return sum(
        SQRT2 if (abs(a[0] - b[0]) + abs(a[1] - b[1])) == 2 else 1.0
        for a, b in zip(path, path[1:])
    )
