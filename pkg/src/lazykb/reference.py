"""Naive generate-and-test baseline for the 9x9 grid puzzle.

Kept in the package on purpose as the honest comparison point: it enumerates
digit assignments for the blank cells in order and tests each complete grid,
which is hopeless beyond a handful of blanks.  The solver-backed route and
this one are never mixed; benchmarks run them side by side.
"""

from __future__ import annotations

import time
from itertools import product

Grid = dict[int, int]  # cell index 0..80 -> digit, 0 for blank


def grid_ok(grid: Grid) -> bool:
    """Every row, column and 3x3 box holds nine distinct non-zero digits."""
    groups = []
    for r in range(9):
        groups.append([9 * r + c for c in range(9)])
    for c in range(9):
        groups.append([9 * r + c for r in range(9)])
    for br in range(0, 9, 3):
        for bc in range(0, 9, 3):
            groups.append([9 * (br + dr) + (bc + dc)
                           for dr in range(3) for dc in range(3)])
    for cells in groups:
        digits = [grid[i] for i in cells]
        if 0 in digits or len(set(digits)) != 9:
            return False
    return True


def solve_by_enumeration(given: Grid, time_budget: float) -> Grid | None:
    """Try every digit combination for the blanks until one passes grid_ok.

    Returns the solved grid, or None when the budget (seconds) runs out
    first.  No propagation, no pruning: each candidate is generated in full
    and then tested, which is the point of this baseline.
    """
    blanks = [i for i in range(81) if given.get(i, 0) == 0]
    deadline = time.monotonic() + time_budget
    trial = dict(given)
    tested = 0
    for combo in product(range(1, 10), repeat=len(blanks)):
        for cell, digit in zip(blanks, combo):
            trial[cell] = digit
        if grid_ok(trial):
            return trial
        tested += 1
        if tested % 4096 == 0 and time.monotonic() > deadline:
            return None
    return None
