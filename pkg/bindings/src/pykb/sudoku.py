"""Sudoku through the bindings.

Cells are numbered 0..80 row-major; 0 stands for "no given".  The KB is
built once and reused: assigning ``Given`` swaps the puzzle and the next
read of ``Sol`` solves it.
"""

from .kb import KB

__all__ = ["sudoku_kb", "solve"]


def sudoku_kb():
    sud = KB("sud")
    sud.Type("Cell", range(81))
    sud.Type("Number", range(10))
    sud.Define("SameRow(Cell, Cell)", "lambda i, j: i / 9 == j / 9")
    sud.Define("SameCol(Cell, Cell)", "lambda i, j: i % 9 == j % 9")
    sud.Define("SameSmallSq(Cell, Cell)",
               "lambda i, j: i / 27 == j / 27 and (i % 9) / 3 == (j % 9) / 3")
    sud.Function("Given(Cell): Number")
    sud.Function("Sol(Cell): Number")
    sud.Define("Diff(Cell, Cell)",
               "lambda x, y: x != y and "
               "(SameRow(x, y) or SameCol(x, y) or SameSmallSq(x, y))")
    sud.Constraint("all(Sol(x) != Sol(y) for (x, y) in Diff)")
    sud.Constraint("all(Sol(x) == Given(x) for x in Cell if Given(x) != 0)")
    sud.Constraint("all(Sol(x) != 0 for x in Cell)")
    return sud


def solve(sud, grid):
    """Solve a 81-character grid string ('.' or '0' for blanks).

    Returns a dict keyed 'A1'..'I9' (rows A-I top to bottom, columns
    1-9 left to right) with single-character digit values.
    """
    def translate(n):
        return 'ABCDEFGHI'[n // 9] + '123456789'[n % 9]

    sud.Given = dict(zip(range(81), [int(x) for x in grid.replace('.', '0')]))
    return dict(zip(map(translate, sud.Sol.keys()),
                    map(str, sud.Sol.values())))
