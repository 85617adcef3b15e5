"""Shared fixtures and independent tracing helpers for the test suite."""
from __future__ import annotations

import pytest

from mannerforge import builtin_adverbs

TURN_LEFT_CYCLE = {"east": "north", "north": "west", "west": "south", "south": "east"}
TURN_RIGHT_CYCLE = {v: k for k, v in TURN_LEFT_CYCLE.items()}

_DELTAS = {"north": (-1, 0), "south": (1, 0), "east": (0, 1), "west": (0, -1)}


def trace_cells(ego_sequence, start=(0, 0), heading="east"):
    """Independent cell tracer for egocentric sequences.

    Deliberately re-implements movement from scratch (walk and push move
    forward, pull moves backward, turns rotate, stay idles) so package bugs
    cannot hide behind shared code.  Returns visited cells with consecutive
    duplicates collapsed.
    """
    row, col = start
    h = heading
    cells = [(row, col)]
    for symbol in ego_sequence:
        if symbol == "turn_left":
            h = TURN_LEFT_CYCLE[h]
        elif symbol == "turn_right":
            h = TURN_RIGHT_CYCLE[h]
        elif symbol in ("walk", "push"):
            dr, dc = _DELTAS[h]
            row, col = row + dr, col + dc
            cells.append((row, col))
        elif symbol == "pull":
            dr, dc = _DELTAS[h]
            row, col = row - dr, col - dc
            cells.append((row, col))
        elif symbol == "stay":
            pass
        else:
            raise AssertionError(f"tracer got non-egocentric symbol {symbol!r}")
    collapsed = [cells[0]]
    for cell in cells[1:]:
        if cell != collapsed[-1]:
            collapsed.append(cell)
    return collapsed


@pytest.fixture(scope="session")
def builtins():
    spinning, cautiously, zigzagging, hesitantly = builtin_adverbs()
    return {
        "while spinning": spinning,
        "cautiously": cautiously,
        "while zigzagging": zigzagging,
        "hesitantly": hesitantly,
    }
