"""Action symbol vocabulary and heading arithmetic.

Two disjoint vocabularies share the action alphabet: world-frame movement
symbols are capitalized (North, South, East, West) and agent-frame primitives
are lowercase (walk, push, pull, stay, turn_left, turn_right).  Everything in
this module is pure token math; grid state lives in :mod:`mannerforge.world`.
"""
from __future__ import annotations

EGO_SYMBOLS = frozenset({"walk", "push", "pull", "stay", "turn_left", "turn_right"})
ALLO_SYMBOLS = frozenset({"North", "South", "East", "West"})
ALL_SYMBOLS = EGO_SYMBOLS | ALLO_SYMBOLS

INTERACTIONS = ("push", "pull")
MOVEMENT_EGO = ("walk", "push", "pull")
TURNS = ("turn_left", "turn_right")

# Clockwise compass order; turn_right steps forward in this tuple.
HEADINGS = ("north", "east", "south", "west")

HEADING_DELTAS = {
    "north": (-1, 0),
    "south": (1, 0),
    "east": (0, 1),
    "west": (0, -1),
}

ALLO_TO_HEADING = {"North": "north", "South": "south", "East": "east", "West": "west"}
HEADING_TO_ALLO = {h: a for a, h in ALLO_TO_HEADING.items()}

OPPOSITE_HEADING = {"north": "south", "south": "north", "east": "west", "west": "east"}

_HEADING_INDEX = {h: i for i, h in enumerate(HEADINGS)}


def is_ego(symbol: str) -> bool:
    return symbol in EGO_SYMBOLS


def is_allo(symbol: str) -> bool:
    return symbol in ALLO_SYMBOLS


def require_symbol(symbol: str) -> str:
    if symbol not in ALL_SYMBOLS:
        raise ValueError(f"unknown action symbol: {symbol!r}")
    return symbol


def require_heading(heading: str) -> str:
    if heading not in _HEADING_INDEX:
        raise ValueError(f"unknown heading: {heading!r}")
    return heading


def parse_symbols(text: str) -> tuple[str, ...]:
    """Split a whitespace-separated symbol string, validating each token."""
    return tuple(require_symbol(tok) for tok in text.split())


def turn(heading: str, direction: str) -> str:
    """Rotate a heading by one turn_left or turn_right step."""
    i = _HEADING_INDEX[heading]
    if direction == "turn_left":
        return HEADINGS[(i - 1) % 4]
    if direction == "turn_right":
        return HEADINGS[(i + 1) % 4]
    raise ValueError(f"not a turn symbol: {direction!r}")


def turns_between(start: str, goal: str) -> tuple[str, ...]:
    """Minimal turn sequence rotating `start` onto `goal`.

    A 180 degree rotation is always expressed as two turn_left actions so the
    output is canonical.
    """
    delta = (_HEADING_INDEX[goal] - _HEADING_INDEX[start]) % 4
    if delta == 0:
        return ()
    if delta == 1:
        return ("turn_right",)
    if delta == 3:
        return ("turn_left",)
    return ("turn_left", "turn_left")


def net_rotation(symbols) -> int:
    """Net quarter-turns (mod 4, counterclockwise positive) of the turn symbols."""
    r = 0
    for s in symbols:
        if s == "turn_left":
            r += 1
        elif s == "turn_right":
            r -= 1
    return r % 4


def final_heading(symbols, start: str) -> str:
    """Heading after following a mixed symbol sequence from `start`.

    Allocentric symbols leave the agent facing their direction; turns rotate;
    walk, push, pull, and stay leave the heading unchanged.
    """
    h = start
    for s in symbols:
        if s in ALLO_TO_HEADING:
            h = ALLO_TO_HEADING[s]
        elif s == "turn_left" or s == "turn_right":
            h = turn(h, s)
    return h


def displacement(symbols, start: str) -> tuple[int, int]:
    """Net (row, col) displacement of a mixed sequence followed from `start`.

    Mirrors grounded execution: an allocentric symbol moves one cell in its
    direction and re-orients the agent; walk and push move along the tracked
    heading; pull moves against it.
    """
    h = start
    drow = 0
    dcol = 0
    for s in symbols:
        if s in ALLO_TO_HEADING:
            h = ALLO_TO_HEADING[s]
            dr, dc = HEADING_DELTAS[h]
            drow += dr
            dcol += dc
        elif s == "walk" or s == "push":
            dr, dc = HEADING_DELTAS[h]
            drow += dr
            dcol += dc
        elif s == "pull":
            dr, dc = HEADING_DELTAS[h]
            drow -= dr
            dcol -= dc
        elif s == "turn_left" or s == "turn_right":
            h = turn(h, s)
    return drow, dcol
