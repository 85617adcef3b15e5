"""Rule-based solver: perception, navigation, interaction, transformation.

Four small modules mirror the cognitive decomposition of the task and compose
into a ground-truth solver.  Perception locates agent and target.  Navigation
plans a path, allocentric or egocentric depending on the manner.  Interaction
decides how many push or pull actions bring the object flush against the wall
or the first obstacle.  Transformation rewrites the combined sequence with the
adverb's program and grounds everything into egocentric primitives.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dsl import AdverbProgram, apply_program, builtin_adverbs, ground
from .errors import UnknownAdverb
from .metagrammar import LexiconEntry, classify_program
from .symbols import (
    ALLO_SYMBOLS,
    EGO_SYMBOLS,
    OPPOSITE_HEADING,
    final_heading,
)
from .world import HEAVY_SIZES, Command, Position, Trajectory, WorldState, resolve_target

HEAVY_ACTIONS_PER_CELL = 2


@dataclass(frozen=True)
class Percept:
    """What perception reports: agent pose and target location."""

    agent_position: Position
    agent_heading: str
    target_position: Position


@dataclass(frozen=True)
class Plan:
    mode: str
    symbols: tuple[str, ...]

    def __post_init__(self):
        vocab = ALLO_SYMBOLS if self.mode == "allocentric" else EGO_SYMBOLS
        for s in self.symbols:
            if s not in vocab:
                raise ValueError(f"{self.mode} plan cannot contain {s!r}")


def perceive(command: Command, world: WorldState) -> Percept:
    target = world.objects[resolve_target(command, world)]
    return Percept(
        agent_position=world.agent_position,
        agent_heading=world.agent_heading,
        target_position=target.position,
    )


def _axis_symbols(delta: int, positive: str, negative: str) -> list[str]:
    return [positive if delta > 0 else negative] * abs(delta)


def canonical_allo_plan(drow: int, dcol: int) -> tuple[str, ...]:
    """Vertical moves first, then horizontal: the canonical shortest plan."""
    return tuple(
        _axis_symbols(drow, "South", "North") + _axis_symbols(dcol, "East", "West")
    )


def zigzag_allo_plan(drow: int, dcol: int) -> tuple[str, ...]:
    """Alternate vertical and horizontal moves, starting vertical, until one
    axis runs out; then append the remainder."""
    vertical = _axis_symbols(drow, "South", "North")
    horizontal = _axis_symbols(dcol, "East", "West")
    plan: list[str] = []
    while vertical and horizontal:
        plan.append(vertical.pop())
        plan.append(horizontal.pop())
    plan.extend(vertical)
    plan.extend(horizontal)
    return tuple(plan)


def plan_navigation(percept: Percept, adverb: AdverbProgram | None = None) -> Plan:
    """Plan from agent to target.

    Without an adverb the plan is egocentric: the canonical allocentric path
    grounded from the agent's heading.  An adverb chooses the output mode, and
    a zigzag-shaped manner replaces the canonical path with the staircase one.
    """
    drow = percept.target_position.row - percept.agent_position.row
    dcol = percept.target_position.col - percept.agent_position.col
    if adverb is not None and adverb.plan_shape == "zigzag":
        return Plan("allocentric", zigzag_allo_plan(drow, dcol))
    canonical = canonical_allo_plan(drow, dcol)
    if adverb is not None and adverb.mode == "allocentric":
        return Plan("allocentric", canonical)
    return Plan("egocentric", ground(canonical, percept.agent_heading))


def free_cells(world: WorldState, start: Position, heading: str) -> int:
    """Cells an object at `start` can slide along `heading` before hitting the
    grid edge or another object."""
    count = 0
    pos = start.shifted(heading)
    while world.in_bounds(pos) and not world.occupied(pos, ignore=world.target_index):
        count += 1
        pos = pos.shifted(heading)
    return count


def plan_interaction(
    percept: Percept,
    world: WorldState,
    command: Command,
    arrival_heading: str,
    heavy_sizes: frozenset[int] = HEAVY_SIZES,
) -> tuple[str, ...]:
    """Interaction actions after arrival: nothing for walk; push the object to
    the wall along the arrival heading; pull it to the wall behind."""
    if command.verb == "walk":
        return ()
    target = world.target
    direction = arrival_heading if command.verb == "push" else OPPOSITE_HEADING[arrival_heading]
    cells = free_cells(world, target.position, direction)
    per_cell = HEAVY_ACTIONS_PER_CELL if target.size in heavy_sizes else 1
    return (command.verb,) * (cells * per_cell)


def transform(
    plan: Plan,
    interactions,
    adverb: AdverbProgram | None,
    start: str,
    max_depth: int = 10,
) -> tuple[str, ...]:
    """Rewrite plan plus interactions with the manner's program and ground the
    result.  With no adverb an egocentric plan passes through unchanged."""
    interactions = tuple(interactions)
    sequence = plan.symbols + interactions
    if adverb is None:
        if plan.mode == "egocentric":
            return sequence
        return ground(sequence, start)
    return ground(apply_program(adverb, sequence, max_depth), start)


BUILTIN_SURFACES = tuple(p.surface for p in builtin_adverbs())


@dataclass(frozen=True)
class Lexicon:
    """All adverbs a command may use: the four built-ins plus registry entries."""

    programs: dict = field(default_factory=dict)
    types: dict = field(default_factory=dict)
    entries: tuple[LexiconEntry, ...] = ()

    @classmethod
    def build(cls, entries=()) -> "Lexicon":
        entries = tuple(entries)
        programs = {}
        types = {}
        for program in builtin_adverbs():
            programs[program.surface] = program
            types[program.surface] = classify_program(program)
        for entry in entries:
            surface = " ".join(entry.surface)
            if surface in programs:
                raise ValueError(f"adverb surface {surface!r} already registered")
            programs[surface] = entry.program
            types[surface] = classify_program(entry.program)
        return cls(programs=programs, types=types, entries=entries)

    def lookup(self, surface) -> AdverbProgram:
        key = surface if isinstance(surface, str) else " ".join(surface)
        try:
            return self.programs[key]
        except KeyError:
            raise UnknownAdverb(f"no adverb named {key!r}") from None

    def surfaces(self) -> tuple[str, ...]:
        ordered = list(BUILTIN_SURFACES)
        ordered.extend(" ".join(e.surface) for e in self.entries)
        return tuple(ordered)


def solve(
    command: Command,
    world: WorldState,
    lexicon: Lexicon | None = None,
    max_depth: int = 10,
) -> tuple[str, ...]:
    """Ground-truth action sequence for a command in a world.

    The interaction heading is taken from the transformed plan, not the plain
    one: a detour manner can leave the agent facing elsewhere when it reaches
    the target, and the object must be pushed the way the agent actually faces.
    """
    if lexicon is None:
        lexicon = Lexicon.build()
    adverb = lexicon.lookup(command.adverb) if command.adverb else None
    percept = perceive(command, world)
    plan = plan_navigation(percept, adverb)
    if adverb is None:
        executed_plan = plan.symbols
    else:
        executed_plan = apply_program(adverb, plan.symbols, max_depth)
    arrival = final_heading(executed_plan, world.agent_heading)
    interactions = plan_interaction(percept, world, command, arrival)
    return transform(plan, interactions, adverb, start=world.agent_heading, max_depth=max_depth)


def goal_satisfied(verb: str, world: WorldState, trajectory: Trajectory) -> bool:
    """Check the verb's goal on an executed trajectory.

    walk: the agent ends on the target's cell.  push/pull: the object ends
    flush against the grid edge or another object along the direction it was
    moved (the facing direction when it never moved at all).
    """
    final = trajectory.final_world
    target_before = world.target.position
    target_after = final.target.position
    if verb == "walk":
        return final.agent_position == target_after

    drow = target_after.row - target_before.row
    dcol = target_after.col - target_before.col
    if drow != 0 and dcol != 0:
        return False
    if drow == 0 and dcol == 0:
        heading = final.agent_heading
        direction = heading if verb == "push" else OPPOSITE_HEADING[heading]
    elif drow != 0:
        direction = "south" if drow > 0 else "north"
    else:
        direction = "east" if dcol > 0 else "west"
    beyond = target_after.shifted(direction)
    return not final.in_bounds(beyond) or final.occupied(beyond, ignore=final.target_index)
