"""Functional rewrite-rule programs for manners of navigation.

An adverb's meaning is a program: a set of single-symbol rewrite rules applied
in parallel, one simultaneous pass over the whole sequence, plus a mode saying
whether its plan-level rules target allocentric or egocentric symbols.  A
second pass rewrites the output of the first, so recursion depth is bounded
explicitly to keep programs from spinning forever.

Grounding converts a mixed sequence into pure egocentric primitives by
tracking the agent's heading and expanding each allocentric symbol into the
minimal turn sequence plus a walk.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DepthExceeded, DuplicateLhs, ParseError
from .symbols import (
    ALLO_TO_HEADING,
    EGO_SYMBOLS,
    is_allo,
    require_heading,
    require_symbol,
    turn,
    turns_between,
)

MODES = ("allocentric", "egocentric")
PLAN_SHAPES = ("canonical", "zigzag")


@dataclass(frozen=True)
class RewriteRule:
    """lhs -> rhs, where lhs is a single symbol and rhs a nonempty sequence."""

    lhs: str
    rhs: tuple[str, ...]

    def __post_init__(self):
        require_symbol(self.lhs)
        if not self.rhs:
            raise ValueError(f"rule for {self.lhs!r} has empty rhs")
        for s in self.rhs:
            require_symbol(s)


@dataclass(frozen=True)
class AdverbProgram:
    """A named rule set implementing one manner of navigation.

    mode records which vocabulary the plan-level rules target; a program may
    still carry rules over both vocabularies (the transformation input is an
    allocentric plan followed by egocentric interactions).  plan_shape lets a
    manner demand a different navigation plan instead of rewriting one.
    """

    name: tuple[str, ...]
    rules: frozenset[RewriteRule] = frozenset()
    mode: str = "egocentric"
    passes: int = 1
    plan_shape: str = "canonical"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")
        if self.plan_shape not in PLAN_SHAPES:
            raise ValueError(f"unknown plan shape: {self.plan_shape!r}")
        if self.passes < 1:
            raise ValueError("passes must be at least 1")
        lhs_seen = set()
        for rule in self.rules:
            if rule.lhs in lhs_seen:
                raise DuplicateLhs(f"two rules rewrite {rule.lhs!r}")
            lhs_seen.add(rule.lhs)
        if self.mode == "egocentric":
            if any(is_allo(r.lhs) for r in self.rules):
                raise ValueError("egocentric programs may only rewrite egocentric symbols")
        else:
            if not any(is_allo(r.lhs) for r in self.rules) and self.plan_shape != "zigzag":
                raise ValueError(
                    "allocentric programs need an allocentric rule or a zigzag plan"
                )

    @property
    def surface(self) -> str:
        return " ".join(self.name)

    def rule_map(self) -> dict[str, tuple[str, ...]]:
        return {r.lhs: r.rhs for r in self.rules}


def apply_pass(program: AdverbProgram, sequence) -> tuple[str, ...]:
    """One parallel rewriting pass: every matched symbol is replaced by its
    rule's rhs simultaneously; freshly produced symbols are not rewritten."""
    rules = program.rule_map()
    out: list[str] = []
    for s in sequence:
        rhs = rules.get(s)
        if rhs is None:
            out.append(s)
        else:
            out.extend(rhs)
    return tuple(out)


def apply_program(program: AdverbProgram, sequence, max_depth: int = 10) -> tuple[str, ...]:
    """Apply the program's passes, refusing to recurse past max_depth."""
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    if program.passes > max_depth:
        raise DepthExceeded(
            f"program {program.surface!r} needs {program.passes} passes, depth limit {max_depth}"
        )
    seq = tuple(sequence)
    for _ in range(program.passes):
        seq = apply_pass(program, seq)
    return seq


def ground(sequence, start: str) -> tuple[str, ...]:
    """Convert a mixed sequence to egocentric primitives.

    Egocentric symbols pass through (turns update the tracked heading); each
    allocentric symbol becomes the minimal turn sequence toward its direction
    followed by walk, with 180 degree turns fixed as two turn_left actions.
    """
    require_heading(start)
    h = start
    out: list[str] = []
    for s in sequence:
        d = ALLO_TO_HEADING.get(s)
        if d is not None:
            out.extend(turns_between(h, d))
            out.append("walk")
            h = d
        elif s in EGO_SYMBOLS:
            out.append(s)
            if s == "turn_left" or s == "turn_right":
                h = turn(h, s)
        else:
            raise ValueError(f"unknown action symbol: {s!r}")
    return tuple(out)


def programs_equal(a: AdverbProgram, b: AdverbProgram) -> bool:
    """Name-insensitive equality: same rule set, mode, passes, and plan shape."""
    return (
        a.rules == b.rules
        and a.mode == b.mode
        and a.passes == b.passes
        and a.plan_shape == b.plan_shape
    )


CAUTIOUS_PREFIX = ("turn_left", "turn_right", "turn_right", "turn_left")
SPIN_PREFIX = ("turn_left", "turn_left", "turn_left", "turn_left")


def builtin_adverbs() -> list[AdverbProgram]:
    """The four built-in manners.

    "while spinning" spins before every directed move and every interaction;
    "cautiously" looks left and right before each movement primitive;
    "while zigzagging" has no rules at all, its manner is a different plan;
    "hesitantly" pauses after each movement primitive.
    """
    spinning = AdverbProgram(
        name=("while", "spinning"),
        mode="allocentric",
        rules=frozenset(
            {RewriteRule(d, SPIN_PREFIX + (d,)) for d in ("North", "South", "East", "West")}
            | {RewriteRule(v, SPIN_PREFIX + (v,)) for v in ("push", "pull")}
        ),
    )
    cautiously = AdverbProgram(
        name=("cautiously",),
        mode="egocentric",
        rules=frozenset(
            RewriteRule(v, CAUTIOUS_PREFIX + (v,)) for v in ("walk", "push", "pull")
        ),
    )
    zigzagging = AdverbProgram(
        name=("while", "zigzagging"),
        mode="allocentric",
        rules=frozenset(),
        plan_shape="zigzag",
    )
    hesitantly = AdverbProgram(
        name=("hesitantly",),
        mode="egocentric",
        rules=frozenset(
            RewriteRule(v, (v, "stay")) for v in ("walk", "push", "pull")
        ),
    )
    return [spinning, cautiously, zigzagging, hesitantly]


# --- program text format -----------------------------------------------------
#
# One program per block:
#
#   name: while spinning
#   mode: allocentric
#   passes: 1
#   plan_shape: canonical
#   North -> turn_left turn_left turn_left turn_left North
#
# '#' starts a comment; canonical form has the headers in the order above and
# the rules sorted by lhs.

_HEADER_KEYS = ("name", "mode", "passes", "plan_shape")


def serialize_program(program: AdverbProgram) -> str:
    lines = [
        f"name: {program.surface}",
        f"mode: {program.mode}",
        f"passes: {program.passes}",
        f"plan_shape: {program.plan_shape}",
    ]
    for rule in sorted(program.rules, key=lambda r: r.lhs):
        lines.append(f"{rule.lhs} -> {' '.join(rule.rhs)}")
    return "\n".join(lines) + "\n"


def parse_program(text: str) -> AdverbProgram:
    headers: dict[str, str] = {}
    rules: list[RewriteRule] = []
    seen_lhs: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "->" in line:
            lhs_text, _, rhs_text = line.partition("->")
            lhs = lhs_text.strip()
            try:
                require_symbol(lhs)
            except ValueError:
                raise ParseError(f"unknown rule lhs {lhs!r}", lineno, raw.index(lhs) + 1)
            if lhs in seen_lhs:
                raise DuplicateLhs(f"line {lineno}: second rule for {lhs!r}")
            seen_lhs.add(lhs)
            rhs_tokens = rhs_text.split()
            if not rhs_tokens:
                raise ParseError("empty rule rhs", lineno, len(line) + 1)
            for tok in rhs_tokens:
                try:
                    require_symbol(tok)
                except ValueError:
                    raise ParseError(f"unknown symbol {tok!r}", lineno, raw.index(tok) + 1)
            rules.append(RewriteRule(lhs, tuple(rhs_tokens)))
        elif ":" in line:
            key, _, value = line.partition(":")
            key = key.strip()
            if key not in _HEADER_KEYS:
                raise ParseError(f"unknown header {key!r}", lineno)
            if key in headers:
                raise ParseError(f"repeated header {key!r}", lineno)
            headers[key] = value.strip()
        else:
            raise ParseError("expected 'key: value' header or 'LHS -> SYM ...' rule", lineno)

    if "name" not in headers or not headers["name"]:
        raise ParseError("missing name header", 1)
    mode = headers.get("mode", "egocentric")
    plan_shape = headers.get("plan_shape", "canonical")
    try:
        passes = int(headers.get("passes", "1"))
    except ValueError:
        raise ParseError(f"passes is not an integer: {headers['passes']!r}", 1)
    try:
        return AdverbProgram(
            name=tuple(headers["name"].split()),
            rules=frozenset(rules),
            mode=mode,
            passes=passes,
            plan_shape=plan_shape,
        )
    except ValueError as exc:
        raise ParseError(str(exc), 1)
