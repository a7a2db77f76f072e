"""Finite rational probabilistic nondeterministic transition systems.

Model file grammar (line oriented, `#` starts a comment):

    state <id> <id> ...                       # declaration order is canonical
    prop <Id> = { <state>: <rational>, ... }  # omitted states default to 0
    trans <state> -> { <state>: <rational>, ... }

State names start with a lowercase letter, proposition names with an uppercase
letter. Every `trans` line contributes one probability distribution; a state
with no `trans` line is a deadlock. Models are immutable after parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .rationals import RationalParseError, format_rational, parse_rational

__all__ = [
    "ModelError",
    "Distribution",
    "Pnts",
    "Interpretation",
    "EdgeRelation",
    "parse_model",
    "render_model",
    "validate_model",
    "underlying_graph",
]


class ModelError(ValueError):
    """Malformed model text or violated model invariant."""


@dataclass(frozen=True)
class Distribution:
    """Probability distribution over states, zero-weight entries omitted."""

    entries: tuple[tuple[str, Fraction], ...]

    @staticmethod
    def from_dict(weights: dict[str, Fraction], order: dict[str, int]) -> "Distribution":
        items = sorted(weights.items(), key=lambda kv: order.get(kv[0], len(order)))
        return Distribution(tuple(items))

    def weight(self, state: str) -> Fraction:
        for s, w in self.entries:
            if s == state:
                return w
        return Fraction(0)

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.entries)

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.entries), Fraction(0))


@dataclass
class Pnts:
    """States in declaration order plus, per state, a sequence of distributions."""

    states: tuple[str, ...]
    transitions: dict[str, tuple[Distribution, ...]]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.index = {s: i for i, s in enumerate(self.states)}

    def distributions(self, state: str) -> tuple[Distribution, ...]:
        return self.transitions.get(state, ())

    def is_deadlock(self, state: str) -> bool:
        return not self.transitions.get(state)


@dataclass
class Interpretation:
    """Proposition valuations in [0,1]; complements are derived, never stored."""

    valuation: dict[str, dict[str, Fraction]]

    def value(self, prop: str, state: str) -> Fraction:
        return self.valuation.get(prop, {}).get(state, Fraction(0))

    def props(self) -> tuple[str, ...]:
        return tuple(self.valuation)

    def is_boolean(self) -> bool:
        return all(
            v in (Fraction(0), Fraction(1))
            for per_state in self.valuation.values()
            for v in per_state.values()
        )


@dataclass(frozen=True)
class EdgeRelation:
    """The underlying nondeterministic graph: s -> t iff some distribution hits t."""

    edges: frozenset[tuple[str, str]]

    def successors(self, state: str) -> tuple[str, ...]:
        return tuple(sorted(t for s, t in self.edges if s == state))


def underlying_graph(m: Pnts) -> EdgeRelation:
    """Edges (s, t) with d(t) > 0 for some distribution d available at s."""
    edges = set()
    for s in m.states:
        for d in m.distributions(s):
            for t, w in d.entries:
                if w > 0:
                    edges.add((s, t))
    return EdgeRelation(frozenset(edges))


def validate_model(m: Pnts, interp: Interpretation, boolean_mode: bool = False) -> list[str]:
    """Return every invariant violation; an empty list means the model is valid."""
    errors: list[str] = []
    declared = set(m.states)
    if len(declared) != len(m.states):
        errors.append("duplicate state declaration")
    for s, dists in m.transitions.items():
        if s not in declared:
            errors.append(f"transition from undeclared state {s}")
        for d in dists:
            for t, w in d.entries:
                if t not in declared:
                    errors.append(f"transition target {t} is not a declared state")
                if w == 0:
                    errors.append(f"zero weight for {t} must be omitted")
                elif not (0 < w <= 1):
                    errors.append(f"weight {format_rational(w)} for {t} outside (0, 1]")
            if d.total != 1:
                errors.append(
                    f"distribution at {s} sums to {format_rational(d.total)}, expected 1"
                )
    for p, per_state in interp.valuation.items():
        for s, v in per_state.items():
            if s not in declared:
                errors.append(f"valuation of {p} mentions undeclared state {s}")
            if not (0 <= v <= 1):
                errors.append(f"valuation {p}({s}) = {format_rational(v)} outside [0, 1]")
            elif boolean_mode and v not in (Fraction(0), Fraction(1)):
                errors.append(
                    f"non-boolean valuation {p}({s}) = {format_rational(v)} in PCTL mode"
                )
    return errors


_STATE_LINE = re.compile(r"^state\s+(.+)$")
_PROP_LINE = re.compile(r"^prop\s+([A-Z]\w*)\s*=\s*\{(.*)\}$")
_TRANS_LINE = re.compile(r"^trans\s+([a-z]\w*)\s*->\s*\{(.*)\}$")
_STATE_NAME = re.compile(r"^[a-z]\w*$")


def _parse_pairs(body: str, lineno: int, what: str) -> list[tuple[str, Fraction]]:
    pairs: list[tuple[str, Fraction]] = []
    body = body.strip()
    if not body:
        return pairs
    for chunk in body.split(","):
        if ":" not in chunk:
            raise ModelError(f"line {lineno}: expected `state: rational` in {what}")
        name, _, value = chunk.partition(":")
        name = name.strip()
        try:
            q = parse_rational(value)
        except RationalParseError as exc:
            raise ModelError(f"line {lineno}: {exc}") from exc
        pairs.append((name, q))
    return pairs


def parse_model(text: str) -> tuple[Pnts, Interpretation]:
    """Parse and validate a model file, raising ModelError with a line number."""
    states: list[str] = []
    valuation: dict[str, dict[str, Fraction]] = {}
    trans: dict[str, list[Distribution]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _STATE_LINE.match(line)
        if m:
            for name in m.group(1).split():
                if not _STATE_NAME.match(name):
                    raise ModelError(
                        f"line {lineno}: state name {name!r} must start lowercase"
                    )
                if name in states:
                    raise ModelError(f"line {lineno}: duplicate state {name}")
                states.append(name)
            continue
        m = _PROP_LINE.match(line)
        if m:
            prop, body = m.group(1), m.group(2)
            if prop in valuation:
                raise ModelError(f"line {lineno}: duplicate proposition {prop}")
            per_state: dict[str, Fraction] = {}
            for name, q in _parse_pairs(body, lineno, "prop"):
                if name not in states:
                    raise ModelError(f"line {lineno}: unknown state {name}")
                if name in per_state:
                    raise ModelError(f"line {lineno}: repeated state {name}")
                if not (0 <= q <= 1):
                    raise ModelError(
                        f"line {lineno}: valuation {format_rational(q)} outside [0, 1]"
                    )
                per_state[name] = q
            valuation[prop] = per_state
            continue
        m = _TRANS_LINE.match(line)
        if m:
            src, body = m.group(1), m.group(2)
            if src not in states:
                raise ModelError(f"line {lineno}: unknown state {src}")
            weights: dict[str, Fraction] = {}
            for name, q in _parse_pairs(body, lineno, "trans"):
                if name not in states:
                    raise ModelError(f"line {lineno}: unknown state {name}")
                if name in weights:
                    raise ModelError(f"line {lineno}: repeated state {name}")
                if q == 0:
                    raise ModelError(f"line {lineno}: zero weight for {name} must be omitted")
                if not (0 < q <= 1):
                    raise ModelError(
                        f"line {lineno}: weight {format_rational(q)} outside (0, 1]"
                    )
                weights[name] = q
            total = sum(weights.values(), Fraction(0))
            if total != 1:
                raise ModelError(
                    f"line {lineno}: distribution sums to {format_rational(total)}, expected 1"
                )
            order = {s: i for i, s in enumerate(states)}
            dist = Distribution.from_dict(weights, order)
            bucket = trans.setdefault(src, [])
            if dist not in bucket:  # duplicate distributions carry no information
                bucket.append(dist)
            continue
        raise ModelError(f"line {lineno}: unrecognized line {line!r}")

    if not states:
        raise ModelError("model declares no states")
    pnts = Pnts(tuple(states), {s: tuple(ds) for s, ds in trans.items()})
    interp = Interpretation(valuation)
    errors = validate_model(pnts, interp)
    if errors:
        raise ModelError("; ".join(errors))
    return pnts, interp


def render_model(m: Pnts, interp: Interpretation) -> str:
    """Canonical text form; parse_model(render_model(m, i)) reproduces (m, i)."""
    lines = ["state " + " ".join(m.states)]
    for p in sorted(interp.valuation):
        body = ", ".join(
            f"{s}: {format_rational(interp.valuation[p][s])}"
            for s in m.states
            if s in interp.valuation[p]
        )
        lines.append(f"prop {p} = {{ {body} }}")
    for s in m.states:
        for d in m.distributions(s):
            body = ", ".join(f"{t}: {format_rational(w)}" for t, w in d.entries)
            lines.append(f"trans {s} -> {{ {body} }}")
    return "\n".join(lines) + "\n"
