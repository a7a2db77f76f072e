"""PCTL abstract syntax over boolean-valued models.

State formulas: true, propositions, negation, disjunction, path quantifiers
E/A over a path formula, and probability bounds Pmax/Pmin (sup respectively
inf over schedulers) with relation `>` or `>=` and a rational threshold in
[0, 1]. Path formulas: next `X phi` and until `phi U phi`. The surface sugar
`&` and `false` desugars at parse time and never appears in trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rationals import format_rational

__all__ = [
    "PctlState",
    "PctlPath",
    "TrueFormula",
    "Prop",
    "Not",
    "Or",
    "Exists",
    "Forall",
    "ProbExists",
    "ProbForall",
    "Next",
    "Until",
    "TRUE",
    "conj",
    "false",
    "render_pctl",
]


@dataclass(frozen=True)
class PctlState:
    pass


@dataclass(frozen=True)
class PctlPath:
    pass


@dataclass(frozen=True)
class TrueFormula(PctlState):
    pass


@dataclass(frozen=True)
class Prop(PctlState):
    name: str


@dataclass(frozen=True)
class Not(PctlState):
    body: PctlState


@dataclass(frozen=True)
class Or(PctlState):
    left: PctlState
    right: PctlState


@dataclass(frozen=True)
class Exists(PctlState):
    path: PctlPath


@dataclass(frozen=True)
class Forall(PctlState):
    path: PctlPath


def _check_bound(bound: Fraction) -> None:
    if not (0 <= bound <= 1):
        raise ValueError(f"probability bound {bound} outside [0, 1]")


@dataclass(frozen=True)
class ProbExists(PctlState):
    strict: bool  # True for `>`, False for `>=`
    bound: Fraction
    path: PctlPath

    def __post_init__(self) -> None:
        _check_bound(self.bound)


@dataclass(frozen=True)
class ProbForall(PctlState):
    strict: bool
    bound: Fraction
    path: PctlPath

    def __post_init__(self) -> None:
        _check_bound(self.bound)


@dataclass(frozen=True)
class Next(PctlPath):
    body: PctlState


@dataclass(frozen=True)
class Until(PctlPath):
    left: PctlState
    right: PctlState


TRUE = TrueFormula()


def conj(left: PctlState, right: PctlState) -> PctlState:
    """Surface `&`, defined through negation and disjunction."""
    return Not(Or(Not(left), Not(right)))


def false() -> PctlState:
    return Not(TRUE)


_LEVEL_OR = 0
_LEVEL_UNARY = 2
_LEVEL_ATOM = 3


def _render_path(psi: PctlPath) -> str:
    if isinstance(psi, Next):
        return f"X {_render(psi.body, _LEVEL_UNARY)}"
    if isinstance(psi, Until):
        return f"[{_render(psi.left, _LEVEL_OR)} U {_render(psi.right, _LEVEL_OR)}]"
    raise TypeError(f"not a path formula: {psi!r}")


def _prob_head(name: str, strict: bool, bound: Fraction) -> str:
    rel = ">" if strict else ">="
    return f"{name}{rel}{format_rational(bound)}"


def _render(phi: PctlState, min_level: int) -> str:
    if isinstance(phi, TrueFormula):
        return "true"
    if isinstance(phi, Prop):
        return phi.name
    if isinstance(phi, Not):
        text = f"!{_render(phi.body, _LEVEL_UNARY)}"
        level = _LEVEL_UNARY
    elif isinstance(phi, Or):
        text = f"{_render(phi.left, _LEVEL_OR)} | {_render(phi.right, _LEVEL_OR + 1)}"
        level = _LEVEL_OR
    elif isinstance(phi, Exists):
        body = _render_path(phi.path)
        text = f"E {body}" if isinstance(phi.path, Next) else f"E{body}"
        level = _LEVEL_UNARY
    elif isinstance(phi, Forall):
        body = _render_path(phi.path)
        text = f"A {body}" if isinstance(phi.path, Next) else f"A{body}"
        level = _LEVEL_UNARY
    elif isinstance(phi, ProbExists):
        text = f"{_prob_head('Pmax', phi.strict, phi.bound)}[{_render_inner(phi.path)}]"
        level = _LEVEL_ATOM
    elif isinstance(phi, ProbForall):
        text = f"{_prob_head('Pmin', phi.strict, phi.bound)}[{_render_inner(phi.path)}]"
        level = _LEVEL_ATOM
    else:
        raise TypeError(f"not a state formula: {phi!r}")
    if level < min_level:
        return f"({text})"
    return text


def _render_inner(psi: PctlPath) -> str:
    if isinstance(psi, Next):
        return f"X {_render(psi.body, _LEVEL_OR)}"
    if isinstance(psi, Until):
        return f"{_render(psi.left, _LEVEL_OR)} U {_render(psi.right, _LEVEL_OR)}"
    raise TypeError(f"not a path formula: {psi!r}")


def render_pctl(phi: PctlState) -> str:
    return _render(phi, _LEVEL_OR)
