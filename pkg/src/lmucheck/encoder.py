"""Compilation of PCTL state formulas into closed fixed-point formulas.

Probability comparisons become threshold macros, path quantifiers become
fixed points over the underlying graph, and `A`-style next/until steps use
the totalized box `[]phi /\\ <>1`, which is 0 at deadlocks and agrees with
`[]phi` elsewhere. Boundary thresholds collapse to constants: `>= 0` is
always true, `> 1` never, and `>= 1` means probability exactly 1.
"""

from __future__ import annotations

from fractions import Fraction

from . import lmu, pctl

__all__ = ["encode_pctl"]


def _boxdot(phi: lmu.Lmu) -> lmu.Lmu:
    return lmu.Meet(lmu.Box(phi), lmu.Diamond(lmu.ONE))


def _threshold(strict: bool, q: Fraction, body: lmu.Lmu) -> lmu.Lmu:
    if strict:
        if q == 0:
            return lmu.expand_threshold(">0", body)
        if q == 1:
            return lmu.ZERO
        return lmu.expand_threshold(">", body, q)
    if q == 0:
        return lmu.ONE
    if q == 1:
        return lmu.expand_threshold("=1", body)
    return lmu.expand_threshold(">=", body, q)


def _until_loop(goal: lmu.Lmu, guard: lmu.Lmu, step) -> lmu.Lmu:
    """mu X. goal \\/ (guard /\\ step(X)) with X fresh for both operands."""
    avoid = lmu.used_names(goal) | lmu.used_names(guard)
    x = next(lmu.fresh_names(avoid))
    return lmu.Mu(x, lmu.Join(goal, lmu.Meet(guard, step(lmu.Var(x)))))


def encode_pctl(phi: pctl.PctlState) -> lmu.Lmu:
    """Closed fixed-point formula with the same per-state truth value."""
    if isinstance(phi, pctl.TrueFormula):
        return lmu.ONE
    if isinstance(phi, pctl.Prop):
        return lmu.Prop(phi.name)
    if isinstance(phi, pctl.Or):
        return lmu.Join(encode_pctl(phi.left), encode_pctl(phi.right))
    if isinstance(phi, pctl.Not):
        return lmu.dual(encode_pctl(phi.body))
    if isinstance(phi, pctl.Exists):
        path = phi.path
        if isinstance(path, pctl.Next):
            return lmu.expand_threshold(">0", lmu.Diamond(encode_pctl(path.body)))
        return _until_loop(
            encode_pctl(path.right),
            encode_pctl(path.left),
            lambda x: lmu.expand_threshold(">0", lmu.Diamond(x)),
        )
    if isinstance(phi, pctl.Forall):
        path = phi.path
        if isinstance(path, pctl.Next):
            return lmu.expand_threshold("=1", _boxdot(encode_pctl(path.body)))
        return _until_loop(
            encode_pctl(path.right),
            encode_pctl(path.left),
            lambda x: lmu.expand_threshold("=1", _boxdot(x)),
        )
    if isinstance(phi, (pctl.ProbExists, pctl.ProbForall)):
        modality = lmu.Diamond if isinstance(phi, pctl.ProbExists) else _boxdot
        path = phi.path
        if isinstance(path, pctl.Next):
            body = modality(encode_pctl(path.body))
        else:
            body = _until_loop(encode_pctl(path.right), encode_pctl(path.left), modality)
        return _threshold(phi.strict, phi.bound, body)
    raise TypeError(f"not a PCTL state formula: {phi!r}")
