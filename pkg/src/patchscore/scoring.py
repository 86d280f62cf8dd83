"""Patching-controllability and patching-observability score evaluation.

Scores are exact rationals measured in controllable bits: the score of an
n-bit signal lies in [0, n], and sigma = score / width is the shared per-bit
controllability. The per-operator rules:

  constant                  0
  assign / not              operand sigma, renormalized to the result width
  two-input bitwise/logical (S_A + S_B) / 2      (the + and - arithmetic
                            operators reuse this rule and are flagged with a
                            diagnostic at elaboration)
  shift                     S_A * (n - 1) / n    (shift amount ignored)
  comparison, two signals   (sigma_1 + sigma_2) / 2 on a 1-bit result
  comparison with constant  sigma of the signal side
  concatenation             sum of operand scores, capped at the target width

Conditionals mix the branch scores through the select:

  sigma_sel * max(branches) + (1 - sigma_sel) * mean(branches)

with one adjustment: when the select is exactly fully controllable, a
constant branch scores min(floor(log2(X)), branch width) instead of 0, where
X counts the distinct constants among the branches of that conditional. A
fully controlled select steers a case over X distinct constants onto any of
them, so the constants contribute log2(X) chosen bits.

A register's past value is uncontrolled: inside the drive tree of a state
signal, references to state signals score 0, and Hold scores 0. One forward
pass over the evaluation order therefore scores the whole model.

Observability mirrors the same calculus on the reversed dataflow graph. A
signal's observability is the maximum over its fan-out of what each consumer
transmits backward: full transparency through assign/not and concatenation
parts, half through a two-input operator, 1/k through a k-way conditional
(the select's value is not assumed known), scaled by selected bit counts
through bit- and part-selects. Reads of state signals inside sequential
trees transmit nothing, mirroring the forward rule. The construction is an
interpretation: pinning, bounds, and monotonicity in the observed set are
its contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ast_nodes import (Binary, BitSelect, Concat, Const, Expr, PartSelect,
                        SignalRef, Ternary, Unary)
from .elaborate import (CaseK, Cond, DataflowModel, DriveTree, Hold, Leaf, width_of)
from .errors import EvalError

_LOGICAL_OPS = ("&&", "||")
_BITWISE_OPS = ("&", "|", "^", "~^", "+", "-")
_SHIFT_OPS = ("<<", ">>")
_COMPARE_OPS = ("==", "!=", "<", ">", "<=", ">=")

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class PatchConfig:
    """A named patching option: signals replaced by patching control cells
    (patched) and signals tapped for observation (observed)."""

    name: str
    patched: tuple[str, ...] = ()
    observed: tuple[str, ...] = ()

    def resolve(self, model: DataflowModel) -> "PatchConfig":
        """Expand array names to elements and validate against the model."""
        return PatchConfig(self.name,
                           _expand_names(model, self.patched),
                           _expand_names(model, self.observed))


def _expand_names(model: DataflowModel, names: tuple[str, ...]) -> tuple[str, ...]:
    out: list[str] = []
    seen: set[str] = set()
    for name in names:
        for element in model.expand_signal(name):
            if element not in seen:
                seen.add(element)
                out.append(element)
    return tuple(out)


# ---- expression scoring ----

def _signal_sigma(name: str, env: dict[str, Fraction], model: DataflowModel,
                  sequential: bool) -> Fraction:
    if sequential and model.is_state(name):
        return ZERO
    try:
        return env[name] / model.width(name)
    except KeyError:
        raise EvalError(f"no score available for signal {name!r}") from None


def score_expr(e: Expr, env: dict[str, Fraction], model: DataflowModel,
               sequential: bool = False) -> Fraction:
    """Score one expression given the scores of the signals it reads.

    In sequential context (the drive tree of a register), references to
    state signals score 0: a register's past value is not controlled.
    """
    widths = model.widths

    def sigma(sub: Expr) -> Fraction:
        return rec(sub) / width_of(sub, widths)

    def rec(sub: Expr) -> Fraction:
        if isinstance(sub, Const):
            return ZERO
        if isinstance(sub, SignalRef):
            if sequential and model.is_state(sub.name):
                return ZERO
            try:
                return env[sub.name]
            except KeyError:
                raise EvalError(f"no score available for signal {sub.name!r}") \
                    from None
        if isinstance(sub, BitSelect):
            return _signal_sigma(sub.base, env, model, sequential)
        if isinstance(sub, PartSelect):
            m = sub.msb - sub.lsb + 1
            return _signal_sigma(sub.base, env, model, sequential) * m
        if isinstance(sub, Unary):
            return sigma(sub.operand) * width_of(sub, widths)
        if isinstance(sub, Binary):
            if sub.op in _LOGICAL_OPS:
                return (sigma(sub.lhs) + sigma(sub.rhs)) / 2
            if sub.op in _BITWISE_OPS:
                return (rec(sub.lhs) + rec(sub.rhs)) / 2
            if sub.op in _SHIFT_OPS:
                n = width_of(sub.lhs, widths)
                return rec(sub.lhs) * (n - 1) / n
            if sub.op in _COMPARE_OPS:
                lhs_const = isinstance(sub.lhs, Const)
                rhs_const = isinstance(sub.rhs, Const)
                if lhs_const and rhs_const:
                    return ZERO
                if lhs_const:
                    return sigma(sub.rhs)
                if rhs_const:
                    return sigma(sub.lhs)
                return (sigma(sub.lhs) + sigma(sub.rhs)) / 2
            raise EvalError(f"unknown operator {sub.op!r}")
        if isinstance(sub, Ternary):
            branches = [
                (rec(sub.then), isinstance(sub.then, Const)),
                (rec(sub.other), isinstance(sub.other, Const)),
            ]
            x = _distinct_constants([sub.then, sub.other])
            return score_case(sigma(sub.select), branches, x,
                              width_of(sub, widths))
        if isinstance(sub, Concat):
            return sum((rec(p) for p in sub.parts), ZERO)
        raise EvalError(f"unknown expression node {sub!r}")

    return rec(e)


def _distinct_constants(exprs: list[Expr]) -> int:
    return len({e.value for e in exprs if isinstance(e, Const)})


# ---- conditional scoring ----

def _adjusted(branches: list[tuple[Fraction, bool]], select_sigma: Fraction,
              distinct_constants: int, width: int) -> list[Fraction]:
    if select_sigma == ONE and distinct_constants > 0:
        lifted = Fraction(min(distinct_constants.bit_length() - 1, width))
        return [lifted if is_const else score for score, is_const in branches]
    return [score for score, _ in branches]


def score_cond(select_sigma: Fraction, then_score: Fraction, else_score: Fraction,
               distinct_constants: int = 0, width: int = 1, *,
               then_is_const: bool = False,
               else_is_const: bool = False) -> Fraction:
    """Score of a two-way conditional assignment.

    ``distinct_constants`` counts the distinct constant values among the
    branches; it lifts constant branch scores only when the select is
    exactly fully controllable.
    """
    return score_case(select_sigma,
                      [(then_score, then_is_const), (else_score, else_is_const)],
                      distinct_constants, width)


def score_case(select_sigma: Fraction, branches: list[tuple[Fraction, bool]],
               distinct_constants: int = 0, width: int = 1) -> Fraction:
    """Score of a k-way constant-labeled selection; branches are
    (score, is_constant) pairs. Only explicit branches participate."""
    scores = _adjusted(branches, select_sigma, distinct_constants, width)
    best = max(scores)
    mean = sum(scores, ZERO) / len(scores)
    return select_sigma * best + (1 - select_sigma) * mean


# ---- drive tree evaluation ----

def _branch_entry(tree: DriveTree, env, model, sequential,
                  width: int) -> tuple[Fraction, bool]:
    score = score_drive(tree, env, model, sequential, width)
    return score, isinstance(tree, Leaf) and isinstance(tree.expr, Const)


def _branch_const_values(trees: list[DriveTree]) -> int:
    return len({t.expr.value for t in trees
                if isinstance(t, Leaf) and isinstance(t.expr, Const)})


def score_drive(tree: DriveTree, env: dict[str, Fraction], model: DataflowModel,
                sequential: bool, width: int) -> Fraction:
    """Score a drive tree; ``width`` is the driven signal's width."""
    if isinstance(tree, Hold):
        return ZERO
    if isinstance(tree, Leaf):
        return score_expr(tree.expr, env, model, sequential)
    widths = model.widths
    if isinstance(tree, Cond):
        select_sigma = (score_expr(tree.select, env, model, sequential)
                        / width_of(tree.select, widths))
        branches = [_branch_entry(tree.then, env, model, sequential, width),
                    _branch_entry(tree.other, env, model, sequential, width)]
        x = _branch_const_values([tree.then, tree.other])
        return score_case(select_sigma, branches, x, width)
    if isinstance(tree, CaseK):
        select_sigma = (score_expr(tree.select, env, model, sequential)
                        / width_of(tree.select, widths))
        branches = [_branch_entry(b, env, model, sequential, width)
                    for b in tree.branches]
        x = _branch_const_values(list(tree.branches))
        return score_case(select_sigma, branches, x, width)
    raise EvalError(f"unknown drive tree node {tree!r}")


# ---- whole-model passes ----

def compute_pc(model: DataflowModel, config: PatchConfig) -> dict[str, Fraction]:
    """Patching controllability of every scored signal under a config.

    Patched signals pin to their full width; unpatched inputs score 0; all
    other signals evaluate their drive tree in one forward pass, with the
    result capped at the signal width.
    """
    cfg = config.resolve(model)
    patched = set(cfg.patched)
    env: dict[str, Fraction] = {}
    for name in model.order:
        info = model.info(name)
        if name in patched:
            env[name] = Fraction(info.width)
        elif name in model.drives:
            score = score_drive(model.drives[name], env, model,
                                info.is_state, info.width)
            env[name] = min(score, Fraction(info.width))
        else:
            env[name] = ZERO
    return env


def compute_po(model: DataflowModel, config: PatchConfig) -> dict[str, Fraction]:
    """Patching observability of every scored signal under a config.

    Observed signals pin to their full width; everything else takes the
    maximum score transmitted backward through its consumers, in one pass
    over the reversed evaluation order.
    """
    cfg = config.resolve(model)
    observed = set(cfg.observed)
    incoming: dict[str, Fraction] = {}
    po: dict[str, Fraction] = {}
    for name in reversed(model.order):
        info = model.info(name)
        if name in observed:
            po[name] = Fraction(info.width)
        else:
            po[name] = min(incoming.get(name, ZERO), Fraction(info.width))
        if name in model.drives and po[name] > 0:
            _transmit_drive(model.drives[name], po[name] / info.width,
                            incoming, model, info.is_state)
    return {name: po[name] for name in model.order}


def _bump(incoming: dict[str, Fraction], name: str, score: Fraction) -> None:
    if score > incoming.get(name, ZERO):
        incoming[name] = score


def _transmit_drive(tree: DriveTree, sigma: Fraction, incoming: dict[str, Fraction],
                    model: DataflowModel, sequential: bool) -> None:
    if sigma == 0 or isinstance(tree, Hold):
        return
    if isinstance(tree, Leaf):
        _transmit_expr(tree.expr, sigma, incoming, model, sequential)
    elif isinstance(tree, Cond):
        _transmit_drive(tree.then, sigma / 2, incoming, model, sequential)
        _transmit_drive(tree.other, sigma / 2, incoming, model, sequential)
    elif isinstance(tree, CaseK):
        share = sigma / len(tree.branches)
        for branch in tree.branches:
            _transmit_drive(branch, share, incoming, model, sequential)


def _transmit_expr(e: Expr, sigma: Fraction, incoming: dict[str, Fraction],
                   model: DataflowModel, sequential: bool) -> None:
    if sigma == 0 or isinstance(e, Const):
        return
    if isinstance(e, SignalRef):
        if not (sequential and model.is_state(e.name)):
            _bump(incoming, e.name, sigma * model.width(e.name))
        return
    if isinstance(e, BitSelect):
        if not (sequential and model.is_state(e.base)):
            _bump(incoming, e.base, sigma)
        return
    if isinstance(e, PartSelect):
        if not (sequential and model.is_state(e.base)):
            _bump(incoming, e.base, sigma * (e.msb - e.lsb + 1))
        return
    if isinstance(e, Unary):
        _transmit_expr(e.operand, sigma, incoming, model, sequential)
        return
    if isinstance(e, Binary):
        if e.op in _SHIFT_OPS:
            n = width_of(e.lhs, model.widths)
            _transmit_expr(e.lhs, sigma * (n - 1) / n, incoming, model, sequential)
            return
        if e.op in _COMPARE_OPS:
            if isinstance(e.lhs, Const):
                _transmit_expr(e.rhs, sigma, incoming, model, sequential)
                return
            if isinstance(e.rhs, Const):
                _transmit_expr(e.lhs, sigma, incoming, model, sequential)
                return
        _transmit_expr(e.lhs, sigma / 2, incoming, model, sequential)
        _transmit_expr(e.rhs, sigma / 2, incoming, model, sequential)
        return
    if isinstance(e, Ternary):
        _transmit_expr(e.then, sigma / 2, incoming, model, sequential)
        _transmit_expr(e.other, sigma / 2, incoming, model, sequential)
        return
    if isinstance(e, Concat):
        for part in e.parts:
            _transmit_expr(part, sigma, incoming, model, sequential)
        return
    raise EvalError(f"unknown expression node {e!r}")
