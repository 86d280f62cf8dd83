"""Independent reference evaluator for controllability and observability.

A deliberately plain, demand-driven recursive implementation of the scoring
rules, written separately from the engine so the two can be compared
exactly. It works from raw tables (widths, state set, drive trees) instead
of the engine's model type and evaluation order.
"""

from __future__ import annotations

from fractions import Fraction

from patchscore.ast_nodes import (Binary, BitSelect, Concat, Const, Expr,
                                  PartSelect, SignalRef, Ternary, Unary)
from patchscore.elaborate import CaseK, Cond, DriveTree, Hold, Leaf

LOGICAL = ("&&", "||")
BITWISE = ("&", "|", "^", "~^", "+", "-")
SHIFT = ("<<", ">>")
COMPARE = ("==", "!=", "<", ">", "<=", ">=")


def ref_width(e: Expr, widths: dict[str, int]) -> int:
    if isinstance(e, Const):
        return e.width
    if isinstance(e, SignalRef):
        return widths[e.name]
    if isinstance(e, BitSelect):
        return 1
    if isinstance(e, PartSelect):
        return e.msb - e.lsb + 1
    if isinstance(e, Unary):
        return 1 if e.op == "!" else ref_width(e.operand, widths)
    if isinstance(e, Binary):
        if e.op in LOGICAL or e.op in COMPARE:
            return 1
        if e.op in SHIFT:
            return ref_width(e.lhs, widths)
        return max(ref_width(e.lhs, widths), ref_width(e.rhs, widths))
    if isinstance(e, Ternary):
        return max(ref_width(e.then, widths), ref_width(e.other, widths))
    if isinstance(e, Concat):
        return sum(ref_width(p, widths) for p in e.parts)
    raise TypeError(e)


def ref_expr_score(e: Expr, lookup, widths: dict[str, int], state: set[str],
                   sequential: bool) -> Fraction:
    """Score an expression; ``lookup`` maps a signal name to its score."""

    def sig_sigma(name: str) -> Fraction:
        if sequential and name in state:
            return Fraction(0)
        return lookup(name) / widths[name]

    if isinstance(e, Const):
        return Fraction(0)
    if isinstance(e, SignalRef):
        if sequential and e.name in state:
            return Fraction(0)
        return lookup(e.name)
    if isinstance(e, BitSelect):
        return sig_sigma(e.base)
    if isinstance(e, PartSelect):
        return sig_sigma(e.base) * (e.msb - e.lsb + 1)
    if isinstance(e, Unary):
        operand = ref_expr_score(e.operand, lookup, widths, state, sequential)
        sigma = operand / ref_width(e.operand, widths)
        return sigma * ref_width(e, widths)
    if isinstance(e, Binary):
        def score(side):
            return ref_expr_score(side, lookup, widths, state, sequential)

        def sigma(side):
            return score(side) / ref_width(side, widths)

        if e.op in LOGICAL:
            return (sigma(e.lhs) + sigma(e.rhs)) / 2
        if e.op in BITWISE:
            return (score(e.lhs) + score(e.rhs)) / 2
        if e.op in SHIFT:
            n = ref_width(e.lhs, widths)
            return score(e.lhs) * (n - 1) / n
        if e.op in COMPARE:
            if isinstance(e.lhs, Const) and isinstance(e.rhs, Const):
                return Fraction(0)
            if isinstance(e.lhs, Const):
                return sigma(e.rhs)
            if isinstance(e.rhs, Const):
                return sigma(e.lhs)
            return (sigma(e.lhs) + sigma(e.rhs)) / 2
        raise ValueError(e.op)
    if isinstance(e, Ternary):
        sel = ref_expr_score(e.select, lookup, widths, state, sequential) \
            / ref_width(e.select, widths)
        entries = [(e.then, ref_expr_score(e.then, lookup, widths, state, sequential)),
                   (e.other, ref_expr_score(e.other, lookup, widths, state,
                                            sequential))]
        return _mix(sel, entries, ref_width(e, widths))
    if isinstance(e, Concat):
        return sum((ref_expr_score(p, lookup, widths, state, sequential)
                    for p in e.parts), Fraction(0))
    raise TypeError(e)


def _mix(select_sigma: Fraction, entries, width: int) -> Fraction:
    """Select-weighted mix of branch scores with the constant adjustment."""
    constants = {b.value for b, _ in entries if isinstance(b, Const)}
    scores = []
    for branch, score in entries:
        if select_sigma == 1 and isinstance(branch, Const):
            score = Fraction(min(len(constants).bit_length() - 1, width))
        scores.append(score)
    mean = sum(scores, Fraction(0)) / len(scores)
    return select_sigma * max(scores) + (1 - select_sigma) * mean


def _mix_trees(select_sigma: Fraction, entries, width: int) -> Fraction:
    constants = {t.expr.value for t, _ in entries
                 if isinstance(t, Leaf) and isinstance(t.expr, Const)}
    scores = []
    for tree, score in entries:
        constant = isinstance(tree, Leaf) and isinstance(tree.expr, Const)
        if select_sigma == 1 and constant:
            score = Fraction(min(len(constants).bit_length() - 1, width))
        scores.append(score)
    mean = sum(scores, Fraction(0)) / len(scores)
    return select_sigma * max(scores) + (1 - select_sigma) * mean


def ref_tree_score(tree: DriveTree, lookup, widths: dict[str, int],
                   state: set[str], sequential: bool, width: int) -> Fraction:
    if isinstance(tree, Hold):
        return Fraction(0)
    if isinstance(tree, Leaf):
        return ref_expr_score(tree.expr, lookup, widths, state, sequential)
    if isinstance(tree, Cond):
        sel = ref_expr_score(tree.select, lookup, widths, state, sequential) \
            / ref_width(tree.select, widths)
        entries = [
            (tree.then, ref_tree_score(tree.then, lookup, widths, state,
                                       sequential, width)),
            (tree.other, ref_tree_score(tree.other, lookup, widths, state,
                                        sequential, width)),
        ]
        return _mix_trees(sel, entries, width)
    if isinstance(tree, CaseK):
        sel = ref_expr_score(tree.select, lookup, widths, state, sequential) \
            / ref_width(tree.select, widths)
        entries = [(b, ref_tree_score(b, lookup, widths, state, sequential, width))
                   for b in tree.branches]
        return _mix_trees(sel, entries, width)
    raise TypeError(tree)


def ref_pc(widths: dict[str, int], state: set[str],
           drives: dict[str, DriveTree], patched: set[str]) -> dict[str, Fraction]:
    """Demand-driven controllability over a whole model."""
    memo: dict[str, Fraction] = {}

    def score(name: str) -> Fraction:
        if name in memo:
            return memo[name]
        if name in patched:
            memo[name] = Fraction(widths[name])
        elif name not in drives:
            memo[name] = Fraction(0)
        else:
            raw = ref_tree_score(drives[name], score, widths, state,
                                 name in state, widths[name])
            memo[name] = min(raw, Fraction(widths[name]))
        return memo[name]

    return {name: score(name) for name in widths}


# ---- observability ----

def _weights_expr(e: Expr, factor: Fraction, widths: dict[str, int],
                  state: set[str], sequential: bool, acc: dict[str, Fraction]):
    """Max backward-transmission weight per referenced signal; a consumer
    observed with per-bit sigma transmits sigma * weight to each signal."""

    def bump(name: str, weight: Fraction):
        if sequential and name in state:
            return
        if weight > acc.get(name, Fraction(0)):
            acc[name] = weight

    if isinstance(e, Const):
        return
    if isinstance(e, SignalRef):
        bump(e.name, factor * widths[e.name])
    elif isinstance(e, BitSelect):
        bump(e.base, factor)
    elif isinstance(e, PartSelect):
        bump(e.base, factor * (e.msb - e.lsb + 1))
    elif isinstance(e, Unary):
        _weights_expr(e.operand, factor, widths, state, sequential, acc)
    elif isinstance(e, Binary):
        if e.op in SHIFT:
            n = ref_width(e.lhs, widths)
            _weights_expr(e.lhs, factor * (n - 1) / n, widths, state,
                          sequential, acc)
        elif e.op in COMPARE and isinstance(e.lhs, Const):
            _weights_expr(e.rhs, factor, widths, state, sequential, acc)
        elif e.op in COMPARE and isinstance(e.rhs, Const):
            _weights_expr(e.lhs, factor, widths, state, sequential, acc)
        else:
            _weights_expr(e.lhs, factor / 2, widths, state, sequential, acc)
            _weights_expr(e.rhs, factor / 2, widths, state, sequential, acc)
    elif isinstance(e, Ternary):
        _weights_expr(e.then, factor / 2, widths, state, sequential, acc)
        _weights_expr(e.other, factor / 2, widths, state, sequential, acc)
    elif isinstance(e, Concat):
        for p in e.parts:
            _weights_expr(p, factor, widths, state, sequential, acc)
    else:
        raise TypeError(e)


def _weights_tree(tree: DriveTree, factor: Fraction, widths: dict[str, int],
                  state: set[str], sequential: bool, acc: dict[str, Fraction]):
    if isinstance(tree, (Hold,)):
        return
    if isinstance(tree, Leaf):
        _weights_expr(tree.expr, factor, widths, state, sequential, acc)
    elif isinstance(tree, Cond):
        _weights_tree(tree.then, factor / 2, widths, state, sequential, acc)
        _weights_tree(tree.other, factor / 2, widths, state, sequential, acc)
    elif isinstance(tree, CaseK):
        share = factor / len(tree.branches)
        for b in tree.branches:
            _weights_tree(b, share, widths, state, sequential, acc)


def ref_po(widths: dict[str, int], state: set[str], drives: dict[str, DriveTree],
           observed: set[str]) -> dict[str, Fraction]:
    """Demand-driven observability: max over consumers of transmitted scores."""
    weights: dict[str, dict[str, Fraction]] = {}
    for consumer, tree in drives.items():
        acc: dict[str, Fraction] = {}
        _weights_tree(tree, Fraction(1), widths, state, consumer in state, acc)
        weights[consumer] = acc

    memo: dict[str, Fraction] = {}

    def po(name: str) -> Fraction:
        if name in memo:
            return memo[name]
        if name in observed:
            memo[name] = Fraction(widths[name])
            return memo[name]
        memo[name] = Fraction(0)    # cycle guard; model orders are acyclic
        best = Fraction(0)
        for consumer, acc in weights.items():
            if name in acc:
                transmitted = po(consumer) / widths[consumer] * acc[name]
                best = max(best, transmitted)
        memo[name] = min(best, Fraction(widths[name]))
        return memo[name]

    return {name: po(name) for name in widths}
