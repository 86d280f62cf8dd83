"""Lowering of a parsed module into per-signal drive trees.

The dataflow model materializes unpacked arrays into element signals
(``reglk_mem[0]`` .. ``reglk_mem[5]``), unrolls for loops, and rewrites
procedural blocks into one drive tree per driven signal:

  - an if/else-if chain becomes a nested chain of Cond nodes;
  - a case statement assigning the target in a strict subset of its arms
    becomes, per assigning arm, Cond(guard, value, fallthrough) where the
    guard conjoins the directly enclosing if-condition with
    (select == label);
  - a case statement assigning the target in every arm becomes a CaseK
    node (unlisted select values are not modeled as branches);
  - paths that leave a register unassigned end in Hold, while paths that
    leave a combinational target unassigned resolve to the previously
    assigned expression (a leading default), or are a latch error.

Clock signals (named only in edge sensitivity lists) and loop indices are
kept in the signal list but marked excluded; they are never scored.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .ast_nodes import (Assign, AlwaysBlock, Binary, BitSelect, Case, CaseArm, Concat,
                        Const, ContinuousAssign, Expr, For, If, LValue, PartSelect,
                        SignalRef, SourceModule, Stmt, Ternary, Unary, const_eval)
from .errors import ConfigError, ElabError

MAX_LOOP_ITERATIONS = 4096

_ARITH_OPS = ("+", "-")


# ---- model types ----

@dataclass(frozen=True)
class SignalInfo:
    name: str
    width: int
    kind: str                   # input | output | internal
    is_state: bool = False      # assigned in an edge-triggered block
    excluded: bool = False      # clock or loop index; never scored


class DriveTree:
    """Base class for drive tree nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Leaf(DriveTree):
    expr: Expr


@dataclass(frozen=True)
class Cond(DriveTree):
    select: Expr
    then: DriveTree
    other: DriveTree


@dataclass(frozen=True)
class CaseK(DriveTree):
    select: Expr
    branches: tuple[DriveTree, ...]


@dataclass(frozen=True)
class Hold(DriveTree):
    """The register keeps its previous value on this path."""


@dataclass(frozen=True)
class DataflowModel:
    signals: tuple[SignalInfo, ...]         # display order, excluded ones included
    drives: dict[str, DriveTree]            # driven signal -> tree (inputs absent)
    order: tuple[str, ...]                  # evaluation order over scored signals
    diagnostics: tuple[str, ...] = ()
    _by_name: dict[str, SignalInfo] = field(default=None, repr=False, compare=False)
    _widths: dict[str, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {s.name: s for s in self.signals})
        object.__setattr__(self, "_widths", {s.name: s.width for s in self.signals})

    @property
    def widths(self) -> dict[str, int]:
        return self._widths

    def info(self, name: str) -> SignalInfo:
        return self._by_name[name]

    def width(self, name: str) -> int:
        return self._by_name[name].width

    def is_state(self, name: str) -> bool:
        return self._by_name[name].is_state

    def scored(self) -> tuple[SignalInfo, ...]:
        return tuple(s for s in self.signals if not s.excluded)

    def expand_signal(self, name: str) -> tuple[str, ...]:
        """Resolve a signal or array name to scored element names.

        A plain array name expands to all of its elements.
        """
        info = self._by_name.get(name)
        if info is not None and not info.excluded:
            return (name,)
        elements = [s.name for s in self.signals
                    if not s.excluded and s.name.startswith(name + "[")]
        if elements:
            def index_of(element: str) -> int:
                return int(element[len(name) + 1:-1])
            return tuple(sorted(elements, key=index_of))
        raise ConfigError(f"unknown signal {name!r}")


# ---- expression widths ----

def width_of(e: Expr, widths: dict[str, int]) -> int:
    """Result width of an expression given declared signal widths."""
    if isinstance(e, Const):
        return e.width
    if isinstance(e, SignalRef):
        return widths[e.name]
    if isinstance(e, BitSelect):
        return 1
    if isinstance(e, PartSelect):
        return e.msb - e.lsb + 1
    if isinstance(e, Unary):
        return 1 if e.op == "!" else width_of(e.operand, widths)
    if isinstance(e, Binary):
        if e.op in ("&&", "||", "==", "!=", "<", ">", "<=", ">="):
            return 1
        if e.op in ("<<", ">>"):
            return width_of(e.lhs, widths)
        return max(width_of(e.lhs, widths), width_of(e.rhs, widths))
    if isinstance(e, Ternary):
        return max(width_of(e.then, widths), width_of(e.other, widths))
    if isinstance(e, Concat):
        return sum(width_of(p, widths) for p in e.parts)
    raise TypeError(f"unknown expression node {e!r}")


# ---- loop unrolling ----

def unroll_loops(block: AlwaysBlock) -> AlwaysBlock:
    """Replicate for-loop bodies with the index substituted as a constant."""
    return AlwaysBlock(block.kind, block.clock,
                       tuple(_unroll_stmts(block.body, ())), line=block.line)


def _unroll_stmts(stmts: Iterable[Stmt], active: tuple[str, ...]) -> Iterator[Stmt]:
    for s in stmts:
        if isinstance(s, For):
            if s.var in active:
                raise ElabError(f"loop index {s.var!r} reused by a nested loop")
            if s.step <= 0:
                raise ElabError(f"loop over {s.var!r} must have a positive step")
            values = range(s.init, s.bound, s.step)
            if len(values) > MAX_LOOP_ITERATIONS:
                raise ElabError(
                    f"loop over {s.var!r} exceeds {MAX_LOOP_ITERATIONS} iterations")
            body = tuple(_unroll_stmts(s.body, active + (s.var,)))
            for value in values:
                yield from (_subst_stmt(st, s.var, value) for st in body)
        elif isinstance(s, If):
            yield If(s.cond, tuple(_unroll_stmts(s.then_body, active)),
                     tuple(_unroll_stmts(s.else_body, active)), line=s.line)
        elif isinstance(s, Case):
            yield Case(s.select,
                       tuple(CaseArm(a.label, tuple(_unroll_stmts(a.body, active)))
                             for a in s.arms), line=s.line)
        else:
            yield s


def _subst_stmt(s: Stmt, var: str, value: int) -> Stmt:
    if isinstance(s, Assign):
        if s.target.name == var:
            raise ElabError(f"loop index {var!r} must not be assigned in the body")
        target = LValue(s.target.name,
                        None if s.target.index is None
                        else _subst_expr(s.target.index, var, value))
        return Assign(target, _subst_expr(s.rhs, var, value), s.blocking, line=s.line)
    if isinstance(s, If):
        return If(_subst_expr(s.cond, var, value),
                  tuple(_subst_stmt(st, var, value) for st in s.then_body),
                  tuple(_subst_stmt(st, var, value) for st in s.else_body),
                  line=s.line)
    if isinstance(s, Case):
        return Case(_subst_expr(s.select, var, value),
                    tuple(CaseArm(a.label,
                                  tuple(_subst_stmt(st, var, value) for st in a.body))
                          for a in s.arms), line=s.line)
    raise TypeError(f"unexpected statement {s!r} during substitution")


def _subst_expr(e: Expr, var: str, value: int) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, SignalRef):
        if e.name == var:
            if e.index is not None:
                raise ElabError(f"loop index {var!r} cannot be indexed")
            return Const(value, 32)
        if e.index is None:
            return e
        return SignalRef(e.name, _subst_expr(e.index, var, value))
    if isinstance(e, BitSelect):
        return BitSelect(e.base, _subst_expr(e.index, var, value))
    if isinstance(e, PartSelect):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, _subst_expr(e.operand, var, value))
    if isinstance(e, Binary):
        return Binary(e.op, _subst_expr(e.lhs, var, value),
                      _subst_expr(e.rhs, var, value))
    if isinstance(e, Ternary):
        return Ternary(_subst_expr(e.select, var, value),
                       _subst_expr(e.then, var, value),
                       _subst_expr(e.other, var, value))
    if isinstance(e, Concat):
        return Concat(tuple(_subst_expr(p, var, value) for p in e.parts))
    raise TypeError(f"unknown expression node {e!r}")


# ---- element resolution ----

class _Symbols:
    """Declared names with widths/array lengths, shared by the lowering passes."""

    def __init__(self, module: SourceModule):
        self.widths: dict[str, int] = {}
        self.lengths: dict[str, int] = {}
        self.directions: dict[str, str] = {}
        for p in module.ports:
            self.widths[p.name] = p.width
            self.lengths[p.name] = 1
            self.directions[p.name] = p.direction
        for n in module.nets:
            self.widths[n.name] = n.width
            self.lengths[n.name] = n.length

    def element_widths(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for name, width in self.widths.items():
            if self.lengths[name] == 1:
                out[name] = width
            else:
                for i in range(self.lengths[name]):
                    out[f"{name}[{i}]"] = width
        return out

    def element_name(self, name: str, index: Expr | None) -> str:
        if name not in self.widths:
            raise ElabError(f"undeclared signal {name!r}")
        if self.lengths[name] == 1:
            if index is not None:
                raise ElabError(f"{name!r} is not an array")
            return name
        if index is None:
            raise ElabError(f"array {name!r} referenced without an index")
        value = const_eval(index)
        if value is None:
            raise ElabError(f"non-constant index into array {name!r}")
        if not 0 <= value < self.lengths[name]:
            raise ElabError(f"index {value} out of range for array {name!r}")
        return f"{name}[{value}]"


def _resolve_expr(e: Expr, symbols: _Symbols) -> Expr:
    """Rewrite array element references to flat element signal names."""
    if isinstance(e, (Const, PartSelect)):
        return e
    if isinstance(e, SignalRef):
        return SignalRef(symbols.element_name(e.name, e.index))
    if isinstance(e, BitSelect):
        return BitSelect(e.base, _resolve_expr(e.index, symbols))
    if isinstance(e, Unary):
        return Unary(e.op, _resolve_expr(e.operand, symbols))
    if isinstance(e, Binary):
        return Binary(e.op, _resolve_expr(e.lhs, symbols),
                      _resolve_expr(e.rhs, symbols))
    if isinstance(e, Ternary):
        return Ternary(_resolve_expr(e.select, symbols),
                       _resolve_expr(e.then, symbols),
                       _resolve_expr(e.other, symbols))
    if isinstance(e, Concat):
        return Concat(tuple(_resolve_expr(p, symbols) for p in e.parts))
    raise TypeError(f"unknown expression node {e!r}")


# lowered statements: assignment targets are flat element names
@dataclass(frozen=True)
class _LAssign:
    target: str
    rhs: Expr


@dataclass(frozen=True)
class _LIf:
    cond: Expr
    then_body: tuple[Any, ...]
    else_body: tuple[Any, ...]


@dataclass(frozen=True)
class _LCaseArm:
    label: int
    body: tuple[Any, ...]


@dataclass(frozen=True)
class _LCase:
    select: Expr
    arms: tuple[_LCaseArm, ...]


def _lower_stmts(stmts: Iterable[Stmt], symbols: _Symbols) -> tuple[Any, ...]:
    out = []
    for s in stmts:
        if isinstance(s, Assign):
            target = symbols.element_name(s.target.name, s.target.index)
            out.append(_LAssign(target, _resolve_expr(s.rhs, symbols)))
        elif isinstance(s, If):
            out.append(_LIf(_resolve_expr(s.cond, symbols),
                            _lower_stmts(s.then_body, symbols),
                            _lower_stmts(s.else_body, symbols)))
        elif isinstance(s, Case):
            out.append(_LCase(_resolve_expr(s.select, symbols),
                              tuple(_LCaseArm(a.label, _lower_stmts(a.body, symbols))
                                    for a in s.arms)))
        else:
            raise TypeError(f"unexpected statement {s!r} after unrolling")
    return tuple(out)


# ---- procedural rewriting ----

class _NoDefault:
    """Sentinel fallthrough for combinational targets without a default."""


_NO_DEFAULT = _NoDefault()


def _assigns_target(stmts: Iterable[Any], target: str) -> bool:
    for s in stmts:
        if isinstance(s, _LAssign) and s.target == target:
            return True
        if isinstance(s, _LIf) and (_assigns_target(s.then_body, target)
                                    or _assigns_target(s.else_body, target)):
            return True
        if isinstance(s, _LCase) and any(_assigns_target(a.body, target)
                                         for a in s.arms):
            return True
    return False


def _rewrite_stmts(stmts: tuple[Any, ...], target: str, incoming) -> Any:
    tree = incoming
    for s in stmts:
        tree = _rewrite_stmt(s, target, tree)
    return tree


def _require(tree, target: str):
    if isinstance(tree, _NoDefault):
        raise ElabError(f"{target!r} is not assigned on every path "
                        "(latch inference is not supported)")
    return tree


def _case_guard_chain(case: _LCase, target: str, incoming,
                      enclosing: Expr | None) -> Any:
    """Rewrite the assigning arms of a partially-assigning case into a chain
    of Cond nodes guarded by ``enclosing && (select == label)``."""
    tree = incoming
    assigning = [a for a in case.arms if _assigns_target(a.body, target)]
    for arm in reversed(assigning):
        compare = Binary("==", case.select, Const(arm.label, 32))
        guard = compare if enclosing is None else Binary("&&", enclosing, compare)
        tree = Cond(guard, _rewrite_stmts(arm.body, target, incoming),
                    _require(tree, target))
    return tree


def _rewrite_stmt(s: Any, target: str, incoming) -> Any:
    if isinstance(s, _LAssign):
        return Leaf(s.rhs) if s.target == target else incoming

    if isinstance(s, _LIf):
        then_hits = _assigns_target(s.then_body, target)
        else_hits = _assigns_target(s.else_body, target)
        if not then_hits and not else_hits:
            return incoming
        if then_hits and not else_hits:
            # a then-arm holding exactly one relevant statement, a partially
            # assigning case, folds its condition into the case guards
            relevant = [st for st in s.then_body if _assigns_target((st,), target)]
            if len(relevant) == 1 and isinstance(relevant[0], _LCase):
                case = relevant[0]
                assigning = sum(_assigns_target(a.body, target) for a in case.arms)
                if 0 < assigning < len(case.arms):
                    return _case_guard_chain(case, target, incoming, s.cond)
        return Cond(s.cond,
                    _require(_rewrite_stmts(s.then_body, target, incoming), target),
                    _require(_rewrite_stmts(s.else_body, target, incoming), target))

    if isinstance(s, _LCase):
        assigning = [a for a in s.arms if _assigns_target(a.body, target)]
        if not assigning:
            return incoming
        if len(assigning) == len(s.arms):
            return CaseK(s.select,
                         tuple(_require(_rewrite_stmts(a.body, target, incoming),
                                        target)
                               for a in s.arms))
        return _case_guard_chain(s, target, incoming, None)

    raise TypeError(f"unexpected lowered statement {s!r}")


def rewrite_sequential(block: AlwaysBlock, target: str,
                       module: SourceModule) -> DriveTree:
    """Drive tree of one register target of an edge-triggered block."""
    symbols = _Symbols(module)
    stmts = _lower_stmts(unroll_loops(block).body, symbols)
    if not _assigns_target(stmts, target):
        raise ElabError(f"{target!r} is not assigned in this block")
    return _rewrite_stmts(stmts, target, Hold())


def rewrite_combinational(block: AlwaysBlock, target: str,
                          module: SourceModule) -> DriveTree:
    """Drive tree of one target of an always @(*) block; last assignment wins."""
    symbols = _Symbols(module)
    stmts = _lower_stmts(unroll_loops(block).body, symbols)
    if not _assigns_target(stmts, target):
        raise ElabError(f"{target!r} is not assigned in this block")
    return _require(_rewrite_stmts(stmts, target, _NO_DEFAULT), target)


# ---- dependency order ----

def tree_references(tree: DriveTree) -> Iterator[str]:
    """All signal names read anywhere in a drive tree."""
    if isinstance(tree, Leaf):
        yield from expr_references(tree.expr)
    elif isinstance(tree, Cond):
        yield from expr_references(tree.select)
        yield from tree_references(tree.then)
        yield from tree_references(tree.other)
    elif isinstance(tree, CaseK):
        yield from expr_references(tree.select)
        for b in tree.branches:
            yield from tree_references(b)


def expr_references(e: Expr) -> Iterator[str]:
    if isinstance(e, SignalRef):
        yield e.name
    elif isinstance(e, BitSelect):
        yield e.base
        yield from expr_references(e.index)
    elif isinstance(e, PartSelect):
        yield e.base
    elif isinstance(e, Unary):
        yield from expr_references(e.operand)
    elif isinstance(e, Binary):
        yield from expr_references(e.lhs)
        yield from expr_references(e.rhs)
    elif isinstance(e, Ternary):
        yield from expr_references(e.select)
        yield from expr_references(e.then)
        yield from expr_references(e.other)
    elif isinstance(e, Concat):
        for p in e.parts:
            yield from expr_references(p)


def evaluation_order(signals: Iterable[SignalInfo],
                     drives: dict[str, DriveTree]) -> tuple[str, ...]:
    """Topological order for a single scoring pass.

    Reads of state signals inside their consumers' sequential drive trees
    are not dependency edges (those references score zero), so
    register-to-register references never form cycles. Any remaining cycle
    is an error.
    """
    infos = {s.name: s for s in signals if not s.excluded}
    edges: dict[str, set[str]] = {name: set() for name in infos}
    for name, tree in drives.items():
        if name not in infos:
            continue
        sequential = infos[name].is_state
        for ref in tree_references(tree):
            if ref not in infos:
                raise ElabError(f"{name!r} reads excluded or unknown signal {ref!r}")
            if sequential and infos[ref].is_state:
                continue
            edges[ref].add(name)

    indegree = {name: 0 for name in infos}
    for _, consumers in edges.items():
        for c in consumers:
            indegree[c] += 1
    ready = [name for name, d in sorted(indegree.items()) if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        for consumer in sorted(edges[name]):
            indegree[consumer] -= 1
            if indegree[consumer] == 0:
                heapq.heappush(ready, consumer)
    if len(order) != len(infos):
        stuck = sorted(name for name, d in indegree.items() if d > 0)
        if all(not infos[name].is_state for name in stuck):
            raise ElabError(f"combinational cycle through {', '.join(stuck)}")
        raise ElabError("cyclic dependency through registers involving "
                        f"{', '.join(stuck)} (single-pass scoring cannot order it)")
    return tuple(order)


# ---- elaboration ----

def elaborate(module: SourceModule) -> DataflowModel:
    """Build the per-signal dataflow model for a parsed module."""
    symbols = _Symbols(module)
    element_widths = symbols.element_widths()

    loop_vars = set(_loop_vars(module))
    referenced = set(_referenced_names(module))
    clocks = {item.clock for item in module.items
              if isinstance(item, AlwaysBlock) and item.clock is not None}
    excluded = loop_vars | {c for c in clocks if c not in referenced}

    drives: dict[str, DriveTree] = {}
    drivers: dict[str, str] = {}

    def claim(target: str, driver: str) -> None:
        if target in drivers:
            raise ElabError(f"multiple drivers for {target!r} "
                            f"({drivers[target]} and {driver})")
        drivers[target] = driver

    state: set[str] = set()
    for item in module.items:
        if isinstance(item, ContinuousAssign):
            target = symbols.element_name(item.target.name, item.target.index)
            claim(target, f"assign at line {item.line}")
            drives[target] = Leaf(_resolve_expr(item.rhs, symbols))
        else:
            unrolled = unroll_loops(item)
            lowered = _lower_stmts(unrolled.body, symbols)
            targets = sorted(t for t in element_widths
                             if _assigns_target(lowered, t))
            where = f"always block at line {item.line}"
            if item.kind == "sequential":
                for target in targets:
                    claim(target, where)
                    state.add(target)
                for target in targets:
                    drives[target] = _rewrite_stmts(lowered, target, Hold())
            else:
                for target in targets:
                    claim(target, where)
                for target in targets:
                    drives[target] = _require(
                        _rewrite_stmts(lowered, target, _NO_DEFAULT), target)

    for target in drives:
        base = target.split("[")[0]
        if base in excluded:
            raise ElabError(f"excluded signal {base!r} must not be driven")

    signals = _signal_list(module, symbols, state, excluded, drives)
    order = evaluation_order(signals, drives)
    diagnostics = _collect_diagnostics(drives)
    return DataflowModel(signals, drives, order, diagnostics)


def _signal_list(module: SourceModule, symbols: _Symbols, state: set[str],
                 excluded: set[str],
                 drives: dict[str, DriveTree]) -> tuple[SignalInfo, ...]:
    """Display order: input ports, internal nets (arrays expanded), output ports."""
    def expand(name: str, width: int, kind: str) -> Iterator[SignalInfo]:
        length = symbols.lengths[name]
        names = [name] if length == 1 else [f"{name}[{i}]" for i in range(length)]
        for n in names:
            yield SignalInfo(n, width, kind, is_state=n in state,
                             excluded=name in excluded)

    inputs: list[SignalInfo] = []
    outputs: list[SignalInfo] = []
    for p in module.ports:
        target = inputs if p.direction == "input" else outputs
        target.extend(expand(p.name, p.width, p.direction))
    internals: list[SignalInfo] = []
    for n in module.nets:
        internals.extend(expand(n.name, n.width, "internal"))

    signals = tuple(inputs + internals + outputs)
    for s in signals:
        if s.kind != "input" and not s.excluded and s.name not in drives:
            raise ElabError(f"{s.name!r} is never driven")
    return signals


def _loop_vars(module: SourceModule) -> Iterator[str]:
    def walk(stmts: Iterable[Stmt]) -> Iterator[str]:
        for s in stmts:
            if isinstance(s, For):
                yield s.var
                yield from walk(s.body)
            elif isinstance(s, If):
                yield from walk(s.then_body)
                yield from walk(s.else_body)
            elif isinstance(s, Case):
                for a in s.arms:
                    yield from walk(a.body)
    for item in module.items:
        if isinstance(item, AlwaysBlock):
            yield from walk(item.body)


def _referenced_names(module: SourceModule) -> Iterator[str]:
    """Base names referenced anywhere outside sensitivity lists and for-control."""
    def expr_names(e: Expr) -> Iterator[str]:
        if isinstance(e, SignalRef):
            yield e.name
            if e.index is not None:
                yield from expr_names(e.index)
        elif isinstance(e, BitSelect):
            yield e.base
            yield from expr_names(e.index)
        elif isinstance(e, PartSelect):
            yield e.base
        elif isinstance(e, Unary):
            yield from expr_names(e.operand)
        elif isinstance(e, Binary):
            yield from expr_names(e.lhs)
            yield from expr_names(e.rhs)
        elif isinstance(e, Ternary):
            yield from expr_names(e.select)
            yield from expr_names(e.then)
            yield from expr_names(e.other)
        elif isinstance(e, Concat):
            for p in e.parts:
                yield from expr_names(p)

    def walk(stmts: Iterable[Stmt]) -> Iterator[str]:
        for s in stmts:
            if isinstance(s, Assign):
                yield s.target.name
                if s.target.index is not None:
                    yield from expr_names(s.target.index)
                yield from expr_names(s.rhs)
            elif isinstance(s, If):
                yield from expr_names(s.cond)
                yield from walk(s.then_body)
                yield from walk(s.else_body)
            elif isinstance(s, Case):
                yield from expr_names(s.select)
                for a in s.arms:
                    yield from walk(a.body)
            elif isinstance(s, For):
                yield from walk(s.body)

    for item in module.items:
        if isinstance(item, ContinuousAssign):
            yield item.target.name
            if item.target.index is not None:
                yield from expr_names(item.target.index)
            yield from expr_names(item.rhs)
        else:
            yield from walk(item.body)


def _collect_diagnostics(drives: dict[str, DriveTree]) -> tuple[str, ...]:
    """Warnings for operators whose scores are heuristic approximations."""
    notes: set[str] = set()

    def walk_expr(e: Expr, target: str) -> None:
        if isinstance(e, Binary):
            if e.op in _ARITH_OPS:
                notes.add(f"warning: arithmetic operator {e.op!r} in the drive of "
                          f"{target!r} is scored with the two-input averaging rule")
            walk_expr(e.lhs, target)
            walk_expr(e.rhs, target)
        elif isinstance(e, Unary):
            walk_expr(e.operand, target)
        elif isinstance(e, Ternary):
            walk_expr(e.select, target)
            walk_expr(e.then, target)
            walk_expr(e.other, target)
        elif isinstance(e, Concat):
            for p in e.parts:
                walk_expr(p, target)
        elif isinstance(e, BitSelect):
            walk_expr(e.index, target)

    def walk_tree(tree: DriveTree, target: str) -> None:
        if isinstance(tree, Leaf):
            walk_expr(tree.expr, target)
        elif isinstance(tree, Cond):
            walk_expr(tree.select, target)
            walk_tree(tree.then, target)
            walk_tree(tree.other, target)
        elif isinstance(tree, CaseK):
            walk_expr(tree.select, target)
            for b in tree.branches:
                walk_tree(b, target)

    for target, tree in sorted(drives.items()):
        walk_tree(tree, target)
    return tuple(sorted(notes))


# ---- JSON serialization ----

def expr_to_json(e: Expr) -> dict:
    if isinstance(e, Const):
        return {"expr": "const", "value": e.value, "width": e.width}
    if isinstance(e, SignalRef):
        return {"expr": "ref", "name": e.name}
    if isinstance(e, BitSelect):
        return {"expr": "bit", "base": e.base, "index": expr_to_json(e.index)}
    if isinstance(e, PartSelect):
        return {"expr": "part", "base": e.base, "msb": e.msb, "lsb": e.lsb}
    if isinstance(e, Unary):
        return {"expr": "unary", "op": e.op, "operand": expr_to_json(e.operand)}
    if isinstance(e, Binary):
        return {"expr": "binary", "op": e.op, "lhs": expr_to_json(e.lhs),
                "rhs": expr_to_json(e.rhs)}
    if isinstance(e, Ternary):
        return {"expr": "ternary", "select": expr_to_json(e.select),
                "then": expr_to_json(e.then), "else": expr_to_json(e.other)}
    if isinstance(e, Concat):
        return {"expr": "concat", "parts": [expr_to_json(p) for p in e.parts]}
    raise TypeError(f"unknown expression node {e!r}")


def expr_from_json(data: dict) -> Expr:
    kind = data["expr"]
    if kind == "const":
        return Const(data["value"], data["width"])
    if kind == "ref":
        return SignalRef(data["name"])
    if kind == "bit":
        return BitSelect(data["base"], expr_from_json(data["index"]))
    if kind == "part":
        return PartSelect(data["base"], data["msb"], data["lsb"])
    if kind == "unary":
        return Unary(data["op"], expr_from_json(data["operand"]))
    if kind == "binary":
        return Binary(data["op"], expr_from_json(data["lhs"]),
                      expr_from_json(data["rhs"]))
    if kind == "ternary":
        return Ternary(expr_from_json(data["select"]), expr_from_json(data["then"]),
                       expr_from_json(data["else"]))
    if kind == "concat":
        return Concat(tuple(expr_from_json(p) for p in data["parts"]))
    raise ValueError(f"unknown expression kind {kind!r}")


def tree_to_json(tree: DriveTree) -> dict:
    if isinstance(tree, Leaf):
        return {"node": "leaf", "expr": expr_to_json(tree.expr)}
    if isinstance(tree, Cond):
        return {"node": "cond", "select": expr_to_json(tree.select),
                "then": tree_to_json(tree.then), "else": tree_to_json(tree.other)}
    if isinstance(tree, CaseK):
        return {"node": "case", "select": expr_to_json(tree.select),
                "branches": [tree_to_json(b) for b in tree.branches]}
    if isinstance(tree, Hold):
        return {"node": "hold"}
    raise TypeError(f"unknown drive tree node {tree!r}")


def tree_from_json(data: dict) -> DriveTree:
    node = data["node"]
    if node == "leaf":
        return Leaf(expr_from_json(data["expr"]))
    if node == "cond":
        return Cond(expr_from_json(data["select"]), tree_from_json(data["then"]),
                    tree_from_json(data["else"]))
    if node == "case":
        return CaseK(expr_from_json(data["select"]),
                     tuple(tree_from_json(b) for b in data["branches"]))
    if node == "hold":
        return Hold()
    raise ValueError(f"unknown drive tree node kind {node!r}")


def model_to_json(model: DataflowModel) -> dict:
    return {
        "signals": [
            {"name": s.name, "width": s.width, "kind": s.kind,
             "state": s.is_state, "excluded": s.excluded}
            for s in model.signals
        ],
        "drives": {name: tree_to_json(tree)
                   for name, tree in sorted(model.drives.items())},
    }


def model_from_json(data: dict) -> DataflowModel:
    signals = tuple(
        SignalInfo(s["name"], s["width"], s["kind"], s.get("state", False),
                   s.get("excluded", False))
        for s in data["signals"]
    )
    drives = {name: tree_from_json(tree) for name, tree in data["drives"].items()}
    order = evaluation_order(signals, drives)
    return DataflowModel(signals, drives, order, _collect_diagnostics(drives))
