"""AST node types for the parsed subset, plus a source printer.

Source positions live on statement/item nodes as compare-excluded fields, so
two structurally identical parses compare equal regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# ---- expressions ----

class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: int
    width: int


@dataclass(frozen=True)
class SignalRef(Expr):
    name: str
    index: Expr | None = None   # set for array element references


@dataclass(frozen=True)
class BitSelect(Expr):
    base: str
    index: Expr


@dataclass(frozen=True)
class PartSelect(Expr):
    base: str
    msb: int
    lsb: int


@dataclass(frozen=True)
class Unary(Expr):
    op: str                     # ! ~
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Ternary(Expr):
    select: Expr
    then: Expr
    other: Expr


@dataclass(frozen=True)
class Concat(Expr):
    parts: tuple[Expr, ...]


# ---- statements ----

@dataclass(frozen=True)
class LValue:
    name: str
    index: Expr | None = None


class Stmt:
    """Base class for procedural statements."""

    __slots__ = ()


@dataclass(frozen=True)
class Assign(Stmt):
    target: LValue
    rhs: Expr
    blocking: bool
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then_body: tuple[Stmt, ...]
    else_body: tuple[Stmt, ...] = ()
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CaseArm:
    label: int
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class Case(Stmt):
    select: Expr
    arms: tuple[CaseArm, ...]
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class For(Stmt):
    var: str
    init: int
    bound: int                  # loop runs while var < bound
    step: int
    body: tuple[Stmt, ...]
    line: int | None = field(default=None, compare=False)


# ---- module structure ----

@dataclass(frozen=True)
class PortDecl:
    name: str
    direction: str              # input | output
    width: int
    is_clock: bool = False      # named as the clock of an edge-triggered block
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class NetDecl:
    name: str
    width: int
    length: int = 1             # unpacked array length, 1 = scalar
    kind: str = "wire"          # wire | reg
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ContinuousAssign:
    target: LValue
    rhs: Expr
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AlwaysBlock:
    kind: str                   # sequential | combinational
    clock: str | None
    body: tuple[Stmt, ...]
    line: int | None = field(default=None, compare=False)


Item = ContinuousAssign | AlwaysBlock


@dataclass(frozen=True)
class SourceModule:
    name: str
    ports: tuple[PortDecl, ...]
    nets: tuple[NetDecl, ...]
    items: tuple[Item, ...]


# ---- constant folding ----

def const_eval(e: Expr) -> int | None:
    """Fold an expression to an integer, or None if it is not constant."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Binary):
        lhs = const_eval(e.lhs)
        rhs = const_eval(e.rhs)
        if lhs is None or rhs is None:
            return None
        if e.op == "+":
            return lhs + rhs
        if e.op == "-":
            return lhs - rhs
        if e.op == "<<":
            return lhs << rhs
        if e.op == ">>":
            return lhs >> rhs
    return None


# ---- source printing ----

def expr_to_source(e: Expr) -> str:
    """Render an expression; sub-expressions are parenthesized so the printed
    form re-parses to the same tree independent of precedence."""
    if isinstance(e, Const):
        return f"{e.width}'d{e.value}"
    if isinstance(e, SignalRef):
        if e.index is None:
            return e.name
        return f"{e.name}[{expr_to_source(e.index)}]"
    if isinstance(e, BitSelect):
        return f"{e.base}[{expr_to_source(e.index)}]"
    if isinstance(e, PartSelect):
        return f"{e.base}[{e.msb}:{e.lsb}]"
    if isinstance(e, Unary):
        return f"{e.op}({expr_to_source(e.operand)})"
    if isinstance(e, Binary):
        return f"({expr_to_source(e.lhs)} {e.op} {expr_to_source(e.rhs)})"
    if isinstance(e, Ternary):
        return (f"({expr_to_source(e.select)} ? {expr_to_source(e.then)}"
                f" : {expr_to_source(e.other)})")
    if isinstance(e, Concat):
        return "{" + ", ".join(expr_to_source(p) for p in e.parts) + "}"
    raise TypeError(f"unknown expression node {e!r}")


def _lvalue_to_source(lv: LValue) -> str:
    if lv.index is None:
        return lv.name
    return f"{lv.name}[{expr_to_source(lv.index)}]"


def _stmt_to_source(s: Stmt, indent: str) -> list[str]:
    if isinstance(s, Assign):
        op = "=" if s.blocking else "<="
        return [f"{indent}{_lvalue_to_source(s.target)} {op} {expr_to_source(s.rhs)};"]
    if isinstance(s, If):
        lines = [f"{indent}if ({expr_to_source(s.cond)}) begin"]
        for st in s.then_body:
            lines.extend(_stmt_to_source(st, indent + "  "))
        lines.append(f"{indent}end")
        if s.else_body:
            lines.append(f"{indent}else begin")
            for st in s.else_body:
                lines.extend(_stmt_to_source(st, indent + "  "))
            lines.append(f"{indent}end")
        return lines
    if isinstance(s, Case):
        lines = [f"{indent}case ({expr_to_source(s.select)})"]
        for arm in s.arms:
            lines.append(f"{indent}  {arm.label}: begin")
            for st in arm.body:
                lines.extend(_stmt_to_source(st, indent + "    "))
            lines.append(f"{indent}  end")
        lines.append(f"{indent}endcase")
        return lines
    if isinstance(s, For):
        head = (f"{indent}for ({s.var}={s.init}; {s.var}<{s.bound}; "
                f"{s.var}={s.var}+{s.step}) begin")
        lines = [head]
        for st in s.body:
            lines.extend(_stmt_to_source(st, indent + "  "))
        lines.append(f"{indent}end")
        return lines
    raise TypeError(f"unknown statement node {s!r}")


def module_to_source(module: SourceModule) -> str:
    """Print a module back to parseable source text."""
    lines = [f"module {module.name} ("]
    for i, port in enumerate(module.ports):
        rng = f" [{port.width - 1}:0]" if port.width > 1 else ""
        sep = "," if i < len(module.ports) - 1 else ""
        lines.append(f"  {port.direction} logic{rng} {port.name}{sep}")
    lines.append(");")
    lines.append("")
    for net in module.nets:
        rng = f" [{net.width - 1}:0]" if net.width > 1 else ""
        arr = f" [{net.length - 1}:0]" if net.length > 1 else ""
        lines.append(f"  {net.kind}{rng} {net.name}{arr};")
    if module.nets:
        lines.append("")
    for item in module.items:
        if isinstance(item, ContinuousAssign):
            lines.append(f"  assign {_lvalue_to_source(item.target)} = "
                         f"{expr_to_source(item.rhs)};")
        else:
            trigger = f"@(posedge {item.clock})" if item.kind == "sequential" else "@(*)"
            lines.append(f"  always {trigger} begin")
            for st in item.body:
                lines.extend(_stmt_to_source(st, "    "))
            lines.append("  end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
