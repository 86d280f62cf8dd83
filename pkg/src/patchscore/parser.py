"""Recursive-descent parser for a synthesizable SystemVerilog subset.

Supported constructs:
  - One module per file, ANSI port list
  - wire / reg / logic / integer declarations, 1-D packed widths,
    1-D unpacked arrays
  - assign (continuous assignment)
  - always @(posedge clk), always @(*)
  - if / else-if / else, case with distinct integer-constant labels,
    for loops of the exact shape  for (i=INIT; i<BOUND; i=i+STEP)
  - Expressions: logical, bitwise, comparison, shift, +/-, ternary,
    concatenation, bit-select, part-select

Anything else raises UnsupportedConstruct with a source position.
Identifiers must be declared before use; the parser resolves each
reference against the declarations seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast_nodes import (Assign, AlwaysBlock, BitSelect, Binary, Case, CaseArm, Concat,
                        Const, ContinuousAssign, Expr, For, If, Item, LValue, NetDecl,
                        PartSelect, PortDecl, SignalRef, SourceModule, Stmt, Ternary,
                        Unary, const_eval)
from .errors import ParseError, UnsupportedConstruct
from .lexer import Token, TokenKind, literal_value, tokenize

# binary operators from loosest to tightest binding; all left-associative
_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^", "~^", "^~"),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
)

_UNSUPPORTED_KEYWORDS = {
    "function": "functions", "endfunction": "functions",
    "task": "tasks", "endtask": "tasks",
    "generate": "generate blocks", "endgenerate": "generate blocks",
    "genvar": "generate blocks", "initial": "initial blocks",
    "parameter": "parameters", "localparam": "parameters",
    "inout": "inout ports", "default": "case default arms",
    "negedge": "negedge sensitivity",
    "interface": "interfaces", "endinterface": "interfaces",
    "modport": "interfaces", "typedef": "type declarations",
    "struct": "structured types", "enum": "structured types",
}


@dataclass
class _Symbol:
    name: str
    width: int
    length: int     # 1 for scalars
    is_port: bool
    direction: str | None


class Parser:
    """Parses one module declaration from a token stream."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.symbols: dict[str, _Symbol] = {}
        self.clocks: set[str] = set()

    # ---- token navigation ----

    def _cur(self) -> Token:
        return self.tokens[self.pos]

    def _at(self, kind: TokenKind, text: str | None = None) -> bool:
        tok = self._cur()
        return tok.kind == kind and (text is None or tok.text == text)

    def _at_keyword(self, *names: str) -> bool:
        tok = self._cur()
        return tok.kind == TokenKind.KEYWORD and tok.text in names

    def _eat(self, kind: TokenKind, text: str | None = None) -> Token:
        tok = self._cur()
        if tok.kind != kind or (text is not None and tok.text != text):
            expected = (text,) if text is not None else (kind.name.lower(),)
            raise ParseError(f"unexpected {self._describe(tok)}", tok.line, tok.column,
                             expected=expected)
        self.pos += 1
        return tok

    def _eat_if(self, kind: TokenKind, text: str | None = None) -> Token | None:
        if self._at(kind, text):
            return self._eat(kind, text)
        return None

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == TokenKind.EOF else repr(tok.text)

    def _fail_unsupported(self, what: str) -> None:
        tok = self._cur()
        raise UnsupportedConstruct(f"{what} are not supported", tok.line, tok.column)

    def _check_unsupported_keyword(self) -> None:
        tok = self._cur()
        if tok.kind == TokenKind.KEYWORD and tok.text in _UNSUPPORTED_KEYWORDS:
            self._fail_unsupported(_UNSUPPORTED_KEYWORDS[tok.text])

    # ---- symbol table ----

    def _declare(self, name: str, width: int, length: int, is_port: bool,
                 direction: str | None, tok: Token) -> None:
        if name in self.symbols:
            raise ParseError(f"{name!r} is already declared", tok.line, tok.column)
        self.symbols[name] = _Symbol(name, width, length, is_port, direction)

    def _lookup(self, tok: Token) -> _Symbol:
        sym = self.symbols.get(tok.text)
        if sym is None:
            raise ParseError(f"undeclared identifier {tok.text!r}", tok.line, tok.column)
        return sym

    # ---- module ----

    def parse_module(self) -> SourceModule:
        self._check_unsupported_keyword()
        self._eat(TokenKind.KEYWORD, "module")
        name = self._eat(TokenKind.IDENTIFIER).text
        ports = self._parse_port_list()
        self._eat(TokenKind.PUNCT, ";")

        nets: list[NetDecl] = []
        items: list[Item] = []
        while not self._at_keyword("endmodule"):
            if self._at(TokenKind.EOF):
                tok = self._cur()
                raise ParseError("unexpected end of input", tok.line, tok.column,
                                 expected=("endmodule",))
            self._check_unsupported_keyword()
            if self._at_keyword("wire", "reg", "logic", "integer"):
                nets.extend(self._parse_net_decl())
            elif self._at_keyword("assign"):
                items.append(self._parse_continuous_assign())
            elif self._at_keyword("always"):
                items.append(self._parse_always())
            else:
                tok = self._cur()
                raise ParseError(f"unexpected {self._describe(tok)} in module body",
                                 tok.line, tok.column,
                                 expected=("declaration", "assign", "always"))
        self._eat(TokenKind.KEYWORD, "endmodule")
        if not self._at(TokenKind.EOF):
            tok = self._cur()
            raise ParseError(f"unexpected {self._describe(tok)} after endmodule",
                             tok.line, tok.column)

        ports_out = tuple(
            PortDecl(p.name, p.direction, p.width, is_clock=p.name in self.clocks,
                     line=p.line)
            for p in ports
        )
        return SourceModule(name, ports_out, tuple(nets), tuple(items))

    def _parse_port_list(self) -> list[PortDecl]:
        self._eat(TokenKind.PUNCT, "(")
        ports: list[PortDecl] = []
        direction: str | None = None
        width = 1
        while not self._at(TokenKind.PUNCT, ")"):
            self._check_unsupported_keyword()
            if self._at_keyword("input", "output"):
                direction = self._eat(TokenKind.KEYWORD).text
                if self._at_keyword("wire", "reg", "logic"):
                    self._eat(TokenKind.KEYWORD)
                width = self._parse_packed_range()
            elif direction is None:
                tok = self._cur()
                raise UnsupportedConstruct("non-ANSI port lists are not supported",
                                           tok.line, tok.column)
            tok = self._eat(TokenKind.IDENTIFIER)
            if self._at(TokenKind.PUNCT, "["):
                self._fail_unsupported("unpacked-array ports")
            self._declare(tok.text, width, 1, True, direction, tok)
            ports.append(PortDecl(tok.text, direction, width, line=tok.line))
            if not self._eat_if(TokenKind.PUNCT, ","):
                break
        self._eat(TokenKind.PUNCT, ")")
        return ports

    def _parse_packed_range(self) -> int:
        """Parse an optional packed range [msb:0]; returns the width in bits."""
        if not self._at(TokenKind.PUNCT, "["):
            return 1
        open_tok = self._eat(TokenKind.PUNCT, "[")
        msb = self._parse_const_int("packed range bound")
        self._eat(TokenKind.OP, ":")
        lsb = self._parse_const_int("packed range bound")
        self._eat(TokenKind.PUNCT, "]")
        if lsb != 0 or msb < 0:
            raise UnsupportedConstruct("packed ranges must be of the form [msb:0]",
                                       open_tok.line, open_tok.column)
        return msb + 1

    def _parse_net_decl(self) -> list[NetDecl]:
        kw = self._eat(TokenKind.KEYWORD)
        if kw.text == "integer":
            width = 32
            kind = "reg"
        else:
            kind = "wire" if kw.text == "wire" else "reg"
            width = self._parse_packed_range()
        decls: list[NetDecl] = []
        while True:
            tok = self._eat(TokenKind.IDENTIFIER)
            length = 1
            if self._at(TokenKind.PUNCT, "["):
                open_tok = self._eat(TokenKind.PUNCT, "[")
                hi = self._parse_const_int("array bound")
                self._eat(TokenKind.OP, ":")
                lo = self._parse_const_int("array bound")
                self._eat(TokenKind.PUNCT, "]")
                if min(hi, lo) != 0:
                    raise UnsupportedConstruct(
                        "unpacked array ranges must start at 0",
                        open_tok.line, open_tok.column)
                length = max(hi, lo) + 1
            if self._at(TokenKind.OP, "="):
                self._fail_unsupported("declaration initializers")
            self._declare(tok.text, width, length, False, None, tok)
            decls.append(NetDecl(tok.text, width, length, kind, line=tok.line))
            if not self._eat_if(TokenKind.PUNCT, ","):
                break
        self._eat(TokenKind.PUNCT, ";")
        return decls

    # ---- module items ----

    def _parse_continuous_assign(self) -> ContinuousAssign:
        kw = self._eat(TokenKind.KEYWORD, "assign")
        target = self._parse_lvalue()
        self._eat(TokenKind.OP, "=")
        rhs = self.parse_expr()
        self._eat(TokenKind.PUNCT, ";")
        return ContinuousAssign(target, rhs, line=kw.line)

    def _parse_always(self) -> AlwaysBlock:
        kw = self._eat(TokenKind.KEYWORD, "always")
        self._eat(TokenKind.PUNCT, "@")
        kind = "combinational"
        clock: str | None = None
        if self._eat_if(TokenKind.PUNCT, "*"):
            pass
        else:
            self._eat(TokenKind.PUNCT, "(")
            if self._eat_if(TokenKind.PUNCT, "*"):
                pass
            elif self._at_keyword("posedge"):
                self._eat(TokenKind.KEYWORD, "posedge")
                clk = self._eat(TokenKind.IDENTIFIER)
                self._lookup(clk)
                kind = "sequential"
                clock = clk.text
                self.clocks.add(clock)
            else:
                self._check_unsupported_keyword()
                tok = self._cur()
                raise UnsupportedConstruct(
                    "only @(posedge clk) and @(*) sensitivity lists are supported",
                    tok.line, tok.column)
            self._eat(TokenKind.PUNCT, ")")
        body = self._parse_body(sequential=kind == "sequential")
        return AlwaysBlock(kind, clock, tuple(body), line=kw.line)

    # ---- statements ----

    def _parse_body(self, sequential: bool) -> list[Stmt]:
        """Parse a single statement or a begin/end block into a statement list."""
        if self._at_keyword("begin"):
            self._eat(TokenKind.KEYWORD, "begin")
            stmts: list[Stmt] = []
            while not self._at_keyword("end"):
                if self._at(TokenKind.EOF):
                    tok = self._cur()
                    raise ParseError("unexpected end of input", tok.line, tok.column,
                                     expected=("end",))
                stmts.append(self._parse_stmt(sequential))
            self._eat(TokenKind.KEYWORD, "end")
            return stmts
        return [self._parse_stmt(sequential)]

    def _parse_stmt(self, sequential: bool) -> Stmt:
        self._check_unsupported_keyword()
        if self._at_keyword("if"):
            return self._parse_if(sequential)
        if self._at_keyword("case"):
            return self._parse_case(sequential)
        if self._at_keyword("for"):
            return self._parse_for(sequential)
        if self._at(TokenKind.IDENTIFIER):
            return self._parse_assignment(sequential)
        tok = self._cur()
        raise ParseError(f"unexpected {self._describe(tok)}", tok.line, tok.column,
                         expected=("statement",))

    def _parse_if(self, sequential: bool) -> If:
        kw = self._eat(TokenKind.KEYWORD, "if")
        self._eat(TokenKind.PUNCT, "(")
        cond = self.parse_expr()
        self._eat(TokenKind.PUNCT, ")")
        then_body = self._parse_body(sequential)
        else_body: list[Stmt] = []
        if self._at_keyword("else"):
            self._eat(TokenKind.KEYWORD, "else")
            if self._at_keyword("if"):
                else_body = [self._parse_if(sequential)]
            else:
                else_body = self._parse_body(sequential)
        return If(cond, tuple(then_body), tuple(else_body), line=kw.line)

    def _parse_case(self, sequential: bool) -> Case:
        kw = self._eat(TokenKind.KEYWORD, "case")
        self._eat(TokenKind.PUNCT, "(")
        select = self.parse_expr()
        self._eat(TokenKind.PUNCT, ")")
        arms: list[CaseArm] = []
        seen_labels: set[int] = set()
        while not self._at_keyword("endcase"):
            self._check_unsupported_keyword()
            label_tok = self._cur()
            label = self._parse_const_int("case label")
            if self._at(TokenKind.PUNCT, ","):
                self._fail_unsupported("multi-label case arms")
            self._eat(TokenKind.OP, ":")
            if label in seen_labels:
                raise ParseError(f"duplicate case label {label}",
                                 label_tok.line, label_tok.column)
            seen_labels.add(label)
            arms.append(CaseArm(label, tuple(self._parse_body(sequential))))
        self._eat(TokenKind.KEYWORD, "endcase")
        if not arms:
            raise ParseError("case statement has no arms", kw.line, kw.column)
        return Case(select, tuple(arms), line=kw.line)

    def _parse_for(self, sequential: bool) -> For:
        kw = self._eat(TokenKind.KEYWORD, "for")
        self._eat(TokenKind.PUNCT, "(")
        var_tok = self._eat(TokenKind.IDENTIFIER)
        self._lookup(var_tok)
        self._eat(TokenKind.OP, "=")
        init = self._parse_const_int("loop bound")
        self._eat(TokenKind.PUNCT, ";")
        self._expect_loop_var(var_tok.text)
        if not self._at(TokenKind.OP, "<"):
            tok = self._cur()
            raise UnsupportedConstruct(
                "for loops must have the shape for (i=INIT; i<BOUND; i=i+STEP)",
                tok.line, tok.column)
        self._eat(TokenKind.OP, "<")
        bound = self._parse_const_int("loop bound")
        self._eat(TokenKind.PUNCT, ";")
        self._expect_loop_var(var_tok.text)
        self._eat(TokenKind.OP, "=")
        self._expect_loop_var(var_tok.text)
        if not self._at(TokenKind.OP, "+"):
            tok = self._cur()
            raise UnsupportedConstruct(
                "for loops must have the shape for (i=INIT; i<BOUND; i=i+STEP)",
                tok.line, tok.column)
        self._eat(TokenKind.OP, "+")
        step = self._parse_const_int("loop step")
        self._eat(TokenKind.PUNCT, ")")
        body = self._parse_body(sequential)
        return For(var_tok.text, init, bound, step, tuple(body), line=kw.line)

    def _expect_loop_var(self, name: str) -> None:
        tok = self._eat(TokenKind.IDENTIFIER)
        if tok.text != name:
            raise ParseError(f"loop control must use the index variable {name!r}",
                             tok.line, tok.column)

    def _parse_assignment(self, sequential: bool) -> Assign:
        start = self._cur()
        target = self._parse_lvalue()
        if self._at(TokenKind.OP, "="):
            self._eat(TokenKind.OP, "=")
            blocking = True
        elif self._at(TokenKind.OP, "<="):
            self._eat(TokenKind.OP, "<=")
            blocking = False
        else:
            tok = self._cur()
            raise ParseError(f"unexpected {self._describe(tok)}", tok.line, tok.column,
                             expected=("=", "<="))
        if sequential and blocking:
            raise ParseError("edge-triggered blocks must use nonblocking assignments",
                             start.line, start.column)
        if not sequential and not blocking:
            raise ParseError("combinational blocks must use blocking assignments",
                             start.line, start.column)
        rhs = self.parse_expr()
        self._eat(TokenKind.PUNCT, ";")
        return Assign(target, rhs, blocking, line=start.line)

    def _parse_lvalue(self) -> LValue:
        tok = self._eat(TokenKind.IDENTIFIER)
        sym = self._lookup(tok)
        if sym.is_port and sym.direction == "input":
            raise ParseError(f"cannot assign to input port {tok.text!r}",
                             tok.line, tok.column)
        index: Expr | None = None
        if self._at(TokenKind.PUNCT, "["):
            open_tok = self._eat(TokenKind.PUNCT, "[")
            if sym.length == 1:
                raise UnsupportedConstruct(
                    "bit- and part-select assignment targets are not supported",
                    open_tok.line, open_tok.column)
            index = self.parse_expr()
            self._eat(TokenKind.PUNCT, "]")
            value = const_eval(index)
            if value is not None and not 0 <= value < sym.length:
                raise ParseError(
                    f"array index {value} out of range for {tok.text!r}",
                    open_tok.line, open_tok.column)
        elif sym.length > 1:
            raise ParseError(f"array {tok.text!r} must be assigned per element",
                             tok.line, tok.column)
        return LValue(tok.text, index)

    # ---- expressions ----

    def parse_expr(self) -> Expr:
        cond = self._parse_binary(0)
        if self._eat_if(TokenKind.OP, "?"):
            then = self.parse_expr()
            self._eat(TokenKind.OP, ":")
            other = self.parse_expr()
            return Ternary(cond, then, other)
        return cond

    def _parse_binary(self, level: int) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self._parse_unary()
        lhs = self._parse_binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while self._cur().kind == TokenKind.OP and self._cur().text in ops:
            op = self._eat(TokenKind.OP).text
            rhs = self._parse_binary(level + 1)
            lhs = Binary("~^" if op == "^~" else op, lhs, rhs)
        return lhs

    def _parse_unary(self) -> Expr:
        if self._at(TokenKind.OP, "!") or self._at(TokenKind.OP, "~"):
            op = self._eat(TokenKind.OP).text
            return Unary(op, self._parse_unary())
        if self._at(TokenKind.OP, "-") or self._at(TokenKind.OP, "+"):
            self._fail_unsupported("unary arithmetic operators")
        if self._at(TokenKind.OP, "&") or self._at(TokenKind.OP, "|") \
                or self._at(TokenKind.OP, "^"):
            self._fail_unsupported("reduction operators")
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        tok = self._cur()
        if tok.kind in (TokenKind.INT, TokenKind.BASED):
            self._eat(tok.kind)
            value, width = literal_value(tok.text)
            return Const(value, width)
        if tok.kind == TokenKind.IDENTIFIER:
            return self._parse_reference()
        if self._eat_if(TokenKind.PUNCT, "("):
            e = self.parse_expr()
            self._eat(TokenKind.PUNCT, ")")
            return e
        if self._at(TokenKind.PUNCT, "{"):
            return self._parse_concat()
        self._check_unsupported_keyword()
        raise ParseError(f"unexpected {self._describe(tok)}", tok.line, tok.column,
                         expected=("expression",))

    def _parse_reference(self) -> Expr:
        tok = self._eat(TokenKind.IDENTIFIER)
        sym = self._lookup(tok)
        if self._at(TokenKind.PUNCT, "("):
            self._fail_unsupported("function calls")
        if not self._at(TokenKind.PUNCT, "["):
            if sym.length > 1:
                raise ParseError(f"array {tok.text!r} must be referenced per element",
                                 tok.line, tok.column)
            return SignalRef(tok.text)
        open_tok = self._eat(TokenKind.PUNCT, "[")
        first = self.parse_expr()
        if self._eat_if(TokenKind.OP, ":"):
            msb = const_eval(first)
            lsb = self._parse_const_int("part-select bound")
            self._eat(TokenKind.PUNCT, "]")
            if msb is None:
                raise ParseError("part-select bounds must be constants",
                                 open_tok.line, open_tok.column)
            if sym.length > 1:
                self._fail_unsupported("part-selects of arrays")
            if not 0 <= lsb <= msb < sym.width:
                raise ParseError(
                    f"part-select [{msb}:{lsb}] outside the width of {tok.text!r}",
                    open_tok.line, open_tok.column)
            return PartSelect(tok.text, msb, lsb)
        self._eat(TokenKind.PUNCT, "]")
        if self._at(TokenKind.PUNCT, "["):
            self._fail_unsupported("multi-dimensional selects")
        value = const_eval(first)
        if sym.length > 1:
            if value is not None and not 0 <= value < sym.length:
                raise ParseError(f"array index {value} out of range for {tok.text!r}",
                                 open_tok.line, open_tok.column)
            return SignalRef(tok.text, first)
        if value is not None and not 0 <= value < sym.width:
            raise ParseError(f"bit index {value} outside the width of {tok.text!r}",
                             open_tok.line, open_tok.column)
        return BitSelect(tok.text, first)

    def _parse_concat(self) -> Expr:
        self._eat(TokenKind.PUNCT, "{")
        parts = [self.parse_expr()]
        if self._at(TokenKind.PUNCT, "{"):
            self._fail_unsupported("replication operators")
        while self._eat_if(TokenKind.PUNCT, ","):
            parts.append(self.parse_expr())
        self._eat(TokenKind.PUNCT, "}")
        return Concat(tuple(parts))

    def _parse_const_int(self, what: str) -> int:
        tok = self._cur()
        if tok.kind in (TokenKind.INT, TokenKind.BASED):
            self._eat(tok.kind)
            value, _ = literal_value(tok.text)
            return value
        raise ParseError(f"{what} must be an integer constant", tok.line, tok.column,
                         expected=("integer constant",))


def parse_module(tokens: list[Token]) -> SourceModule:
    """Parse a token stream holding exactly one module declaration."""
    return Parser(tokens).parse_module()


def parse_source(source: str) -> SourceModule:
    """Tokenize and parse module source text."""
    return parse_module(tokenize(source))
