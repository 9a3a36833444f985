"""Recursive-descent parser for a small Java-like language.

The accepted subset::

    [package a.b;] {import a.b.C;}
    {modifiers} class Name [extends Parent] { fields; constructors; methods }

Single inheritance only. Interfaces, generics, annotations, lambdas, method
references, nested/anonymous classes, initializer blocks, try-with-resources
and arrow-style switches are rejected with a :class:`ParseError`.

Every method body is walked once to collect decision points (see
:class:`DecisionKind`) and the set of fields it touches. A bare identifier
counts as a field access when it names a field of the enclosing class and is
not shadowed by a parameter or local; ``this.x`` is always recorded, even when
``x`` is not declared locally (it may be inherited).
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DuplicateClassError, ParseError, SourceEncodingError


class DecisionKind(str, Enum):
    IF = "if"
    LOOP = "loop"
    CASE = "case_label"
    CATCH = "catch_clause"
    TERNARY = "ternary"
    AND = "short_circuit_and"
    OR = "short_circuit_or"


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str


@dataclass
class MethodDecl:
    name: str
    decision_points: dict[DecisionKind, int] = field(default_factory=dict)
    accessed_fields: set[str] = field(default_factory=set)
    is_constructor: bool = False

    @property
    def decision_total(self) -> int:
        return sum(self.decision_points.values())


@dataclass
class ClassDecl:
    name: str
    qualified_name: str
    parent_name: str | None = None
    fields: list[str] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    source_path: str = ""

    @property
    def package(self) -> str:
        head, _, _ = self.qualified_name.rpartition(".")
        return head


# --------------------------------------------------------------------------
# Lexer

KEYWORDS = frozenset(
    """
    abstract boolean break byte case catch char class continue default do
    double else enum extends final finally float for if implements import
    instanceof int interface long native new package private protected public
    return short static strictfp super switch synchronized this throw throws
    transient try void volatile while true false null assert goto const
    """.split()
)
PRIMITIVES = frozenset("boolean byte char short int long float double".split())
MODIFIERS = frozenset(
    "public private protected static final abstract synchronized native transient volatile strictfp".split()
)

_OPERATORS = sorted(
    """
    >>>= <<= >>= >>> ... :: -> == != <= >= && || ++ -- += -= *= /= %= &= |= ^= << >>
    { } ( ) [ ] ; , . = < > ! ~ ? : + - * / & | ^ % @
    """.split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\f\r\n]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<number>
        0[xX][0-9a-fA-F_]+[lL]?
      | (?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?
    )
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)+')
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>"""
    + "|".join(re.escape(op) for op in _OPERATORS)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | char | op | eof
    value: str
    line: int
    column: int


def tokenize(text: str, filename: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text.startswith("/*", pos):
                raise ParseError("unterminated block comment", filename, line, col)
            if text[pos] in "\"'":
                raise ParseError("unterminated literal", filename, line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", filename, line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "line_comment", "block_comment"):
            if kind == "ident" and value in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# Parser

_BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "instanceof": 7,
    "<<": 8, ">>": 8, ">>>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
_ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>= >>>=".split())
_LITERAL_KINDS = frozenset(("number", "string", "char"))
_UNSUPPORTED_OPS = {
    "@": "annotations are not supported",
    "->": "lambdas are not supported",
    "::": "method references are not supported",
    "...": "varargs are not supported",
}


class _MethodScope:
    """Collects decision points and field accesses for one method body."""

    def __init__(self, class_fields: frozenset[str], params: Iterable[str]):
        self.class_fields = class_fields
        self.scopes: list[set[str]] = [set(params)]
        self.decisions: Counter[DecisionKind] = Counter()
        self.accessed: set[str] = set()

    def declare(self, name: str) -> None:
        self.scopes[-1].add(name)

    def push(self) -> None:
        self.scopes.append(set())

    def pop(self) -> None:
        self.scopes.pop()

    def is_local(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def reference(self, name: str) -> None:
        if name in self.class_fields and not self.is_local(name):
            self.accessed.add(name)


class _NullScope(_MethodScope):
    """Stand-in used for field initializers, which belong to no method."""

    def __init__(self) -> None:
        super().__init__(frozenset(), ())


class _Parser:
    def __init__(self, tokens: list[Token], filename: str | None):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename
        self.ctx: _MethodScope = _NullScope()

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, self.filename, tok.line, tok.column)

    def at(self, *values: str) -> bool:
        t = self.tok
        return t.kind in ("op", "keyword") and t.value in values

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.pos += 1
            return True
        return False

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.unsupported_check()
            found = self.tok.value or "end of file"
            raise self.error(f"expected {value!r}, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def expect_ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "ident":
            self.unsupported_check()
            raise self.error(f"expected {what}, found {t.value or 'end of file'!r}")
        self.pos += 1
        return t.value

    def unsupported_check(self) -> None:
        t = self.tok
        if t.kind == "op" and t.value in _UNSUPPORTED_OPS:
            raise self.error(_UNSUPPORTED_OPS[t.value])

    # -- compilation unit --------------------------------------------------

    def compilation_unit(self) -> tuple[str, list[ClassDecl]]:
        package = ""
        if self.accept("package"):
            package = self.qualified_name()
            self.expect(";")
        while self.accept("import"):
            self.accept("static")
            self.expect_ident()
            while self.accept("."):
                if self.accept("*"):
                    break
                self.expect_ident()
            self.expect(";")
        classes: list[ClassDecl] = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            if self.accept(";"):
                continue
            start = self.tok
            cls = self.class_decl(package)
            if cls.name in seen:
                raise self.error(f"class {cls.name!r} declared twice in this file", start)
            seen.add(cls.name)
            classes.append(cls)
        return package, classes

    def qualified_name(self) -> str:
        parts = [self.expect_ident()]
        while self.at(".") and self.peek().kind == "ident":
            self.pos += 1
            parts.append(self.expect_ident())
        return ".".join(parts)

    def modifiers(self) -> set[str]:
        mods: set[str] = set()
        while True:
            self.unsupported_check()
            if self.tok.kind == "keyword" and self.tok.value in MODIFIERS:
                mods.add(self.tok.value)
                self.pos += 1
            else:
                return mods

    def class_decl(self, package: str) -> ClassDecl:
        self.modifiers()
        if self.at("interface", "enum"):
            raise self.error(f"{self.tok.value} declarations are not supported")
        self.expect("class")
        name = self.expect_ident("class name")
        if self.at("<"):
            raise self.error("generics are not supported")
        parent = None
        if self.accept("extends"):
            parent = self.qualified_name()
            if self.at("<"):
                raise self.error("generics are not supported")
        if self.at("implements"):
            raise self.error("interfaces are not supported")
        self.expect("{")

        # Field names are needed before method bodies are walked, so members
        # are parsed in two passes: first pass records fields and body spans.
        members_start = self.pos
        fields = self.collect_fields(name)
        self.pos = members_start
        methods: list[MethodDecl] = []
        class_fields = frozenset(fields)
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise self.error("unexpected end of file inside class body")
            method = self.member(name, class_fields)
            if method is not None:
                methods.append(method)
        qualified = f"{package}.{name}" if package else name
        return ClassDecl(name, qualified, parent, fields, methods, self.filename or "")

    def collect_fields(self, class_name: str) -> list[str]:
        fields: list[str] = []
        saved_ctx = self.ctx
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unexpected end of file inside class body")
            fields.extend(self.member(class_name, frozenset(), fields_only=True) or [])
        self.ctx = saved_ctx
        return fields

    def member(self, class_name: str, class_fields: frozenset[str], fields_only: bool = False):
        """Parse one class member.

        In ``fields_only`` mode returns the declared field names (method
        bodies are skipped by brace matching); otherwise returns a
        :class:`MethodDecl` for methods/constructors and ``None`` for fields.
        """
        if self.accept(";"):
            return None
        self.modifiers()
        if self.at("class", "interface", "enum"):
            raise self.error("nested classes are not supported")
        if self.at("{"):
            raise self.error("initializer blocks are not supported")
        if self.at("<"):
            raise self.error("generics are not supported")

        if self.tok.kind == "ident" and self.tok.value == class_name and self.peek().value == "(":
            name_tok = self.tok
            self.pos += 1
            return self.method_rest(name_tok.value, class_fields, fields_only, constructor=True)

        type_tok = self.tok
        self.type_(allow_void=True)
        name = self.expect_ident("member name")
        if self.at("("):
            return self.method_rest(name, class_fields, fields_only)
        if type_tok.value == "void":
            raise self.error("field cannot have type void", type_tok)

        names = [name]
        self.ctx = _NullScope()
        self.declarator_rest()
        while self.accept(","):
            names.append(self.expect_ident("field name"))
            self.declarator_rest()
        self.expect(";")
        return names if fields_only else None

    def declarator_rest(self) -> None:
        while self.accept("["):
            self.expect("]")
        if self.accept("="):
            self.variable_initializer()

    def variable_initializer(self) -> None:
        if self.accept("{"):
            while not self.accept("}"):
                self.variable_initializer()
                if not self.accept(","):
                    self.expect("}")
                    break
        else:
            self.expression()

    def type_(self, allow_void: bool = False) -> str:
        t = self.tok
        if t.kind == "keyword" and (t.value in PRIMITIVES or (allow_void and t.value == "void")):
            self.pos += 1
            name = t.value
        elif t.kind == "ident":
            name = self.qualified_name()
        else:
            self.unsupported_check()
            raise self.error(f"expected type, found {t.value or 'end of file'!r}")
        if self.at("<"):
            raise self.error("generics are not supported")
        while self.at("[") and self.peek().value == "]":
            self.pos += 2
            name += "[]"
        return name

    def method_rest(self, name: str, class_fields: frozenset[str], fields_only: bool, constructor: bool = False):
        self.expect("(")
        params: list[str] = []
        if not self.at(")"):
            while True:
                self.modifiers()
                self.type_()
                self.unsupported_check()
                params.append(self.expect_ident("parameter name"))
                while self.accept("["):
                    self.expect("]")
                if not self.accept(","):
                    break
        self.expect(")")
        while self.accept("["):
            self.expect("]")
        if self.accept("throws"):
            self.qualified_name()
            while self.accept(","):
                self.qualified_name()

        if fields_only:
            if not self.accept(";"):
                self.skip_block()
            return None

        self.ctx = _MethodScope(class_fields, params)
        if not self.accept(";"):
            self.block(new_scope=False)
        ctx = self.ctx
        self.ctx = _NullScope()
        points = {k: ctx.decisions[k] for k in DecisionKind if ctx.decisions[k]}
        return MethodDecl(name, points, set(ctx.accessed), constructor)

    def skip_block(self) -> None:
        self.expect("{")
        depth = 1
        while depth:
            t = self.tok
            if t.kind == "eof":
                raise self.error("unexpected end of file inside method body")
            if t.kind == "op":
                if t.value == "{":
                    depth += 1
                elif t.value == "}":
                    depth -= 1
            self.pos += 1

    # -- statements --------------------------------------------------------

    def block(self, new_scope: bool = True) -> None:
        self.expect("{")
        if new_scope:
            self.ctx.push()
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise self.error("unexpected end of file inside block")
            self.block_statement()
        if new_scope:
            self.ctx.pop()

    def looks_like_local_decl(self) -> bool:
        t = self.tok
        if t.kind == "keyword" and (t.value in PRIMITIVES or t.value == "final"):
            return True
        if t.kind != "ident":
            return False
        i = self.pos + 1
        toks = self.tokens
        while toks[i].value == "." and toks[i + 1].kind == "ident":
            i += 2
        while toks[i].value == "[" and toks[i + 1].value == "]":
            i += 2
        if toks[i].value == "<" and toks[i].kind == "op":
            # `List<String> x` style declarations; `a < b` comparisons fall through
            j = i + 1
            while toks[j].kind in ("ident", "keyword") or toks[j].value in (",", ".", "?", "[", "]"):
                j += 1
            if toks[j].value in (">", ">>") and toks[j + 1].kind == "ident":
                raise self.error("generics are not supported", toks[i])
        return toks[i].kind == "ident"

    def local_var_decl(self) -> None:
        self.modifiers()
        self.type_()
        while True:
            name = self.expect_ident("variable name")
            while self.accept("["):
                self.expect("]")
            if self.accept("="):
                self.variable_initializer()
            self.ctx.declare(name)
            if not self.accept(","):
                break

    def block_statement(self) -> None:
        if self.at("class", "interface", "enum"):
            raise self.error("local classes are not supported")
        if self.looks_like_local_decl():
            self.local_var_decl()
            self.expect(";")
        else:
            self.statement()

    def statement(self) -> None:
        t = self.tok
        self.unsupported_check()
        if t.kind == "op" and t.value == "{":
            self.block()
            return
        if self.accept(";"):
            return
        if t.kind == "ident" and self.peek().value == ":" and self.peek().kind == "op":
            self.pos += 2
            self.statement()
            return
        if t.kind != "keyword":
            self.expression()
            self.expect(";")
            return

        kw = t.value
        ctx = self.ctx
        if kw == "if":
            self.pos += 1
            ctx.decisions[DecisionKind.IF] += 1
            self.par_expression()
            self.sub_statement()
            if self.accept("else"):
                self.sub_statement()
        elif kw == "while":
            self.pos += 1
            ctx.decisions[DecisionKind.LOOP] += 1
            self.par_expression()
            self.sub_statement()
        elif kw == "do":
            self.pos += 1
            ctx.decisions[DecisionKind.LOOP] += 1
            self.sub_statement()
            self.expect("while")
            self.par_expression()
            self.expect(";")
        elif kw == "for":
            self.pos += 1
            ctx.decisions[DecisionKind.LOOP] += 1
            self.for_rest()
        elif kw == "switch":
            self.pos += 1
            self.switch_rest()
        elif kw == "try":
            self.pos += 1
            self.try_rest()
        elif kw in ("return", "throw"):
            self.pos += 1
            if kw == "throw" or not self.at(";"):
                self.expression()
            self.expect(";")
        elif kw in ("break", "continue"):
            self.pos += 1
            if self.tok.kind == "ident":
                self.pos += 1
            self.expect(";")
        elif kw in ("this", "super", "new", "true", "false", "null") or kw in PRIMITIVES:
            self.expression()
            self.expect(";")
        elif kw == "else":
            raise self.error("'else' without 'if'")
        elif kw in ("case", "default"):
            raise self.error(f"'{kw}' outside switch")
        else:
            raise self.error(f"unsupported statement starting with {kw!r}")

    def sub_statement(self) -> None:
        # A lone declaration as an if/loop body is illegal Java; a nested
        # statement still gets its own scope for any block it opens.
        self.ctx.push()
        self.statement()
        self.ctx.pop()

    def par_expression(self) -> None:
        self.expect("(")
        self.expression()
        self.expect(")")

    def for_rest(self) -> None:
        self.expect("(")
        self.ctx.push()
        if self.looks_like_local_decl():
            # enhanced for: `for (T x : xs)`
            save = self.pos
            self.modifiers()
            self.type_()
            if self.tok.kind == "ident" and self.peek().value == ":":
                name = self.expect_ident()
                self.expect(":")
                self.expression()
                self.ctx.declare(name)
                self.expect(")")
                self.statement()
                self.ctx.pop()
                return
            self.pos = save
            self.local_var_decl()
        elif not self.at(";"):
            self.expression_list()
        self.expect(";")
        if not self.at(";"):
            self.expression()
        self.expect(";")
        if not self.at(")"):
            self.expression_list()
        self.expect(")")
        self.statement()
        self.ctx.pop()

    def expression_list(self) -> None:
        self.expression()
        while self.accept(","):
            self.expression()

    def switch_rest(self) -> None:
        self.par_expression()
        self.expect("{")
        self.ctx.push()
        saw_label = False
        while not self.accept("}"):
            if self.accept("case"):
                self.ctx.decisions[DecisionKind.CASE] += 1
                self.ternary()
                if self.at("->"):
                    raise self.error("arrow-style switch is not supported")
                if self.at(","):
                    raise self.error("multi-label case is not supported")
                self.expect(":")
                saw_label = True
            elif self.accept("default"):
                if self.at("->"):
                    raise self.error("arrow-style switch is not supported")
                self.expect(":")
                saw_label = True
            elif self.tok.kind == "eof":
                raise self.error("unexpected end of file inside switch")
            elif not saw_label:
                raise self.error("statement before first case label")
            else:
                self.block_statement()
        self.ctx.pop()

    def try_rest(self) -> None:
        if self.at("("):
            raise self.error("try-with-resources is not supported")
        self.block()
        clauses = 0
        while self.accept("catch"):
            clauses += 1
            self.ctx.decisions[DecisionKind.CATCH] += 1
            self.expect("(")
            self.modifiers()
            self.type_()
            while self.accept("|"):
                self.type_()
            name = self.expect_ident("exception variable")
            self.expect(")")
            self.ctx.push()
            self.ctx.declare(name)
            self.block()
            self.ctx.pop()
        if self.accept("finally"):
            self.block()
        elif not clauses:
            raise self.error("'try' without 'catch' or 'finally'")

    # -- expressions -------------------------------------------------------

    def expression(self) -> None:
        self.ternary()
        if self.tok.kind == "op" and self.tok.value in _ASSIGN_OPS:
            self.pos += 1
            self.expression()

    def ternary(self) -> None:
        self.binary(1)
        if self.accept("?"):
            self.ctx.decisions[DecisionKind.TERNARY] += 1
            self.expression()
            self.expect(":")
            self.ternary()

    def binary(self, min_prec: int) -> None:
        self.unary()
        while True:
            t = self.tok
            prec = _BINARY_PRECEDENCE.get(t.value) if t.kind in ("op", "keyword") else None
            if prec is None or prec < min_prec:
                return
            self.pos += 1
            if t.value == "instanceof":
                self.type_()
                continue
            if t.value == "&&":
                self.ctx.decisions[DecisionKind.AND] += 1
            elif t.value == "||":
                self.ctx.decisions[DecisionKind.OR] += 1
            self.binary(prec + 1)

    def unary(self) -> None:
        t = self.tok
        if t.kind == "op" and t.value in ("+", "-", "++", "--", "!", "~"):
            self.pos += 1
            self.unary()
            return
        if t.kind == "op" and t.value == "(" and self.is_cast():
            self.pos += 1
            self.type_()
            self.expect(")")
            self.unary()
            return
        self.postfix()

    def is_cast(self) -> bool:
        toks = self.tokens
        i = self.pos + 1
        if toks[i].kind == "keyword" and toks[i].value in PRIMITIVES:
            i += 1
            while toks[i].value == "[" and toks[i + 1].value == "]":
                i += 2
            return toks[i].value == ")"
        if toks[i].kind != "ident":
            return False
        i += 1
        while toks[i].value == "." and toks[i + 1].kind == "ident":
            i += 2
        while toks[i].value == "[" and toks[i + 1].value == "]":
            i += 2
        if toks[i].value != ")":
            return False
        nxt = toks[i + 1]
        if nxt.kind in ("ident",) or nxt.kind in _LITERAL_KINDS:
            return True
        if nxt.kind == "keyword" and nxt.value in ("this", "super", "new", "true", "false", "null"):
            return True
        return nxt.kind == "op" and nxt.value in ("(", "!", "~")

    def arguments(self) -> None:
        self.expect("(")
        if not self.accept(")"):
            self.expression_list()
            self.expect(")")

    def postfix(self) -> None:
        self.primary()
        while True:
            if self.accept("."):
                if self.accept("class"):
                    continue
                if self.at("this"):
                    self.pos += 1
                    continue
                self.unsupported_check()
                self.expect_ident("member name")
                if self.at("("):
                    self.arguments()
            elif self.accept("["):
                self.expression()
                self.expect("]")
            elif self.at("++", "--"):
                self.pos += 1
            else:
                self.unsupported_check()
                return

    def primary(self) -> None:
        t = self.tok
        if t.kind in _LITERAL_KINDS:
            self.pos += 1
            return
        if t.kind == "ident":
            self.pos += 1
            self.unsupported_check()
            if self.at("("):
                self.arguments()
            else:
                self.ctx.reference(t.value)
            return
        if t.kind == "keyword":
            if t.value in ("true", "false", "null"):
                self.pos += 1
                return
            if t.value in ("this", "super"):
                self.pos += 1
                if self.at("("):
                    self.arguments()
                elif self.at(".") and self.peek().kind == "ident" and self.peek(2).value != "(":
                    self.pos += 1
                    name = self.expect_ident()
                    if t.value == "this":
                        self.ctx.accessed.add(name)
                return
            if t.value == "new":
                self.pos += 1
                self.creator()
                return
            if t.value in PRIMITIVES or t.value == "void":
                # `int.class`
                self.pos += 1
                while self.at("[") and self.peek().value == "]":
                    self.pos += 2
                self.expect(".")
                self.expect("class")
                return
        if t.kind == "op" and t.value == "(":
            if self.lambda_ahead():
                raise self.error(_UNSUPPORTED_OPS["->"])
            self.pos += 1
            self.expression()
            self.expect(")")
            return
        self.unsupported_check()
        raise self.error(f"unexpected {t.value or 'end of file'!r} in expression")

    def lambda_ahead(self) -> bool:
        """True when the '(' at the cursor opens a lambda parameter list."""
        depth = 0
        for i in range(self.pos, len(self.tokens)):
            v = self.tokens[i].value
            if v == "(":
                depth += 1
            elif v == ")":
                depth -= 1
                if depth == 0:
                    return i + 1 < len(self.tokens) and self.tokens[i + 1].value == "->"
        return False

    def creator(self) -> None:
        t = self.tok
        if t.kind == "keyword" and t.value in PRIMITIVES:
            self.pos += 1
        else:
            self.qualified_name()
        if self.at("<"):
            raise self.error("generics are not supported")
        if self.at("("):
            self.arguments()
            if self.at("{"):
                raise self.error("anonymous classes are not supported")
            return
        if not self.at("["):
            raise self.error("expected '(' or '[' after 'new' type")
        sized = False
        while self.accept("["):
            if self.accept("]"):
                continue
            sized = True
            self.expression()
            self.expect("]")
        if self.at("{"):
            if sized:
                raise self.error("array creation cannot have both dimensions and initializer")
            self.variable_initializer()
        elif not sized:
            raise self.error("array creation needs a dimension or an initializer")


def parse_file(file: SourceFile) -> list[ClassDecl]:
    """Parse one source file into its top-level class declarations."""
    if not file.content.strip():
        raise ValueError(f"{file.path}: empty source file")
    tokens = tokenize(file.content, file.path)
    _, classes = _Parser(tokens, file.path).compilation_unit()
    return classes


def load_source(path: str | Path) -> SourceFile:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SourceEncodingError(f"{path}: not valid UTF-8 (byte offset {exc.start})") from exc
    if text.startswith("\ufeff"):
        text = text[1:]
    return SourceFile(str(path), text)


def iter_source_files(root: str | Path, suffix: str = ".java") -> Iterator[Path]:
    yield from sorted(p for p in Path(root).rglob(f"*{suffix}") if p.is_file())


def merge_classes(classes: Iterable[ClassDecl]) -> list[ClassDecl]:
    """Sort by qualified name, refusing duplicates."""
    by_name: dict[str, ClassDecl] = {}
    for cls in classes:
        other = by_name.get(cls.qualified_name)
        if other is not None:
            raise DuplicateClassError(cls.qualified_name, other.source_path, cls.source_path)
        by_name[cls.qualified_name] = cls
    return [by_name[k] for k in sorted(by_name)]


def build_corpus(files: Iterable[SourceFile]) -> list[ClassDecl]:
    """Parse every file and merge the classes, sorted by qualified name."""
    return merge_classes(cls for f in files for cls in parse_file(f))


# --------------------------------------------------------------------------
# JSON round trip


def corpus_to_json(corpus: Iterable[ClassDecl]) -> list[dict]:
    out = []
    for cls in corpus:
        out.append(
            {
                "qualified_name": cls.qualified_name,
                "name": cls.name,
                "parent_name": cls.parent_name,
                "source_path": cls.source_path,
                "fields": list(cls.fields),
                "methods": [
                    {
                        "name": m.name,
                        "constructor": m.is_constructor,
                        "decision_points": {k.value: v for k, v in m.decision_points.items()},
                        "accessed_fields": sorted(m.accessed_fields),
                    }
                    for m in cls.methods
                ],
            }
        )
    return out


def corpus_from_json(data: list[dict]) -> list[ClassDecl]:
    corpus = []
    for item in data:
        qualified = item["qualified_name"]
        methods = [
            MethodDecl(
                name=m["name"],
                decision_points={DecisionKind(k): int(v) for k, v in m.get("decision_points", {}).items() if int(v)},
                accessed_fields=set(m.get("accessed_fields", [])),
                is_constructor=bool(m.get("constructor", False)),
            )
            for m in item.get("methods", [])
        ]
        corpus.append(
            ClassDecl(
                name=item.get("name") or qualified.rpartition(".")[2],
                qualified_name=qualified,
                parent_name=item.get("parent_name"),
                fields=list(item.get("fields", [])),
                methods=methods,
                source_path=item.get("source_path", ""),
            )
        )
    return corpus


def dump_corpus(corpus: Iterable[ClassDecl], path: str | Path) -> None:
    Path(path).write_text(json.dumps(corpus_to_json(corpus), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> list[ClassDecl]:
    return corpus_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
