"""Recursive-descent parser producing the kernel-language AST.

The accepted grammar is a small Python subset: top-level statements and
function definitions (optionally decorated with @dynamic / @dynamic(defer=True)),
if/elif/else, while, for-over-range, assignment and augmented assignment,
global/nonlocal, del, return, and expressions over int/real/string scalars,
1-D list literals, calls, indexing, and single comparisons.  Recognized
Python constructs outside the subset raise UnsupportedFeatureError; the
paper-style `from epython import dynamic` line is accepted and ignored.
"""

from __future__ import annotations

from . import minipy_ast as ast
from .errors import ParseError, UnsupportedFeatureError
from .lexer import (DEDENT, ENDMARKER, INDENT, INT, NAME, NEWLINE, OP, REAL,
                    STRING, tokenize)

_KEYWORDS = {
    "def", "return", "if", "elif", "else", "while", "for", "in",
    "global", "nonlocal", "del", "pass", "from", "import",
}

# recognized Python, rejected with a pointed message
_UNSUPPORTED = {
    "class": "classes", "lambda": "lambda expressions", "and": "boolean operators",
    "or": "boolean operators", "not": "boolean operators", "True": "bool literals",
    "False": "bool literals", "None": "None", "try": "exception handling",
    "except": "exception handling", "raise": "exception handling",
    "with": "with blocks", "as": "with blocks", "assert": "assert",
    "yield": "generators", "is": "identity comparison", "break": "break/continue",
    "continue": "break/continue",
}

_AUG_OPS = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "//=": "//", "%=": "%"}
_COMPARE_OPS = {"<", "<=", ">", ">=", "==", "!="}

# recognizable Python an expression must not continue with
_EXPR_TAILS = {
    "and": "boolean operators are not part of the kernel language",
    "or": "boolean operators are not part of the kernel language",
    "not": "boolean operators are not part of the kernel language",
    "if": "conditional expressions are not part of the kernel language",
    "else": "conditional expressions are not part of the kernel language",
    "in": "membership tests are not part of the kernel language",
    "is": "identity tests are not part of the kernel language",
    "for": "comprehensions are not part of the kernel language",
}


def parse(source):
    """Parse a SourceProgram (or string) into a ModuleRoot."""
    return _Parser(tokenize(source)).parse_module()


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # --- token plumbing ---

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.type != ENDMARKER:
            self.pos += 1
        return tok

    def at(self, type_, value=None):
        tok = self.peek()
        return tok.type == type_ and (value is None or tok.value == value)

    def at_keyword(self, word):
        return self.at(NAME, word)

    def expect(self, type_, value=None, expected=None):
        tok = self.peek()
        if not self.at(type_, value):
            what = expected or (repr(value) if value else type_)
            raise ParseError("unexpected %s" % _describe(tok), tok.span, {what})
        return self.next()

    # --- statements ---

    def parse_module(self):
        body = []
        start = self.peek().span
        while not self.at(ENDMARKER):
            if self.at(NEWLINE):
                self.next()
                continue
            if self.at(INDENT):
                raise ParseError("unexpected indent", self.peek().span)
            stmt = self.parse_statement()
            if stmt is not None:
                body.append(stmt)
        return ast.ModuleRoot(body, span=start)

    def parse_statement(self):
        tok = self.peek()
        if tok.type == NAME:
            word = tok.value
            if word in _UNSUPPORTED:
                raise UnsupportedFeatureError(
                    "%s are not part of the kernel language" % _UNSUPPORTED[word],
                    tok.span)
            if word == "def":
                return self.parse_funcdef([])
            if word == "if":
                return self.parse_if()
            if word == "while":
                return self.parse_while()
            if word == "for":
                return self.parse_for()
            if word == "return":
                return self.parse_simple_line(self.parse_return())
            if word == "global":
                return self.parse_simple_line(self.parse_scope_decl(ast.GlobalDecl))
            if word == "nonlocal":
                return self.parse_simple_line(self.parse_scope_decl(ast.NonlocalDecl))
            if word == "del":
                return self.parse_simple_line(self.parse_delete())
            if word == "pass":
                self.next()
                self.expect(NEWLINE)
                return None
            if word == "from":
                return self.parse_simple_line(self.parse_import())
            if word == "import":
                raise UnsupportedFeatureError(
                    "imports other than `from epython import dynamic` are not supported",
                    tok.span)
        if self.at(OP, "@"):
            return self.parse_funcdef(self.parse_decorators())
        return self.parse_simple_line(self.parse_assign_or_expr())

    def parse_simple_line(self, stmt):
        if self.at(OP, ","):
            raise UnsupportedFeatureError(
                "tuples are not part of the kernel language", self.peek().span)
        self.expect(NEWLINE)
        return stmt

    def parse_import(self):
        # sole accepted import form; the decorator itself is built in
        span = self.next().span  # 'from'
        mod = self.expect(NAME).value
        self.expect(NAME, "import", expected="import")
        sym = self.expect(NAME).value
        if (mod, sym) != ("epython", "dynamic"):
            raise UnsupportedFeatureError(
                "imports other than `from epython import dynamic` are not supported",
                span)
        return None

    def parse_decorators(self):
        decos = []
        while self.at(OP, "@"):
            span = self.next().span
            name = self.expect(NAME).value
            if name != "dynamic":
                raise UnsupportedFeatureError(
                    "only the @dynamic decorator is supported", span)
            defer = False
            if self.at(OP, "("):
                self.next()
                self.expect(NAME, "defer", expected="defer")
                self.expect(OP, "=")
                flag = self.expect(NAME).value
                if flag not in ("True", "False"):
                    raise UnsupportedFeatureError(
                        "defer expects True or False", span)
                defer = flag == "True"
                self.expect(OP, ")")
            self.expect(NEWLINE)
            decos.append((span, defer))
        if len(decos) > 1:
            raise UnsupportedFeatureError("at most one decorator per function",
                                          decos[1][0])
        return decos

    def parse_funcdef(self, decos):
        span = decos[0][0] if decos else self.peek().span
        self.expect(NAME, "def", expected="def")
        name = self._ident()
        self.expect(OP, "(")
        params = []
        while not self.at(OP, ")"):
            if params:
                self.expect(OP, ",")
            if self.at(OP, "*") or self.at(OP, "**"):
                raise UnsupportedFeatureError(
                    "star parameters are not part of the kernel language",
                    self.peek().span)
            params.append(self._ident())
            if self.at(OP, "="):
                raise UnsupportedFeatureError(
                    "parameter defaults are not part of the kernel language",
                    self.peek().span)
        self.expect(OP, ")")
        self.expect(OP, ":")
        body = self.parse_suite()
        return ast.FunctionDef(name, params, body,
                               dynamic=bool(decos), defer=bool(decos and decos[0][1]),
                               span=span)

    def parse_suite(self):
        self.expect(NEWLINE)
        self.expect(INDENT, expected="an indented block")
        body = []
        while not self.at(DEDENT):
            stmt = self.parse_statement()
            if stmt is not None:
                body.append(stmt)
        self.next()  # DEDENT
        return body

    def parse_if(self):
        span = self.next().span  # 'if'
        cond = self.parse_expr()
        self.expect(OP, ":")
        body = self.parse_suite()
        orelse = []
        if self.at_keyword("elif"):
            orelse = [self.parse_if_elif()]
        elif self.at_keyword("else"):
            self.next()
            self.expect(OP, ":")
            orelse = self.parse_suite()
        return ast.If(cond, body, orelse, span=span)

    def parse_if_elif(self):
        # an elif chain nests as If inside orelse
        span = self.next().span
        cond = self.parse_expr()
        self.expect(OP, ":")
        body = self.parse_suite()
        orelse = []
        if self.at_keyword("elif"):
            orelse = [self.parse_if_elif()]
        elif self.at_keyword("else"):
            self.next()
            self.expect(OP, ":")
            orelse = self.parse_suite()
        return ast.If(cond, body, orelse, span=span)

    def parse_while(self):
        span = self.next().span
        cond = self.parse_expr()
        self.expect(OP, ":")
        return ast.While(cond, self.parse_suite(), span=span)

    def parse_for(self):
        span = self.next().span
        var = ast.Name(self._ident(), span=self.peek().span)
        self.expect(NAME, "in", expected="in")
        if not self.at(NAME, "range"):
            raise UnsupportedFeatureError(
                "for loops iterate over range(...) only", self.peek().span)
        self.next()
        self.expect(OP, "(")
        args = [self.parse_expr()]
        while self.at(OP, ","):
            self.next()
            args.append(self.parse_expr())
        if len(args) > 3:
            raise ParseError("range takes at most three arguments", span)
        self.expect(OP, ")")
        self.expect(OP, ":")
        return ast.For(var, args, self.parse_suite(), span=span)

    def parse_return(self):
        span = self.next().span
        value = None
        if not self.at(NEWLINE):
            value = self.parse_expr()
        return ast.Return(value, span=span)

    def parse_scope_decl(self, cls):
        span = self.next().span
        names = [self._ident()]
        while self.at(OP, ","):
            self.next()
            names.append(self._ident())
        return cls(names, span=span)

    def parse_delete(self):
        span = self.next().span
        if self.at(OP, "("):
            self.next()
            name = ast.Name(self._ident(), span=span)
            self.expect(OP, ")")
        else:
            name = ast.Name(self._ident(), span=span)
        return ast.Delete(name, span=span)

    def parse_assign_or_expr(self):
        span = self.peek().span
        expr = self.parse_expr()
        tok = self.peek()
        if tok.type == OP and tok.value == "=":
            self.next()
            self._check_target(expr)
            return ast.Assign(expr, self.parse_expr(), span=span)
        if tok.type == OP and tok.value in _AUG_OPS:
            self.next()
            self._check_target(expr)
            return ast.AugAssign(expr, _AUG_OPS[tok.value], self.parse_expr(),
                                 span=span)
        return ast.ExprStmt(expr, span=span)

    def _check_target(self, expr):
        if not isinstance(expr, (ast.Name, ast.Index, ast.Attribute)):
            raise ParseError("cannot assign to this expression", expr.span)

    # --- expressions ---

    def parse_expr(self):
        left = self.parse_arith()
        tok = self.peek()
        if tok.type == OP and tok.value in _COMPARE_OPS:
            self.next()
            right = self.parse_arith()
            nxt = self.peek()
            if nxt.type == OP and nxt.value in _COMPARE_OPS:
                raise UnsupportedFeatureError("chained comparisons", nxt.span)
            left = ast.Compare(tok.value, left, right, span=tok.span)
        tail = self.peek()
        if tail.type == NAME and tail.value in _EXPR_TAILS:
            raise UnsupportedFeatureError(_EXPR_TAILS[tail.value], tail.span)
        return left

    def parse_arith(self):
        left = self.parse_term()
        while self.at(OP, "+") or self.at(OP, "-"):
            tok = self.next()
            left = ast.BinOp(tok.value, left, self.parse_term(), span=tok.span)
        return left

    def parse_term(self):
        left = self.parse_unary()
        while self.peek().type == OP and self.peek().value in ("*", "/", "//", "%"):
            tok = self.next()
            left = ast.BinOp(tok.value, left, self.parse_unary(), span=tok.span)
        return left

    def parse_unary(self):
        if self.at(OP, "-"):
            tok = self.next()
            return ast.UnaryOp("-", self.parse_unary(), span=tok.span)
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_atom()
        while True:
            if self.at(OP, "("):
                span = self.next().span
                args = []
                while not self.at(OP, ")"):
                    if args:
                        self.expect(OP, ",")
                    args.append(self.parse_expr())
                    if self.at(OP, "="):
                        raise UnsupportedFeatureError("keyword arguments",
                                                      self.peek().span)
                self.next()
                expr = ast.Call(expr, args, span=span)
            elif self.at(OP, "["):
                span = self.next().span
                index = self.parse_expr()
                if self.at(OP, ":"):
                    raise UnsupportedFeatureError("slicing", self.peek().span)
                self.expect(OP, "]")
                expr = ast.Index(expr, index, span=span)
            elif self.at(OP, "."):
                span = self.next().span
                expr = ast.Attribute(expr, self._ident(), span=span)
            else:
                return expr

    def parse_atom(self):
        tok = self.peek()
        if tok.type == NAME:
            if tok.value in _UNSUPPORTED:
                raise UnsupportedFeatureError(
                    "%s are not part of the kernel language"
                    % _UNSUPPORTED[tok.value], tok.span)
            if tok.value in _KEYWORDS:
                raise ParseError("unexpected %s" % _describe(tok), tok.span,
                                 {"an expression"})
            self.next()
            return ast.Name(tok.value, span=tok.span)
        if tok.type == INT:
            self.next()
            return ast.IntLit(int(tok.value), span=tok.span)
        if tok.type == REAL:
            self.next()
            return ast.RealLit(float(tok.value), span=tok.span)
        if tok.type == STRING:
            self.next()
            return ast.StringLit(tok.value, span=tok.span)
        if tok.type == OP and tok.value == "(":
            self.next()
            expr = self.parse_expr()
            if self.at(OP, ","):
                raise UnsupportedFeatureError("tuples", self.peek().span)
            self.expect(OP, ")")
            return expr
        if tok.type == OP and tok.value == "[":
            self.next()
            elts = []
            while not self.at(OP, "]"):
                if elts:
                    self.expect(OP, ",")
                elts.append(self.parse_expr())
            self.expect(OP, "]")
            return ast.ListLit(elts, span=tok.span)
        raise ParseError("unexpected %s" % _describe(tok), tok.span,
                         {"an expression"})

    def _ident(self):
        tok = self.peek()
        if tok.type != NAME or tok.value in _KEYWORDS or tok.value in _UNSUPPORTED:
            raise ParseError("unexpected %s" % _describe(tok), tok.span,
                             {"a name"})
        self.next()
        return tok.value


def _describe(tok):
    if tok.type == ENDMARKER:
        return "end of input"
    if tok.type == NEWLINE:
        return "end of line"
    if tok.type in (INDENT, DEDENT):
        return tok.type.lower()
    return "%r" % tok.value
