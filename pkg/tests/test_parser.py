"""Parser and pretty-printer tests.

The core property: pretty-printing any well-formed tree and reparsing it
reproduces the tree exactly (spans aside).  Trees are generated directly
so the property exercises precedence, parenthesization, suite layout, and
decorator reconstruction without depending on the parser for input.
"""

import math

import pytest
from hypothesis import given, settings, strategies as st

from microdyn import minipy_ast as ast
from microdyn.errors import ParseError, UnsupportedFeatureError
from microdyn.parser import parse
from microdyn.pretty import to_source
from microdyn.source import SourceProgram


def parse_text(text):
    return parse(SourceProgram.from_text(text))


# ----- fixed shape checks ----------------------------------------------------

def test_precedence_mul_over_add():
    mod = parse_text("x = 1 + 2 * 3\n")
    value = mod.body[0].value
    assert isinstance(value, ast.BinOp) and value.op == "+"
    assert isinstance(value.right, ast.BinOp) and value.right.op == "*"


def test_parens_override_precedence():
    mod = parse_text("x = (1 + 2) * 3\n")
    value = mod.body[0].value
    assert value.op == "*" and value.left.op == "+"


def test_subtraction_left_associative():
    mod = parse_text("x = a - b - c\n")
    value = mod.body[0].value
    assert value.op == "-" and value.left.op == "-"
    assert value.right.id == "c"


def test_unary_binds_tighter_than_mul():
    mod = parse_text("x = -a * b\n")
    value = mod.body[0].value
    assert value.op == "*" and isinstance(value.left, ast.UnaryOp)


def test_elif_chain_builds_nested_if():
    mod = parse_text(
        "if a > 1:\n    x = 1\nelif a > 2:\n    x = 2\nelse:\n    x = 3\n")
    outer = mod.body[0]
    assert len(outer.orelse) == 1 and isinstance(outer.orelse[0], ast.If)
    assert len(outer.orelse[0].orelse) == 1


def test_for_range_forms():
    mod = parse_text("for i in range(10):\n    pass\n"
                     "for j in range(2, 8):\n    pass\n"
                     "for k in range(0, 10, 2):\n    pass\n")
    assert [len(s.range_args) for s in mod.body] == [1, 2, 3]


def test_del_forms_equivalent():
    a = parse_text("del x\n")
    b = parse_text("del(x)\n")
    assert ast.ast_equal(a, b)


def test_epython_import_is_ignored():
    mod = parse_text("from epython import dynamic\nx = 1\n")
    assert len(mod.body) == 1


def test_decorator_forms():
    mod = parse_text("@dynamic\ndef f():\n    pass\n"
                     "@dynamic(defer=True)\ndef g():\n    pass\n"
                     "@dynamic(defer=False)\ndef h():\n    pass\n"
                     "def k():\n    pass\n")
    flags = [(s.dynamic, s.defer) for s in mod.body]
    assert flags == [(True, False), (True, True), (True, False), (False, False)]


def test_import_header_and_decorators_parse():
    text = ("from epython import dynamic\n\n@dynamic\ndef add(x, y):\n"
            "    return x + y\n\ndef add_nums(count):\n    global add\n"
            "    total = 0\n    for i in range(count):\n"
            "        total = add(total, i)\n    del(add)\n"
            "    add = load_function(\"add\")\n    total = add(total, 1)\n"
            "    del(add)\n    return total\n\nprint(add_nums(3))\n")
    mod = parse_text(text)
    assert [type(s).__name__ for s in mod.body] == \
        ["FunctionDef", "FunctionDef", "ExprStmt"]
    assert mod.body[0].dynamic and not mod.body[1].dynamic


# ----- feature fence ---------------------------------------------------------

UNSUPPORTED = [
    "class A:\n    pass\n",
    "f = lambda x: x\n",
    "x = a and b\n",
    "x = not a\n",
    "x = True\n",
    "x = None\n",
    "x = 1 < y < 2\n",
    "f(a, key=1)\n",
    "x = v[1:2]\n",
    "x = (1, 2)\n",
    "import os\n",
    "from os import path\n",
    "while x:\n    break\n",
    "for i in range(3):\n    continue\n",
    "try:\n    pass\nexcept:\n    pass\n",
    "with open(p) as f:\n    pass\n",
    "assert x\n",
    "x = y if z else w\n",
    "def f(*args):\n    pass\n",
    "def f(x=1):\n    pass\n",
    "x, y = 1, 2\n",
    "@other\ndef f():\n    pass\n",
]


@pytest.mark.parametrize("text", UNSUPPORTED)
def test_recognizable_python_outside_subset_is_fenced(text):
    with pytest.raises(UnsupportedFeatureError):
        parse_text(text)


PARSE_ERRORS = [
    "x = \n",
    "def f(:\n    pass\n",
    "x = 1 +\n",
    "if x\n    pass\n",
    "x = )\n",
    "def 3f():\n    pass\n",
]


@pytest.mark.parametrize("text", PARSE_ERRORS)
def test_malformed_input_raises_parse_error(text):
    with pytest.raises(ParseError):
        parse_text(text)


def test_parse_error_carries_expected_set_and_span():
    try:
        parse_text("if x\n    pass\n")
    except ParseError as e:
        assert e.span is not None
        assert e.expected
    else:
        pytest.fail("no ParseError")


# ----- round-trip property ---------------------------------------------------

NAMES = st.sampled_from(["x", "y", "z", "foo", "bar", "acc", "v0", "tmp1"])
FUNC_NAMES = st.sampled_from(["f", "g", "h", "helper", "step"])
COMPARE_OPS = st.sampled_from(["==", "!=", "<", "<=", ">", ">="])
BIN_OPS = st.sampled_from(["+", "-", "*", "/", "//", "%"])
AUG_OPS = st.sampled_from(["+", "-", "*", "/", "%"])

SAFE_TEXT = st.text(
    alphabet=st.sampled_from(
        "abcdefghijklmnopqrstuvwxyz ABC0123456789_.,:;!?()[]{}<>=+-*/#\n\t'"),
    max_size=12)


def safe_real(x):
    return math.copysign(1.0, x) > 0


REALS = st.floats(min_value=0, max_value=1e16, allow_nan=False,
                  allow_infinity=False).filter(safe_real)


@st.composite
def exprs(draw, depth=3):
    if depth == 0:
        branch = draw(st.integers(0, 2))
        if branch == 0:
            return ast.IntLit(draw(st.integers(0, 10**6)))
        if branch == 1:
            return ast.RealLit(draw(REALS))
        return ast.Name(draw(NAMES))
    branch = draw(st.integers(0, 7))
    sub = exprs(depth=depth - 1)
    if branch == 0:
        return ast.BinOp(draw(BIN_OPS), draw(sub), draw(sub))
    if branch == 1:
        return ast.UnaryOp("-", draw(sub))
    if branch == 2:
        return ast.Compare(draw(COMPARE_OPS), draw(sub), draw(sub))
    if branch == 3:
        return ast.Call(ast.Name(draw(FUNC_NAMES)),
                        draw(st.lists(sub, max_size=3)))
    if branch == 4:
        return ast.Index(ast.Name(draw(NAMES)), draw(sub))
    if branch == 5:
        return ast.ListLit(draw(st.lists(sub, min_size=1, max_size=3)))
    if branch == 6:
        return ast.Attribute(ast.Name(draw(NAMES)),
                             draw(st.sampled_from(["real", "imag"])))
    return draw(exprs(depth=0))


@st.composite
def statements(draw, depth=2):
    sub = statements(depth=depth - 1) if depth else None
    block = st.lists(sub, min_size=1, max_size=3) if depth else st.just([])
    branch = draw(st.integers(0, 9 if depth else 5))
    if branch == 0:
        target = draw(st.sampled_from(["name", "index"]))
        t = (ast.Name(draw(NAMES)) if target == "name"
             else ast.Index(ast.Name(draw(NAMES)), draw(exprs(1))))
        return ast.Assign(t, draw(exprs()))
    if branch == 1:
        return ast.AugAssign(ast.Name(draw(NAMES)), draw(AUG_OPS),
                             draw(exprs()))
    if branch == 2:
        return ast.Return(draw(st.one_of(st.none(), exprs())))
    if branch == 3:
        return ast.ExprStmt(ast.Call(ast.Name(draw(FUNC_NAMES)),
                                     draw(st.lists(exprs(1), max_size=2))))
    if branch == 4:
        return ast.Delete(ast.Name(draw(NAMES)))
    if branch == 5:
        which = draw(st.sampled_from(["global", "nonlocal"]))
        names = draw(st.lists(NAMES, min_size=1, max_size=2, unique=True))
        return (ast.GlobalDecl(names) if which == "global"
                else ast.NonlocalDecl(names))
    if branch == 6:
        orelse = draw(st.one_of(st.just([]), block,
                                st.lists(sub, min_size=1, max_size=1)))
        return ast.If(draw(exprs(1)), draw(block), orelse)
    if branch == 7:
        return ast.While(draw(exprs(1)), draw(block))
    if branch == 8:
        return ast.For(ast.Name(draw(NAMES)),
                       draw(st.lists(exprs(1), min_size=1, max_size=3)),
                       draw(block))
    dynamic = draw(st.booleans())
    defer = draw(st.booleans()) if dynamic else False
    return ast.FunctionDef(draw(FUNC_NAMES),
                           draw(st.lists(NAMES, max_size=3, unique=True)),
                           draw(block), dynamic=dynamic, defer=defer)


@st.composite
def modules(draw):
    return ast.ModuleRoot(draw(st.lists(statements(), min_size=1, max_size=6)))


@settings(max_examples=300, deadline=None)
@given(modules())
def test_pretty_parse_round_trip(mod):
    text = to_source(mod)
    reparsed = parse_text(text)
    assert ast.ast_equal(mod, reparsed), text


@settings(max_examples=100, deadline=None)
@given(modules())
def test_pretty_is_idempotent(mod):
    once = to_source(mod)
    twice = to_source(parse_text(once))
    assert once == twice


@given(st.text(alphabet=st.sampled_from("abcdefgxyz0123456789 =+-*/()[]:.\n'\""),
               max_size=60))
@settings(max_examples=300, deadline=None)
def test_arbitrary_text_raises_only_typed_errors(text):
    from microdyn.errors import MicrodynError
    try:
        parse_text(text)
    except MicrodynError:
        pass


def test_string_round_trip_with_escapes():
    mod = ast.ModuleRoot([ast.ExprStmt(
        ast.Call(ast.Name("print"), [ast.StringLit("a\n\t\\'\"b")]))])
    assert ast.ast_equal(mod, parse_text(to_source(mod)))


@given(SAFE_TEXT)
def test_any_string_literal_round_trips(s):
    mod = ast.ModuleRoot([ast.ExprStmt(
        ast.Call(ast.Name("print"), [ast.StringLit(s)]))])
    assert ast.ast_equal(mod, parse_text(to_source(mod)))
