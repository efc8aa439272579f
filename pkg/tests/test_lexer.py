"""Lexer tests.

Token counts for the fixed reference program below were derived with the
stdlib `tokenize` module and frozen here; the test re-derives them at run
time as a cross-check before comparing against our lexer.  Mapping between
the two vocabularies: stdlib NAME covers keywords (ours does too until the
parser intervenes), NUMBER splits into INT/REAL, NL (blank/comment lines)
has no counterpart because our lexer drops those lines entirely, and the
ENCODING token does not exist for us.
"""

import collections
import io
import tokenize

import pytest
from hypothesis import given, strategies as st

from microdyn.errors import ParseError, TabSpaceMixError, UnterminatedStringError
from microdyn.lexer import tokenize as md_tokenize
from microdyn.source import SourceProgram

REFERENCE_PROGRAM = """\
from epython import dynamic

@dynamic
def add(x, y):
    return x + y

def add_nums(count):
    global add
    total = 0
    for i in range(count):
        total = add(total, i)
    del(add)
    add = load_function("add")
    total = add(total, 1)
    del(add)
    return total

print(add_nums(3))
"""

# frozen from stdlib tokenize over REFERENCE_PROGRAM
FROZEN_STDLIB_COUNTS = {
    "NAME": 40,
    "NEWLINE": 15,
    "NL": 3,
    "OP": 32,
    "INDENT": 3,
    "DEDENT": 3,
    "NUMBER": 3,
    "STRING": 1,
    "ENDMARKER": 1,
}


def lex(text):
    return md_tokenize(SourceProgram.from_text(text))


def counts(tokens):
    return collections.Counter(t.type for t in tokens)


def test_frozen_oracle_still_matches_stdlib():
    got = collections.Counter()
    for tok in tokenize.generate_tokens(io.StringIO(REFERENCE_PROGRAM).readline):
        got[tokenize.tok_name[tok.type]] += 1
    got.pop("ENCODING", None)
    assert dict(got) == FROZEN_STDLIB_COUNTS


def test_reference_program_token_counts():
    c = counts(lex(REFERENCE_PROGRAM))
    assert c["NAME"] == FROZEN_STDLIB_COUNTS["NAME"]
    assert c["OP"] == FROZEN_STDLIB_COUNTS["OP"]
    assert c["INT"] + c["REAL"] == FROZEN_STDLIB_COUNTS["NUMBER"]
    assert c["REAL"] == 0
    assert c["STRING"] == FROZEN_STDLIB_COUNTS["STRING"]
    assert c["NEWLINE"] == FROZEN_STDLIB_COUNTS["NEWLINE"]
    assert c["INDENT"] == FROZEN_STDLIB_COUNTS["INDENT"]
    assert c["DEDENT"] == FROZEN_STDLIB_COUNTS["DEDENT"]
    assert c["ENDMARKER"] == 1


def test_number_forms():
    toks = lex("a = 1 + 2.5 + .5 + 1. + 1e5 + 2E-3 + 1.5e+2\n")
    reals = [t.value for t in toks if t.type == "REAL"]
    assert reals == [2.5, 0.5, 1.0, 1e5, 2e-3, 1.5e2]
    ints = [t.value for t in toks if t.type == "INT"]
    assert ints == [1]


def test_string_escapes():
    toks = lex("s = 'a\\n\\t\\\\\\'\"'\n")
    strings = [t.value for t in toks if t.type == "STRING"]
    assert strings == ["a\n\t\\'\""]


def test_double_and_single_quotes_agree():
    a = [t.value for t in lex('x = "hi"\n') if t.type == "STRING"]
    b = [t.value for t in lex("x = 'hi'\n") if t.type == "STRING"]
    assert a == b == ["hi"]


def test_tab_indentation_rejected():
    with pytest.raises(TabSpaceMixError):
        lex("if x:\n\ty = 1\n")


def test_tab_anywhere_rejected():
    with pytest.raises(TabSpaceMixError):
        lex("x =\t1\n")


def test_tab_inside_string_allowed():
    toks = lex("x = 'a\tb'\n")
    assert [t.value for t in toks if t.type == "STRING"] == ["a\tb"]


def test_unterminated_string():
    with pytest.raises(UnterminatedStringError):
        lex("x = 'oops\n")


def test_dedent_mismatch():
    with pytest.raises(ParseError):
        lex("if x:\n    y = 1\n  z = 2\n")


def test_brackets_join_lines():
    toks = lex("x = f(1,\n      2)\ny = [1,\n 2]\n")
    assert counts(toks)["NEWLINE"] == 2
    assert counts(toks)["INDENT"] == 0


def test_comments_and_blank_lines_dropped():
    toks = lex("# leading\nx = 1  # trailing\n\n\ny = 2\n")
    c = counts(toks)
    assert c["NEWLINE"] == 2
    assert c["NAME"] == 2


def test_multichar_operators_lex_as_one():
    toks = [t.value for t in lex("a //= b != c <= d >= e == f // g\n")
            if t.type == "OP"]
    assert toks == ["//=", "!=", "<=", ">=", "==", "//"]


def test_indent_dedent_balance_and_endmarker():
    toks = lex(REFERENCE_PROGRAM)
    c = counts(toks)
    assert c["INDENT"] == c["DEDENT"]
    assert toks[-1].type == "ENDMARKER"


NAME_POOL = st.sampled_from(["x", "y", "foo", "bar", "acc", "v0", "tmp1"])


@st.composite
def random_flat_program(draw):
    lines = []
    for _ in range(draw(st.integers(1, 8))):
        name = draw(NAME_POOL)
        value = draw(st.integers(0, 10**9))
        lines.append("%s = %d" % (name, value))
    return "\n".join(lines) + "\n"


@given(random_flat_program())
def test_spans_are_sound_and_monotone(text):
    src = SourceProgram.from_text(text)
    toks = md_tokenize(src)
    prev = (0, -1)
    for t in toks:
        line, col = t.span
        assert 1 <= line <= src.line_count + 1
        if line <= src.line_count:
            assert 0 <= col <= len(src.line(line))
        assert (line, col) >= prev
        prev = (line, col)


@given(st.integers(0, 2**63 - 1))
def test_integer_literals_round_trip(value):
    toks = lex("x = %d\n" % value)
    assert [t.value for t in toks if t.type == "INT"] == [value]


@given(st.floats(min_value=0, max_value=1e300, allow_nan=False,
                 allow_infinity=False))
def test_real_literals_round_trip_via_repr(value):
    toks = lex("x = %s\n" % repr(value))
    got = [t.value for t in toks if t.type in ("REAL", "INT")]
    assert len(got) == 1 and float(got[0]) == value
