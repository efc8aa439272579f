"""Line-oriented tokenizer for the kernel language.

Produces NAME/INT/REAL/STRING/OP tokens plus NEWLINE and synthesized
INDENT/DEDENT pairs, ending with ENDMARKER.  Indentation is spaces-only:
a tab anywhere outside a string literal is TabSpaceMixError.  Newlines
inside ( ) or [ ] are joined implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, TabSpaceMixError, UnterminatedStringError

NAME = "NAME"
INT = "INT"
REAL = "REAL"
STRING = "STRING"
OP = "OP"
NEWLINE = "NEWLINE"
INDENT = "INDENT"
DEDENT = "DEDENT"
ENDMARKER = "ENDMARKER"

# longest first so '//' wins over '/'
_OPERATORS = [
    "==", "!=", "<=", ">=", "//=", "//", "+=", "-=", "*=", "/=", "%=",
    "(", ")", "[", "]", ",", ":", "=", "<", ">", "+", "-", "*", "/", "%",
    "@", ".",
]
_OPERATORS.sort(key=len, reverse=True)

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"', "0": "\0"}


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    span: tuple  # (line, col), 1-based line

    def __repr__(self):
        return "Token(%s, %r, %d:%d)" % (self.type, self.value, *self.span)


def _is_name_start(ch):
    return ch.isalpha() or ch == "_"


def tokenize(source):
    """Tokenize a SourceProgram (or plain string) into a list of Tokens."""
    text = source if isinstance(source, str) else source.text
    lines = text.splitlines()
    tokens = []
    indents = [0]
    depth = 0  # open bracket depth; newlines are joined while > 0

    for lineno, line in enumerate(lines, start=1):
        col = 0
        if depth == 0:
            while col < len(line) and line[col] == " ":
                col += 1
            if col < len(line) and line[col] == "\t":
                raise TabSpaceMixError("tab in indentation", (lineno, col))
            if col >= len(line) or line[col] == "#":
                continue  # blank or comment-only line
            width = col
            if width > indents[-1]:
                indents.append(width)
                tokens.append(Token(INDENT, "", (lineno, 0)))
            else:
                while width < indents[-1]:
                    indents.pop()
                    tokens.append(Token(DEDENT, "", (lineno, 0)))
                if width != indents[-1]:
                    raise ParseError("unindent does not match any outer level",
                                     (lineno, col))

        emitted = False
        while col < len(line):
            ch = line[col]
            if ch == " ":
                col += 1
                continue
            if ch == "\t":
                raise TabSpaceMixError("tab character in source", (lineno, col))
            if ch == "#":
                break
            span = (lineno, col)
            if _is_name_start(ch):
                end = col + 1
                while end < len(line) and (line[end].isalnum() or line[end] == "_"):
                    end += 1
                tokens.append(Token(NAME, line[col:end], span))
                col = end
            elif ch.isdigit() or (ch == "." and col + 1 < len(line) and line[col + 1].isdigit()):
                col = _scan_number(line, col, span, tokens)
            elif ch in "'\"":
                col = _scan_string(line, col, span, tokens)
            else:
                for op in _OPERATORS:
                    if line.startswith(op, col):
                        if op in "([":
                            depth += 1
                        elif op in ")]":
                            depth = max(0, depth - 1)
                        tokens.append(Token(OP, op, span))
                        col += len(op)
                        break
                else:
                    raise ParseError("unexpected character %r" % ch, span)
            emitted = True

        if depth == 0 and emitted:
            tokens.append(Token(NEWLINE, "", (lineno, len(line))))

    last = (len(lines) + 1, 0)
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token(DEDENT, "", last))
    tokens.append(Token(ENDMARKER, "", last))
    return tokens


def _scan_number(line, col, span, tokens):
    end = col
    is_real = False
    while end < len(line) and line[end].isdigit():
        end += 1
    if end < len(line) and line[end] == ".":
        # '1.'  '.5'  '1.5' are all reals; a bare '.' never reaches here
        is_real = True
        end += 1
        while end < len(line) and line[end].isdigit():
            end += 1
    if end < len(line) and line[end] in "eE":
        probe = end + 1
        if probe < len(line) and line[probe] in "+-":
            probe += 1
        if probe < len(line) and line[probe].isdigit():
            is_real = True
            end = probe
            while end < len(line) and line[end].isdigit():
                end += 1
    text = line[col:end]
    tokens.append(Token(REAL, float(text), span) if is_real
                  else Token(INT, int(text), span))
    return end


def _scan_string(line, col, span, tokens):
    quote = line[col]
    i = col + 1
    out = []
    while i < len(line):
        ch = line[i]
        if ch == "\\":
            if i + 1 >= len(line):
                break
            out.append(_ESCAPES.get(line[i + 1], line[i + 1]))
            i += 2
            continue
        if ch == quote:
            tokens.append(Token(STRING, "".join(out), span))
            return i + 1
        out.append(ch)
        i += 1
    raise UnterminatedStringError("string literal not closed", span)
