"""Pretty-printer: AST back to kernel-language source.

Used by tests as the round-trip oracle (parse . print . parse is the
identity on the tree, spans aside) and by the CLI for --dump-ast.
"""

from __future__ import annotations

from . import minipy_ast as ast

_INDENT = "    "

# ordered loosest to tightest
_PREC_COMPARE = 1
_PREC_ADD = 2
_PREC_MUL = 3
_PREC_UNARY = 4
_PREC_POSTFIX = 5

_BIN_PREC = {"+": _PREC_ADD, "-": _PREC_ADD,
             "*": _PREC_MUL, "/": _PREC_MUL, "//": _PREC_MUL, "%": _PREC_MUL}


def to_source(node):
    if isinstance(node, ast.ModuleRoot):
        return "".join(_stmt(s, 0) for s in node.body)
    if isinstance(node, ast.Node) and type(node).__name__ in _STMT_TYPES:
        return _stmt(node, 0)
    return expr_source(node)


def expr_source(node):
    return _expr(node, 0)


def _block(body, level):
    if not body:
        return _INDENT * level + "pass\n"
    return "".join(_stmt(s, level) for s in body)


def _stmt(node, level):
    pad = _INDENT * level
    if isinstance(node, ast.FunctionDef):
        deco = ""
        if node.dynamic:
            deco = pad + ("@dynamic(defer=True)\n" if node.defer else "@dynamic\n")
        head = "%sdef %s(%s):\n" % (pad, node.name, ", ".join(node.params))
        return deco + head + _block(node.body, level + 1)
    if isinstance(node, ast.Assign):
        return "%s%s = %s\n" % (pad, _expr(node.target, 0), _expr(node.value, 0))
    if isinstance(node, ast.AugAssign):
        return "%s%s %s= %s\n" % (pad, _expr(node.target, 0), node.op,
                                  _expr(node.value, 0))
    if isinstance(node, ast.Return):
        if node.value is None:
            return pad + "return\n"
        return "%sreturn %s\n" % (pad, _expr(node.value, 0))
    if isinstance(node, ast.If):
        out = "%sif %s:\n%s" % (pad, _expr(node.cond, 0), _block(node.body, level + 1))
        orelse = node.orelse
        while len(orelse) == 1 and isinstance(orelse[0], ast.If):
            nested = orelse[0]
            out += "%selif %s:\n%s" % (pad, _expr(nested.cond, 0),
                                       _block(nested.body, level + 1))
            orelse = nested.orelse
        if orelse:
            out += "%selse:\n%s" % (pad, _block(orelse, level + 1))
        return out
    if isinstance(node, ast.While):
        return "%swhile %s:\n%s" % (pad, _expr(node.cond, 0),
                                    _block(node.body, level + 1))
    if isinstance(node, ast.For):
        args = ", ".join(_expr(a, 0) for a in node.range_args)
        return "%sfor %s in range(%s):\n%s" % (pad, node.var.id, args,
                                               _block(node.body, level + 1))
    if isinstance(node, ast.ExprStmt):
        return "%s%s\n" % (pad, _expr(node.value, 0))
    if isinstance(node, ast.GlobalDecl):
        return "%sglobal %s\n" % (pad, ", ".join(node.names))
    if isinstance(node, ast.NonlocalDecl):
        return "%snonlocal %s\n" % (pad, ", ".join(node.names))
    if isinstance(node, ast.Delete):
        return "%sdel(%s)\n" % (pad, node.name.id)
    raise TypeError("not a statement node: %r" % node)


def _expr(node, min_prec):
    if isinstance(node, ast.BinOp):
        prec = _BIN_PREC[node.op]
        text = "%s %s %s" % (_expr(node.left, prec), node.op,
                             _expr(node.right, prec + 1))
        return "(%s)" % text if prec < min_prec else text
    if isinstance(node, ast.Compare):
        text = "%s %s %s" % (_expr(node.left, _PREC_ADD), node.op,
                             _expr(node.right, _PREC_ADD))
        return "(%s)" % text if _PREC_COMPARE < min_prec else text
    if isinstance(node, ast.UnaryOp):
        text = "-%s" % _expr(node.operand, _PREC_UNARY)
        return "(%s)" % text if _PREC_UNARY < min_prec else text
    if isinstance(node, ast.Call):
        return "%s(%s)" % (_expr(node.func, _PREC_POSTFIX),
                           ", ".join(_expr(a, 0) for a in node.args))
    if isinstance(node, ast.Index):
        return "%s[%s]" % (_expr(node.value, _PREC_POSTFIX), _expr(node.index, 0))
    if isinstance(node, ast.Attribute):
        return "%s.%s" % (_expr(node.value, _PREC_POSTFIX), node.attr)
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.IntLit):
        return str(node.value)
    if isinstance(node, ast.RealLit):
        return repr(node.value)
    if isinstance(node, ast.StringLit):
        return '"%s"' % _escape(node.value)
    if isinstance(node, ast.ListLit):
        return "[%s]" % ", ".join(_expr(e, 0) for e in node.elts)
    raise TypeError("not an expression node: %r" % node)


def _escape(text):
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return "".join(out)


_STMT_TYPES = {"FunctionDef", "Assign", "AugAssign", "Return", "If", "While",
               "For", "ExprStmt", "GlobalDecl", "NonlocalDecl", "Delete"}
