"""AST for the kernel language.

Nodes carry a (line, col) span for diagnostics.  Semantic analysis
annotates nodes in place (resolved symbols, kinds); structural equality
for round-trip tests goes through ast_equal, which ignores spans and
annotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


@dataclass
class Node:
    span: tuple = field(default=None, kw_only=True, repr=False, compare=False)


# --- statements --------------------------------------------------------------

@dataclass
class ModuleRoot(Node):
    body: list


@dataclass
class FunctionDef(Node):
    name: str
    params: list
    body: list
    dynamic: bool = False
    defer: bool = False


@dataclass
class Assign(Node):
    target: Node  # Name or Index
    value: Node


@dataclass
class AugAssign(Node):
    target: Node
    op: str  # '+', '-', '*', '/', '//', '%'
    value: Node


@dataclass
class Return(Node):
    value: Node  # may be None


@dataclass
class If(Node):
    cond: Node
    body: list
    orelse: list


@dataclass
class While(Node):
    cond: Node
    body: list


@dataclass
class For(Node):
    var: Node  # Name
    range_args: list  # 1..3 expressions
    body: list


@dataclass
class ExprStmt(Node):
    value: Node


@dataclass
class GlobalDecl(Node):
    names: list


@dataclass
class NonlocalDecl(Node):
    names: list


@dataclass
class Delete(Node):
    name: Node  # Name


# --- expressions --------------------------------------------------------------

@dataclass
class Call(Node):
    func: Node
    args: list


@dataclass
class BinOp(Node):
    op: str  # '+', '-', '*', '/', '//', '%'
    left: Node
    right: Node


@dataclass
class UnaryOp(Node):
    op: str  # '-'
    operand: Node


@dataclass
class Compare(Node):
    op: str  # '<', '<=', '>', '>=', '==', '!='
    left: Node
    right: Node


@dataclass
class Name(Node):
    id: str


@dataclass
class IntLit(Node):
    value: int


@dataclass
class RealLit(Node):
    value: float


@dataclass
class StringLit(Node):
    value: str


@dataclass
class ListLit(Node):
    elts: list


@dataclass
class Index(Node):
    value: Node
    index: Node


@dataclass
class Attribute(Node):
    value: Node
    attr: str


def ast_equal(a, b):
    """Structural equality ignoring spans and analysis annotations."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Node):
        for f in fields(a):
            if f.name == "span":
                continue
            if not ast_equal(getattr(a, f.name), getattr(b, f.name)):
                return False
        return True
    if isinstance(a, list):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    return a == b


def children(node):
    """Yield the direct child nodes of a node."""
    for f in fields(node):
        if f.name == "span":
            continue
        child = getattr(node, f.name)
        if isinstance(child, Node):
            yield child
        elif isinstance(child, list):
            for item in child:
                if isinstance(item, Node):
                    yield item


def walk(node):
    """Yield node and every descendant, pre-order."""
    yield node
    for child in children(node):
        yield from walk(child)
