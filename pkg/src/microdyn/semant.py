"""Scope resolution, kind inference, and dispatch classification.

Variables live in frames addressed by (relative lexical level, offset);
offsets are assigned parameters-first, then locals in order of first
binding, densely from 0.  Kinds (Int, Real, Complex, Vector[elem], Proc,
Object) are inferred per scope by a monotone fixpoint: joining Int with
Real promotes to Real, any other mixed join is an error.  Functions are
classified StaticDispatch / DynamicDispatch / DynamicLoad; @dynamic
forces DynamicLoad, and StaticDispatch holds exactly when a function has
zero non-argument locals, is not (mutually) recursive, is never used as
a value, and references no enclosing non-global scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import minipy_ast as ast
from .errors import (AmbiguousKindError, DeleteNonProcError, KindConflictError,
                     NestedDynamicError, NonlocalWithoutBindingError,
                     NonTopLevelDynamicError, RedeclarationKindError,
                     UnboundNameError, UnsupportedFeatureError)

INT = "Int"
REAL = "Real"
COMPLEX = "Complex"
OBJECT = "Object"
STR = "Str"      # string literals only; no variable may hold one
VOID = "Void"    # call producing no value

BUILTINS = ("print", "len", "load_function", "range")

STATIC_DISPATCH = "StaticDispatch"
DYNAMIC_DISPATCH = "DynamicDispatch"
DYNAMIC_LOAD = "DynamicLoad"


def vector_of(elem):
    return ("Vector", elem)


def proc_of(func_index):
    return ("Proc", func_index)


def is_vector(kind):
    return isinstance(kind, tuple) and kind[0] == "Vector"


def is_proc(kind):
    return isinstance(kind, tuple) and kind[0] == "Proc"


def kind_name(kind):
    if kind is None:
        return "?"
    if is_vector(kind):
        return "Vector[%s]" % (kind[1] or "?")
    if is_proc(kind):
        return "Proc"
    return kind


@dataclass
class SymbolEntry:
    name: str
    def_level: int
    offset: int
    kind: object = None
    is_param: bool = False
    func_index: int = None   # set when bound by a def
    bind_count: int = 0
    deleted: bool = False


@dataclass
class Scope:
    node: object
    parent: object
    level: int
    symbols: dict = field(default_factory=dict)
    globals: set = field(default_factory=set)
    nonlocals: set = field(default_factory=set)
    children: list = field(default_factory=list)
    func_index: int = None  # None for module scope

    def bind(self, name, span, is_param=False):
        if name in BUILTINS or name == "dynamic":
            raise RedeclarationKindError("cannot rebind builtin %r" % name, span)
        sym = self.symbols.get(name)
        if sym is None:
            sym = SymbolEntry(name, self.level, len(self.symbols), is_param=is_param)
            self.symbols[name] = sym
        sym.bind_count += 1
        return sym


@dataclass
class FunctionInfo:
    index: int
    node: object
    scope: Scope
    name: str
    qualname: str
    mangled: str
    def_level: int
    arity: int
    parent_index: int = None
    dynamic: bool = False
    defer: bool = False
    in_dynamic_set: bool = False
    value_referenced: bool = False
    has_uprefs: bool = False
    recursive: bool = False
    classification: str = None
    ret_kind: object = None

    @property
    def slot_count(self):
        return len(self.scope.symbols)

    @property
    def body_level(self):
        return self.def_level + 1


@dataclass
class ProgramAnalysis:
    module: object
    module_scope: Scope
    scopes: list
    functions: list
    max_lex_levels: int

    @property
    def module_slot_count(self):
        return len(self.module_scope.symbols)

    @property
    def dynamic_set(self):
        return [f for f in self.functions if f.in_dynamic_set]

    def function_named(self, qualname):
        for f in self.functions:
            if f.qualname == qualname:
                return f
        return None


def _creates_vector(node):
    """A fresh vector allocation (list literal or literal replication)."""
    if isinstance(node, ast.ListLit):
        return True
    return (isinstance(node, ast.BinOp) and node.op == "*"
            and isinstance(node.left, ast.ListLit))


def analyze(module):
    """Run every pass over a parsed ModuleRoot and return ProgramAnalysis."""
    return _Analyzer(module).run()


def resolve_scopes(module):
    """Scope/offset resolution only (kinds left unset); used by oracle tests."""
    a = _Analyzer(module)
    a.build_scopes()
    a.resolve_names()
    return ProgramAnalysis(module, a.module_scope, a.scopes, a.functions,
                           compute_max_lex_levels(a.scopes))


def compute_max_lex_levels(scopes):
    # 1 + deepest nesting: a flat module needs exactly one display entry
    return max(s.level for s in scopes) + 1


def dump_symbols(analysis):
    """Debug dump: one `name defLevel offset kind dispatch` line per symbol."""
    lines = []
    for scope in analysis.scopes:
        for sym in scope.symbols.values():
            if sym.func_index is not None:
                dispatch = analysis.functions[sym.func_index].classification or "-"
            else:
                dispatch = "-"
            lines.append("%s %d %d %s %s" % (sym.name, sym.def_level, sym.offset,
                                             kind_name(sym.kind), dispatch))
    return "\n".join(lines) + "\n"


class _Analyzer:
    def __init__(self, module):
        self.module = module
        self.module_scope = Scope(module, None, 0)
        self.scopes = [self.module_scope]
        self.functions = []
        self.calls = []            # (call node, enclosing func index or None)
        self.changed = False
        self.final = False  # fixpoint converged; Void misuse now reportable
        # union-find over function signatures
        self.sig_parent = []
        self.sigs = []

    # ----- pass 1: scopes, bindings, offsets --------------------------------

    def run(self):
        self.build_scopes()
        self.resolve_names()
        self.infer_kinds()
        self.classify()
        return ProgramAnalysis(self.module, self.module_scope, self.scopes,
                               self.functions, compute_max_lex_levels(self.scopes))

    def build_scopes(self):
        self._collect(self.module.body, self.module_scope, "")
        for f in self.functions:
            parent = f.parent_index
            while parent is not None:
                if self.functions[parent].dynamic:
                    f.in_dynamic_set = True
                parent = self.functions[parent].parent_index
            if f.dynamic:
                f.in_dynamic_set = True
        for scope in self.scopes:
            for name in sorted(scope.nonlocals):
                s = scope.parent
                while s is not None and s.level > 0:
                    if name in s.symbols:
                        break
                    s = s.parent
                else:
                    raise NonlocalWithoutBindingError(
                        "no enclosing function binding for nonlocal %r" % name,
                        scope.node.span)

    def _collect(self, body, scope, qualprefix):
        for stmt in body:
            self._collect_stmt(stmt, scope, qualprefix)

    def _collect_stmt(self, stmt, scope, qualprefix):
        if isinstance(stmt, ast.FunctionDef):
            self._collect_funcdef(stmt, scope, qualprefix)
        elif isinstance(stmt, ast.Assign):
            if isinstance(stmt.target, ast.Name):
                self._bind_assigned(stmt.target.id, stmt.span, scope)
        elif isinstance(stmt, ast.AugAssign):
            if isinstance(stmt.target, ast.Name):
                self._bind_assigned(stmt.target.id, stmt.span, scope)
        elif isinstance(stmt, ast.For):
            self._bind_assigned(stmt.var.id, stmt.span, scope)
            self._collect(stmt.body, scope, qualprefix)
        elif isinstance(stmt, ast.If):
            self._collect(stmt.body, scope, qualprefix)
            self._collect(stmt.orelse, scope, qualprefix)
        elif isinstance(stmt, ast.While):
            self._collect(stmt.body, scope, qualprefix)
        elif isinstance(stmt, ast.GlobalDecl):
            if scope.level == 0:
                return  # no-op at module level
            for name in stmt.names:
                if name in scope.symbols:
                    raise RedeclarationKindError(
                        "%r assigned before global declaration" % name, stmt.span)
                scope.globals.add(name)
        elif isinstance(stmt, ast.NonlocalDecl):
            if scope.level == 0:
                raise NonlocalWithoutBindingError(
                    "nonlocal at module level", stmt.span)
            for name in stmt.names:
                if name in scope.symbols:
                    raise RedeclarationKindError(
                        "%r assigned before nonlocal declaration" % name, stmt.span)
                scope.nonlocals.add(name)
        elif isinstance(stmt, ast.Return):
            if scope.level == 0:
                raise UnsupportedFeatureError("return outside a function", stmt.span)

    def _bind_assigned(self, name, span, scope):
        if name in scope.globals:
            # writing through `global` creates the module binding on demand
            if name not in self.module_scope.symbols:
                self.module_scope.bind(name, span)
                self.module_scope.symbols[name].bind_count = 0
            self.module_scope.symbols[name].bind_count += 1
            return
        if name in scope.nonlocals:
            return  # resolved (and counted) against the outer scope later
        scope.bind(name, span)

    def _collect_funcdef(self, node, scope, qualprefix):
        if node.dynamic and scope.level != 0:
            enclosing = scope
            while enclosing.func_index is not None:
                if self.functions[enclosing.func_index].dynamic:
                    raise NestedDynamicError(
                        "@dynamic function nested inside a dynamic function",
                        node.span)
                enclosing = enclosing.parent
            raise NonTopLevelDynamicError(
                "@dynamic only applies to top-level functions", node.span)
        if node.name in scope.symbols:
            raise RedeclarationKindError(
                "duplicate definition of %r" % node.name, node.span)
        if node.name in scope.globals or node.name in scope.nonlocals:
            raise RedeclarationKindError(
                "def %r conflicts with a global/nonlocal declaration" % node.name,
                node.span)
        index = len(self.functions)
        sym = scope.bind(node.name, node.span)
        sym.func_index = index
        child = Scope(node, scope, scope.level + 1, func_index=index)
        scope.children.append(child)
        self.scopes.append(child)
        qualname = qualprefix + node.name
        info = FunctionInfo(index, node, child, node.name, qualname,
                            "oly_e%d" % (index + 1), scope.level, len(node.params),
                            parent_index=scope.func_index,
                            dynamic=node.dynamic, defer=node.defer)
        self.functions.append(info)
        node.info = info
        self.sig_parent.append(index)
        self.sigs.append({"params": [None] * len(node.params), "ret": None,
                          "returns_value": False})
        seen = set()
        for p in node.params:
            if p in seen:
                raise RedeclarationKindError("duplicate parameter %r" % p, node.span)
            seen.add(p)
            child.bind(p, node.span, is_param=True)
        self._collect(node.body, child, qualname + ".")

    # ----- pass 2: name resolution and textual first-use check --------------

    def resolve_names(self):
        self._resolve_block(self.module.body, self.module_scope,
                            set(self.module_scope.symbols) - self._unassigned(self.module_scope))
        # walk function bodies in definition order
        for f in self.functions:
            assigned = {p for p in f.node.params}
            self._resolve_block(f.node.body, f.scope, assigned)

    def _unassigned(self, scope):
        # names bound only by defs are assigned where the def executes;
        # everything else starts unassigned for the textual check
        return {n for n, s in scope.symbols.items() if s.func_index is None}

    def _resolve_block(self, body, scope, assigned):
        for stmt in body:
            self._resolve_stmt(stmt, scope, assigned)

    def _resolve_stmt(self, stmt, scope, assigned):
        if isinstance(stmt, ast.FunctionDef):
            assigned.add(stmt.name)
            return  # nested body walked from resolve_names with its own scope
        if isinstance(stmt, ast.Assign):
            self._resolve_expr(stmt.value, scope, assigned)
            self._resolve_target(stmt.target, scope, assigned)
        elif isinstance(stmt, ast.AugAssign):
            if isinstance(stmt.target, ast.Name):
                self._resolve_expr(stmt.target, scope, assigned)  # read first
            self._resolve_expr(stmt.value, scope, assigned)
            self._resolve_target(stmt.target, scope, assigned)
        elif isinstance(stmt, ast.Return):
            if stmt.value is not None:
                self._resolve_expr(stmt.value, scope, assigned)
        elif isinstance(stmt, ast.If):
            self._resolve_expr(stmt.cond, scope, assigned)
            # a branch may not execute: copies keep the check conservative
            a2 = set(assigned)
            self._resolve_block(stmt.body, scope, a2)
            a3 = set(assigned)
            self._resolve_block(stmt.orelse, scope, a3)
            assigned |= (a2 & a3)
        elif isinstance(stmt, ast.While):
            self._resolve_expr(stmt.cond, scope, assigned)
            self._resolve_block(stmt.body, scope, set(assigned))
        elif isinstance(stmt, ast.For):
            for arg in stmt.range_args:
                self._resolve_expr(arg, scope, assigned)
            self._resolve_target(stmt.var, scope, assigned)
            self._resolve_block(stmt.body, scope, set(assigned))
        elif isinstance(stmt, ast.ExprStmt):
            self._resolve_expr(stmt.value, scope, assigned)
        elif isinstance(stmt, ast.Delete):
            sym = self._resolve_name(stmt.name, scope)
            sym.deleted = True
        elif isinstance(stmt, (ast.GlobalDecl, ast.NonlocalDecl)):
            pass

    def _resolve_target(self, target, scope, assigned):
        if isinstance(target, ast.Name):
            self._resolve_name(target, scope)
            assigned.add(target.id)
        elif isinstance(target, ast.Index):
            self._resolve_expr(target.value, scope, assigned)
            self._resolve_expr(target.index, scope, assigned)
        elif isinstance(target, ast.Attribute):
            self._resolve_expr(target.value, scope, assigned)

    def _resolve_expr(self, node, scope, assigned):
        if isinstance(node, ast.Name):
            sym = self._resolve_name(node, scope)
            if (sym.def_level == scope.level and not sym.is_param
                    and node.id not in assigned):
                raise AmbiguousKindError(
                    "%r used before any assignment in its scope" % node.id,
                    node.span)
            if sym.func_index is not None:
                self.functions[sym.func_index].value_referenced = True
        elif isinstance(node, ast.Call):
            self._resolve_call(node, scope, assigned)
        elif isinstance(node, ast.BinOp):
            self._resolve_expr(node.left, scope, assigned)
            self._resolve_expr(node.right, scope, assigned)
        elif isinstance(node, ast.UnaryOp):
            self._resolve_expr(node.operand, scope, assigned)
        elif isinstance(node, ast.Compare):
            self._resolve_expr(node.left, scope, assigned)
            self._resolve_expr(node.right, scope, assigned)
        elif isinstance(node, ast.Index):
            self._resolve_expr(node.value, scope, assigned)
            self._resolve_expr(node.index, scope, assigned)
        elif isinstance(node, ast.Attribute):
            self._resolve_expr(node.value, scope, assigned)
        elif isinstance(node, ast.ListLit):
            for e in node.elts:
                self._resolve_expr(e, scope, assigned)
        # literals need no resolution

    def _resolve_call(self, node, scope, assigned):
        node.builtin = None
        node.group_root = None
        node.direct_target = None
        func = node.func
        if isinstance(func, ast.Name) and not self._is_bound(func.id, scope):
            if func.id == "range":
                raise UnsupportedFeatureError(
                    "range is only valid as a for-loop iterator", node.span)
            if func.id in BUILTINS:
                node.builtin = func.id
                self._check_builtin_call(node)
                for arg in node.args:
                    self._resolve_expr(arg, scope, assigned)
                return
        if isinstance(func, ast.Name):
            sym = self._resolve_name(func, scope)
            if (sym.def_level == scope.level and not sym.is_param
                    and sym.func_index is None and func.id not in assigned):
                raise AmbiguousKindError(
                    "%r used before any assignment in its scope" % func.id,
                    func.span)
            if sym.func_index is not None and sym.bind_count == 1 and not sym.deleted:
                node.direct_target = sym.func_index
        else:
            self._resolve_expr(func, scope, assigned)
        for arg in node.args:
            self._resolve_expr(arg, scope, assigned)
        self.calls.append((node, scope.func_index))

    def _check_builtin_call(self, node):
        if node.builtin == "load_function":
            if len(node.args) != 1 or not isinstance(node.args[0], ast.StringLit):
                raise UnsupportedFeatureError(
                    "load_function takes a single literal function name", node.span)
            target = node.args[0].value
            match = [f for f in self.functions
                     if f.qualname == target and f.def_level == 0]
            if not match or not match[0].in_dynamic_set:
                raise UnboundNameError(
                    "load_function names no @dynamic top-level function: %r"
                    % target, node.span)
            node.load_target = match[0].index
        elif node.builtin == "len":
            if len(node.args) != 1:
                raise KindConflictError("len takes one argument", node.span)

    def _is_bound(self, name, scope):
        s = scope
        while s is not None:
            if name in s.symbols and not (name in scope.globals and s.level != 0):
                return True
            s = s.parent
        return False

    def _resolve_name(self, node, scope):
        name = node.id
        if name in BUILTINS:
            raise UnsupportedFeatureError(
                "builtin %r may only be called" % name, node.span)
        if name in scope.globals:
            sym = self.module_scope.symbols.get(name)
            if sym is None:
                raise UnboundNameError("global %r is never assigned" % name,
                                       node.span)
        elif name in scope.nonlocals:
            sym = None
            s = scope.parent
            while s is not None and s.level > 0:
                if name in s.symbols:
                    sym = s.symbols[name]
                    break
                s = s.parent
            if sym is None:
                raise NonlocalWithoutBindingError(
                    "no enclosing function binding for nonlocal %r" % name,
                    node.span)
        else:
            sym = None
            s = scope
            while s is not None:
                if name in s.symbols:
                    sym = s.symbols[name]
                    break
                s = s.parent
            if sym is None:
                raise UnboundNameError("unbound name %r" % name, node.span)
        node.sym = sym
        node.rel_level = scope.level - sym.def_level
        return sym

    # ----- pass 3: kind inference fixpoint -----------------------------------

    def _find(self, i):
        while self.sig_parent[i] != i:
            self.sig_parent[i] = self.sig_parent[self.sig_parent[i]]
            i = self.sig_parent[i]
        return i

    def _union(self, a, b, span):
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return ra
        sa, sb = self.sigs[ra], self.sigs[rb]
        if len(sa["params"]) != len(sb["params"]):
            raise KindConflictError(
                "functions of different arity flow into one variable", span)
        self.sig_parent[rb] = ra
        for i, k in enumerate(sb["params"]):
            sa["params"][i] = self._join(sa["params"][i], k, span)
        sa["ret"] = self._join(sa["ret"], sb["ret"], span)
        sa["returns_value"] = sa["returns_value"] or sb["returns_value"]
        self.changed = True  # a real merge always changes the group structure
        return ra

    def _join(self, a, b, span, assign=False):
        # pure lattice join; callers that persist the result track changes
        if a is None:
            return b
        if b is None:
            return a
        if a == b:
            return a
        if {a, b} == {INT, REAL}:
            return REAL
        if is_vector(a) and is_vector(b):
            return vector_of(self._join(a[1], b[1], span))
        if is_proc(a) and is_proc(b):
            return proc_of(self._union(a[1], b[1], span))
        err = RedeclarationKindError if assign else KindConflictError
        raise err("kinds %s and %s do not mix" % (kind_name(a), kind_name(b)),
                  span)

    def _join_sym(self, sym, kind, span):
        new = self._join(sym.kind, kind, span, assign=True)
        if new != sym.kind:
            sym.kind = new
            self.changed = True

    def infer_kinds(self):
        for f in self.functions:
            sym = self._owner_symbol(f)
            sym.kind = proc_of(f.index)
        for _ in range(200):
            self.changed = False
            self._infer_block(self.module.body, self.module_scope)
            for f in self.functions:
                self._sync_params(f)
                self._infer_block(f.node.body, f.scope)
                self._sync_params(f)
            if not self.changed:
                break
        else:
            raise KindConflictError("kind inference did not converge", (1, 0))
        # one more pass with unknowns pinned down: a call with no return
        # statement seen is now definitely Void, so misuse reports here
        self.final = True
        self._infer_block(self.module.body, self.module_scope)
        for f in self.functions:
            self._infer_block(f.node.body, f.scope)
        self._finalize_kinds()

    def _sync_params(self, f):
        # param slots and the shared signature cells promote together: call
        # sites widen the slot kind, in-body reassignment widens the signature
        sig = self.sigs[self._find(f.index)]
        for i, p in enumerate(f.node.params):
            sym = f.scope.symbols[p]
            merged = self._join(sig["params"][i], sym.kind, f.node.span)
            if merged != sig["params"][i]:
                sig["params"][i] = merged
                self.changed = True
            if merged != sym.kind:
                sym.kind = merged
                self.changed = True

    def _owner_symbol(self, f):
        scope = f.scope.parent
        return scope.symbols[f.name]

    def _finalize_kinds(self):
        for f in self.functions:
            sig = self.sigs[self._find(f.index)]
            for i, k in enumerate(sig["params"]):
                if k is None:
                    raise AmbiguousKindError(
                        "parameter %r of %r has no call fixing its kind"
                        % (f.node.params[i], f.qualname), f.node.span)
                f.scope.symbols[f.node.params[i]].kind = k
            f.ret_kind = sig["ret"] if sig["ret"] is not None else VOID
        for scope in self.scopes:
            for sym in scope.symbols.values():
                if sym.kind is None:
                    raise AmbiguousKindError(
                        "kind of %r was never fixed by an assignment" % sym.name,
                        scope.node.span)
                if is_vector(sym.kind) and sym.kind[1] is None:
                    raise AmbiguousKindError(
                        "element kind of vector %r was never fixed" % sym.name,
                        scope.node.span)

    def _infer_block(self, body, scope):
        for stmt in body:
            self._infer_stmt(stmt, scope)

    def _infer_stmt(self, stmt, scope):
        if isinstance(stmt, ast.FunctionDef):
            return
        if isinstance(stmt, ast.Assign):
            value = self._eval(stmt.value, scope)
            self._assign_kind(stmt.target, value, scope, stmt.span,
                              value_node=stmt.value)
        elif isinstance(stmt, ast.AugAssign):
            current = self._eval(stmt.target, scope)
            value = self._eval(stmt.value, scope)
            combined = self._binop_kind(stmt.op, current, value, stmt.span)
            self._assign_kind(stmt.target, combined, scope, stmt.span)
        elif isinstance(stmt, ast.Return):
            sig = self.sigs[self._find(scope.func_index)]
            if stmt.value is not None:
                kind = self._eval(stmt.value, scope)
                if kind == VOID or kind == STR:
                    raise KindConflictError("cannot return %s" % kind_name(kind),
                                            stmt.span)
                sig["returns_value"] = True
                new = self._join(sig["ret"], kind, stmt.span)
                if new != sig["ret"]:
                    sig["ret"] = new
                    self.changed = True
                if (self.final and is_vector(kind)
                        and not _creates_vector(stmt.value)
                        and kind != sig["ret"]):
                    raise KindConflictError(
                        "returned vector element kind %s does not match the "
                        "function's %s" % (kind_name(kind),
                                           kind_name(sig["ret"])), stmt.span)
        elif isinstance(stmt, ast.If):
            self._condition(stmt.cond, scope)
            self._infer_block(stmt.body, scope)
            self._infer_block(stmt.orelse, scope)
        elif isinstance(stmt, ast.While):
            self._condition(stmt.cond, scope)
            self._infer_block(stmt.body, scope)
        elif isinstance(stmt, ast.For):
            for arg in stmt.range_args:
                self._expect(arg, INT, scope, "range argument")
            self._assign_kind(stmt.var, INT, scope, stmt.span)
            self._infer_block(stmt.body, scope)
        elif isinstance(stmt, ast.ExprStmt):
            self._eval(stmt.value, scope)
        elif isinstance(stmt, ast.Delete):
            kind = stmt.name.sym.kind
            if kind is not None and not is_proc(kind):
                raise DeleteNonProcError(
                    "del applies to Proc values, not %s" % kind_name(kind),
                    stmt.span)

    def _condition(self, node, scope):
        kind = self._eval(node, scope)
        if kind is not None and kind != INT:
            raise KindConflictError(
                "condition must be Int (comparisons yield Int), got %s"
                % kind_name(kind), node.span)

    def _expect(self, node, want, scope, what):
        kind = self._eval(node, scope)
        if kind is not None and kind != want:
            raise KindConflictError("%s must be %s, got %s"
                                    % (what, want, kind_name(kind)), node.span)
        return kind

    def _assign_kind(self, target, value, scope, span, value_node=None):
        if value == STR:
            raise UnsupportedFeatureError(
                "string values cannot be stored in variables", span)
        if value == VOID:
            raise KindConflictError("assigning a call that returns no value", span)
        if isinstance(target, ast.Name):
            if value is not None:
                self._join_sym(target.sym, value, span)
                # vectors are heap references: an alias must agree exactly on
                # element kind; a fresh literal instead allocates at the
                # slot's kind, so it is exempt
                if (self.final and is_vector(value)
                        and not _creates_vector(value_node)
                        and value != target.sym.kind):
                    raise KindConflictError(
                        "vector alias changes element kind from %s to %s"
                        % (kind_name(value), kind_name(target.sym.kind)), span)
            target.kind = target.sym.kind
        elif isinstance(target, ast.Index):
            base = self._eval(target.value, scope)
            self._expect(target.index, INT, scope, "vector index")
            if base is None:
                return
            if not is_vector(base):
                raise KindConflictError("indexing into %s" % kind_name(base), span)
            if value is not None:
                if value not in (INT, REAL):
                    raise KindConflictError(
                        "vector elements must be Int or Real", span)
                self._promote_vector_elem(target.value, value, span)
        elif isinstance(target, ast.Attribute):
            base = self._eval(target.value, scope)
            if base is not None and base != COMPLEX:
                raise KindConflictError(
                    "attribute assignment needs a Complex value", span)
            if target.attr not in ("real", "imag"):
                raise KindConflictError("unknown complex field %r" % target.attr,
                                        span)

    def _promote_vector_elem(self, base_expr, elem, span):
        # vector kinds live on symbols; promotion reaches through the name
        if isinstance(base_expr, ast.Name):
            sym = base_expr.sym
            new = self._join(sym.kind, vector_of(elem), span)
            if new != sym.kind:
                sym.kind = new
                self.changed = True

    def _eval(self, node, scope):
        kind = self._eval_inner(node, scope)
        node.kind = kind
        return kind

    def _eval_inner(self, node, scope):
        if isinstance(node, ast.IntLit):
            return INT
        if isinstance(node, ast.RealLit):
            return REAL
        if isinstance(node, ast.StringLit):
            return STR
        if isinstance(node, ast.Name):
            return node.sym.kind
        if isinstance(node, ast.UnaryOp):
            kind = self._eval(node.operand, scope)
            if kind not in (INT, REAL, None):
                raise KindConflictError("unary minus needs a number", node.span)
            return kind
        if isinstance(node, ast.BinOp):
            if node.op == "*" and isinstance(node.left, ast.ListLit):
                elem = self._list_elem_kind(node.left, scope)
                self._expect(node.right, INT, scope, "replication count")
                return vector_of(elem)
            left = self._eval(node.left, scope)
            right = self._eval(node.right, scope)
            return self._binop_kind(node.op, left, right, node.span)
        if isinstance(node, ast.Compare):
            left = self._eval(node.left, scope)
            right = self._eval(node.right, scope)
            for k in (left, right):
                if k not in (INT, REAL, None):
                    raise KindConflictError(
                        "comparison needs numbers, got %s" % kind_name(k),
                        node.span)
            return INT
        if isinstance(node, ast.ListLit):
            return vector_of(self._list_elem_kind(node, scope))
        if isinstance(node, ast.Index):
            base = self._eval(node.value, scope)
            self._expect(node.index, INT, scope, "vector index")
            if base is None:
                return None
            if not is_vector(base):
                raise KindConflictError("indexing into %s" % kind_name(base),
                                        node.span)
            return base[1]
        if isinstance(node, ast.Attribute):
            base = self._eval(node.value, scope)
            if base is None:
                return None
            if base != COMPLEX or node.attr not in ("real", "imag"):
                raise KindConflictError("attribute access needs a Complex value",
                                        node.span)
            return REAL
        if isinstance(node, ast.Call):
            return self._eval_call(node, scope)
        raise KindConflictError("unsupported expression", node.span)

    def _list_elem_kind(self, node, scope):
        if not node.elts:
            raise AmbiguousKindError("empty list has no element kind", node.span)
        elem = None
        for e in node.elts:
            k = self._eval(e, scope)
            if k not in (INT, REAL, None):
                raise KindConflictError("vector elements must be Int or Real",
                                        e.span)
            elem = self._join(elem, k, e.span)
        return elem

    def _eval_call(self, node, scope):
        if node.builtin == "print":
            for arg in node.args:
                kind = self._eval(arg, scope)
                if kind not in (INT, REAL, STR, None):
                    raise KindConflictError(
                        "print accepts Int, Real, or string literals, got %s"
                        % kind_name(kind), arg.span)
            node.ret_kind = VOID
            return VOID
        if node.builtin == "len":
            base = self._eval(node.args[0], scope)
            if base is not None and not is_vector(base):
                raise KindConflictError("len needs a vector", node.span)
            node.ret_kind = INT
            return INT
        if node.builtin == "load_function":
            node.ret_kind = proc_of(node.load_target)
            return node.ret_kind
        func_kind = self._eval(node.func, scope)
        if func_kind is None:
            return None
        if not is_proc(func_kind):
            raise KindConflictError("calling a %s value" % kind_name(func_kind),
                                    node.span)
        root = self._find(func_kind[1])
        node.group_root = root
        sig = self.sigs[root]
        if len(sig["params"]) != len(node.args):
            raise KindConflictError(
                "call passes %d arguments, function takes %d"
                % (len(node.args), len(sig["params"])), node.span)
        for i, arg in enumerate(node.args):
            kind = self._eval(arg, scope)
            if kind in (STR, VOID):
                raise KindConflictError("cannot pass %s as an argument"
                                        % kind_name(kind), arg.span)
            new = self._join(sig["params"][i], kind, arg.span)
            if new != sig["params"][i]:
                sig["params"][i] = new
                self.changed = True
            if (self.final and is_vector(kind) and not _creates_vector(arg)
                    and kind != sig["params"][i]):
                raise KindConflictError(
                    "vector argument element kind %s does not match the "
                    "parameter's %s" % (kind_name(kind),
                                        kind_name(sig["params"][i])), arg.span)
        if sig["returns_value"]:
            result = sig["ret"]
        else:
            result = VOID if self.final else None
        if self.final:
            node.arg_kinds = list(sig["params"])  # slot kinds for arg passing
        node.ret_kind = result
        return result

    def _binop_kind(self, op, left, right, span):
        for k in (left, right):
            if k not in (INT, REAL, None):
                raise KindConflictError(
                    "arithmetic needs numbers, got %s" % kind_name(k), span)
        if op == "/":
            return REAL
        if op in ("//", "%"):
            if left == REAL or right == REAL:
                raise KindConflictError("%s is Int-only" % op, span)
            return INT
        if left is None or right is None:
            return None
        return REAL if REAL in (left, right) else INT

    # ----- pass 4: dispatch classification -----------------------------------

    def classify(self):
        self._mark_uprefs()
        edges = {f.index: set() for f in self.functions}
        for call, caller in self.calls:
            targets = []
            if call.builtin == "load_function":
                targets = [call.load_target]
            elif call.direct_target is not None:
                targets = [call.direct_target]
            elif call.group_root is not None:
                targets = [i for i in range(len(self.functions))
                           if self._find(i) == call.group_root]
            if caller is not None:
                edges[caller].update(t for t in targets if t is not None)
        for f in self.functions:
            f.recursive = self._reaches(f.index, f.index, edges)
        for f in self.functions:
            if f.in_dynamic_set:
                f.classification = DYNAMIC_LOAD
            elif (f.slot_count == f.arity and not f.value_referenced
                    and not f.recursive and not f.has_uprefs):
                f.classification = STATIC_DISPATCH
            else:
                f.classification = DYNAMIC_DISPATCH

    def _mark_uprefs(self):
        # a reference into an enclosing non-global scope forces env dispatch
        for f in self.functions:
            for node in self._own_nodes(f.node):
                sym = getattr(node, "sym", None)
                if sym is not None and sym.def_level > 0 and node.rel_level > 0:
                    f.has_uprefs = True

    def _own_nodes(self, funcdef):
        stack = list(funcdef.body)
        while stack:
            node = stack.pop()
            if isinstance(node, ast.FunctionDef):
                continue  # nested scopes judge their own references
            yield node
            stack.extend(c for c in ast.children(node))

    def _reaches(self, start, goal, edges, seen=None):
        if seen is None:
            seen = set()
        for nxt in edges.get(start, ()):
            if nxt == goal:
                return True
            if nxt not in seen:
                seen.add(nxt)
                if self._reaches(nxt, goal, edges, seen):
                    return True
        return False
