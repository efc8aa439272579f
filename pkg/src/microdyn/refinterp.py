"""Reference interpreter: the behavioral oracle for compiled kernels.

Deliberately independent of the code generator: environments are plain
dicts chained by scope, not frames and displays.  It still implements the
kernel language's own semantics rather than Python's, because compiled
output must match it line for line:

- whole-scope kinds: a variable has one kind everywhere in its scope, so
  `x = 1` followed by `x = 1.5` makes x Real from the start;
- slots start zeroed: reading a never-assigned Int/Real/Vector slot gives
  the kind's zero; Proc slots start unloaded and calling one raises;
- Int arithmetic wraps at 64 bits; `/` always yields Real; `//` and `%`
  are Int-only floor and modulo;
- print formats Reals exactly as Python repr does.

Dynamic loading is modeled by a load trace: declaring a @dynamic function
(or executing a nested declaration inside one), and each load_function
call, appends the function's dotted name.  `del` unloads a Proc slot.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import minipy_ast as ast
from . import semant
from .errors import (DeleteStaticProcError, MiniPyRuntimeError,
                     UnloadedProcError, ZeroDivisionError_)

_MASK = (1 << 64) - 1


def _wrap(n):
    n &= _MASK
    return n - (1 << 64) if n >= (1 << 63) else n


@dataclass
class ProcValue:
    func: object                 # semant.FunctionInfo
    chain: tuple                 # captured environment chain, innermost first
    loaded: bool = True

    def __repr__(self):
        return "<proc %s%s>" % (self.func.qualname,
                                "" if self.loaded else " unloaded")


class Unloaded:
    """Zero value of a Proc slot before any assignment or after del."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance


UNLOADED = Unloaded()


@dataclass
class VectorValue:
    elem: str
    data: list

    def zero(self):
        return 0 if self.elem == semant.INT else 0.0


class _Env(dict):
    """One scope's storage; name -> value with kind-zero defaults."""

    def __init__(self, scope):
        super().__init__()
        self.scope = scope
        for name, sym in scope.symbols.items():
            self[name] = _zero_value(sym.kind)


def _zero_value(kind):
    if kind == semant.INT:
        return 0
    if kind == semant.REAL:
        return 0.0
    if kind == semant.COMPLEX:
        return complex(0.0, 0.0)
    if semant.is_vector(kind):
        return UNLOADED  # becomes a concrete vector on first assignment
    return UNLOADED


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class RunResult:
    output: str
    load_trace: list
    kind_table: str


def format_real(x):
    return repr(x)


def run(module_or_text, analysis=None):
    """Interpret a program; returns RunResult(output, load_trace, kinds)."""
    if isinstance(module_or_text, str):
        from .parser import parse
        from .source import SourceProgram
        module = parse(SourceProgram.from_text(module_or_text))
    else:
        module = module_or_text
    if analysis is None:
        analysis = semant.analyze(module)
    interp = _Interp(analysis)
    interp.run_module()
    return RunResult("".join(interp.out), interp.load_trace,
                     semant.dump_symbols(analysis))


class _Interp:
    def __init__(self, analysis):
        self.analysis = analysis
        self.out = []
        self.load_trace = []

    def run_module(self):
        env = _Env(self.analysis.module_scope)
        self.module_env = env
        self.exec_block(self.analysis.module.body, (env,))

    # ----- statements -----

    def exec_block(self, body, chain):
        for stmt in body:
            self.exec_stmt(stmt, chain)

    def exec_stmt(self, stmt, chain):
        if isinstance(stmt, ast.FunctionDef):
            proc = ProcValue(stmt.info, chain)
            if stmt.info.in_dynamic_set:
                if stmt.info.defer:
                    proc.loaded = False
                else:
                    self.load_trace.append(stmt.info.qualname)
            self.store_name(stmt.name, proc, chain, stmt.info.scope.parent)
        elif isinstance(stmt, ast.Assign):
            value = self.eval(stmt.value, chain)
            self.assign(stmt.target, value, chain)
        elif isinstance(stmt, ast.AugAssign):
            # target subexpressions evaluate exactly once, before the value
            if isinstance(stmt.target, ast.Index):
                vec = self.eval(stmt.target.value, chain)
                idx = self.eval(stmt.target.index, chain)
                self.check_vector(vec, stmt.target.span)
                self.check_index(vec, idx, stmt.target.span)
                value = self.eval(stmt.value, chain)
                vec.data[idx] = self.coerce(
                    self.binop(stmt.op, vec.data[idx], value, stmt.span),
                    vec.elem)
            else:
                current = self.eval(stmt.target, chain)
                value = self.eval(stmt.value, chain)
                self.assign(stmt.target,
                            self.binop(stmt.op, current, value, stmt.span),
                            chain)
        elif isinstance(stmt, ast.Return):
            raise _ReturnSignal(None if stmt.value is None
                                else self.eval(stmt.value, chain))
        elif isinstance(stmt, ast.If):
            if self.eval(stmt.cond, chain) != 0:
                self.exec_block(stmt.body, chain)
            else:
                self.exec_block(stmt.orelse, chain)
        elif isinstance(stmt, ast.While):
            while self.eval(stmt.cond, chain) != 0:
                self.exec_block(stmt.body, chain)
        elif isinstance(stmt, ast.For):
            args = [self.eval(a, chain) for a in stmt.range_args]
            for i in range(*args):
                self.assign(stmt.var, _wrap(i), chain)
                self.exec_block(stmt.body, chain)
        elif isinstance(stmt, ast.ExprStmt):
            self.eval(stmt.value, chain)
        elif isinstance(stmt, ast.Delete):
            sym = stmt.name.sym
            env = chain[stmt.name.rel_level]
            value = env[stmt.name.id]
            if isinstance(value, ProcValue):
                if not value.func.in_dynamic_set:
                    raise DeleteStaticProcError(
                        "del targets dynamically loaded functions; %r is resident"
                        % value.func.qualname, stmt.span)
            env[stmt.name.id] = UNLOADED
        elif isinstance(stmt, (ast.GlobalDecl, ast.NonlocalDecl)):
            pass
        else:
            raise MiniPyRuntimeError("unknown statement", stmt.span)

    def store_name(self, name, value, chain, scope):
        # used for def: the binding lands in the defining scope
        rel = chain[0].scope.level - scope.level
        chain[rel][name] = value

    def assign(self, target, value, chain):
        if isinstance(target, ast.Name):
            chain[target.rel_level][target.id] = self.coerce(
                value, target.sym.kind)
        elif isinstance(target, ast.Index):
            vec = self.eval(target.value, chain)
            idx = self.eval(target.index, chain)
            self.check_vector(vec, target.span)
            self.check_index(vec, idx, target.span)
            vec.data[idx] = self.coerce(value, vec.elem)
        elif isinstance(target, ast.Attribute):
            base = self.eval(target.value, chain)
            part = float(value)
            if target.attr == "real":
                new = complex(part, base.imag)
            else:
                new = complex(base.real, part)
            self.assign(target.value, new, chain)
        else:
            raise MiniPyRuntimeError("bad assignment target", target.span)

    def coerce(self, value, kind):
        if kind == semant.REAL and isinstance(value, int):
            return float(value)
        if kind == semant.INT and isinstance(value, int):
            return _wrap(value)
        if (semant.is_vector(kind) and isinstance(value, VectorValue)
                and value.elem != kind[1]):
            # only fresh literals reach here (the analyzer enforces exact
            # element kinds for aliases), so copying cannot break sharing
            return VectorValue(kind[1], [float(x) for x in value.data])
        return value

    # ----- expressions -----

    def eval(self, node, chain):
        if isinstance(node, ast.IntLit):
            return node.value
        if isinstance(node, ast.RealLit):
            return node.value
        if isinstance(node, ast.StringLit):
            return node.value
        if isinstance(node, ast.Name):
            value = chain[node.rel_level][node.id]
            if value is UNLOADED and semant.is_vector(node.sym.kind):
                # zero-length vector: reading the slot before assignment
                vec = VectorValue(node.sym.kind[1], [])
                chain[node.rel_level][node.id] = vec
                return vec
            return value
        if isinstance(node, ast.UnaryOp):
            value = self.eval(node.operand, chain)
            return _wrap(-value) if isinstance(value, int) else -value
        if isinstance(node, ast.BinOp):
            if node.op == "*" and isinstance(node.left, ast.ListLit):
                count = self.eval(node.right, chain)
                elems = [self.eval(e, chain) for e in node.left.elts]
                elem_kind = node.kind[1]
                data = [self.coerce(e, elem_kind) for e in elems] * max(count, 0)
                return VectorValue(elem_kind, data)
            left = self.eval(node.left, chain)
            right = self.eval(node.right, chain)
            return self.binop(node.op, left, right, node.span)
        if isinstance(node, ast.Compare):
            left = self.eval(node.left, chain)
            right = self.eval(node.right, chain)
            op = node.op
            result = ((op == "==" and left == right)
                      or (op == "!=" and left != right)
                      or (op == "<" and left < right)
                      or (op == "<=" and left <= right)
                      or (op == ">" and left > right)
                      or (op == ">=" and left >= right))
            return 1 if result else 0
        if isinstance(node, ast.ListLit):
            elems = [self.eval(e, chain) for e in node.elts]
            elem_kind = node.kind[1]
            return VectorValue(elem_kind,
                               [self.coerce(e, elem_kind) for e in elems])
        if isinstance(node, ast.Index):
            vec = self.eval(node.value, chain)
            idx = self.eval(node.index, chain)
            self.check_vector(vec, node.span)
            self.check_index(vec, idx, node.span)
            return vec.data[idx]
        if isinstance(node, ast.Attribute):
            base = self.eval(node.value, chain)
            return base.real if node.attr == "real" else base.imag
        if isinstance(node, ast.Call):
            return self.call(node, chain)
        raise MiniPyRuntimeError("unknown expression", node.span)

    def binop(self, op, left, right, span):
        if op == "/":
            if right == 0:
                raise ZeroDivisionError_("division by zero", span)
            return float(left) / float(right)
        if op in ("//", "%"):
            if right == 0:
                raise ZeroDivisionError_("division by zero", span)
            return _wrap(left // right if op == "//" else left % right)
        if op == "+":
            out = left + right
        elif op == "-":
            out = left - right
        elif op == "*":
            out = left * right
        else:
            raise MiniPyRuntimeError("unknown operator %r" % op, span)
        return _wrap(out) if isinstance(out, int) else out

    def check_vector(self, vec, span):
        if not isinstance(vec, VectorValue):
            raise MiniPyRuntimeError("indexing a non-vector value", span)

    def check_index(self, vec, idx, span):
        if not 0 <= idx < len(vec.data):
            raise MiniPyRuntimeError(
                "index %d outside vector of length %d" % (idx, len(vec.data)),
                span)

    # ----- calls -----

    def call(self, node, chain):
        if node.builtin == "print":
            self.do_print(node, chain)
            return None
        if node.builtin == "len":
            vec = self.eval(node.args[0], chain)
            self.check_vector(vec, node.span)
            return _wrap(len(vec.data))
        if node.builtin == "load_function":
            return self.load_function(node, chain)
        proc = self.eval(node.func, chain)
        if proc is UNLOADED or (isinstance(proc, ProcValue) and not proc.loaded):
            raise UnloadedProcError(
                "calling an unloaded function slot", node.span)
        if not isinstance(proc, ProcValue):
            raise MiniPyRuntimeError("calling a non-function value", node.span)
        args = [self.eval(a, chain) for a in node.args]
        return self.invoke(proc, args, node.span)

    def invoke(self, proc, args, span):
        f = proc.func
        env = _Env(f.scope)
        sig_params = f.node.params
        for name, value in zip(sig_params, args):
            env[name] = self.coerce(value, f.scope.symbols[name].kind)
        try:
            self.exec_block(f.node.body, (env,) + proc.chain)
        except _ReturnSignal as r:
            if r.value is None:
                return _zero_value(f.ret_kind)
            return self.coerce(r.value, f.ret_kind)
        return _zero_value(f.ret_kind)

    def load_function(self, node, chain):
        f = self.analysis.functions[node.load_target]
        self.load_trace.append(f.qualname)
        # a loaded top-level function closes over the module environment
        return ProcValue(f, (self.module_env,))

    def do_print(self, node, chain):
        parts = []
        for arg in node.args:
            value = self.eval(arg, chain)
            if isinstance(value, bool):
                raise MiniPyRuntimeError("bool leaked into interpreter",
                                         node.span)
            if isinstance(value, float):
                parts.append(format_real(value))
            elif isinstance(value, int):
                parts.append(str(value))
            elif isinstance(value, str):
                parts.append(value)
            else:
                raise MiniPyRuntimeError("unprintable value", node.span)
        self.out.append(" ".join(parts) + "\n")
