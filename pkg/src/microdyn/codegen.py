"""C code generation from analyzed kernel programs.

A program compiles into translation units: one resident unit holding the
bootstrap (module code) plus every statically linked function, and one
self-contained unit per dynamically loaded function.  Dynamic units may
not contain relocations, so they reach the runtime through a function
table at env[depth+1] and fetch every real and string literal from
hidden module slots initialized by the bootstrap.  For uniformity,
function bodies in resident units use the same hidden slots;
module-level statements embed literals directly.

Dispatch at a call site:
  * a direct call to a StaticDispatch function becomes oly_scall_<kind>
    with the callee entry, frame geometry, and argument slots inline;
  * anything else fetches a Proc from its frame slot and goes through
    call_proc_<kind>;
  * declarations of dynamic functions emit load_proc (or NULL when the
    declaration is deferred), producing exactly one host load per
    executed declaration.
"""

from __future__ import annotations

import copy
import struct
from dataclasses import dataclass, field

from . import minipy_ast as ast
from .errors import ToolchainError, UnsupportedFeatureError
from .semant import (DYNAMIC_DISPATCH, DYNAMIC_LOAD, INT, REAL, COMPLEX,
                     OBJECT, STR, VOID, STATIC_DISPATCH, is_proc, is_vector)

MODES = ("auto", "static", "dynamic", "load")

_WRAP_MASK = (1 << 64) - 1


def _wrap(v):
    v &= _WRAP_MASK
    return v - (1 << 64) if v >= (1 << 63) else v


@dataclass
class CodegenConfig:
    mode: str = "auto"
    max_lex_levels: int = None  # None = use the analyzed depth


@dataclass
class TranslationUnit:
    filename: str
    text: str
    kind: str                 # "resident" or "dynamic"
    qualname: str = None      # dynamic units only
    mangled: str = None

    @property
    def object_name(self):
        return self.filename[:-2] + ".o"


@dataclass
class CompiledProgram:
    units: list
    symtab: str
    need_exec: bool
    mode: str
    analysis: object = field(repr=False, default=None)

    @property
    def resident_unit(self):
        return self.units[0]

    @property
    def dynamic_units(self):
        return self.units[1:]


def generate(analysis, config=None):
    """Translate an analyzed program into C translation units."""
    config = config or CodegenConfig()
    if config.mode not in MODES:
        raise ValueError("unknown dispatch mode %r" % config.mode)
    if (config.max_lex_levels is not None
            and config.max_lex_levels < analysis.max_lex_levels):
        raise ToolchainError(
            "max lexical levels %d is below the program's depth %d"
            % (config.max_lex_levels, analysis.max_lex_levels))
    return _Gen(analysis, config).run()


def effective_classification(analysis, mode):
    """Dispatch class per function index under a forced mode.

    "auto" keeps the analyzed classification.  "static" widens
    StaticDispatch to every function where it stays correct (no value
    references, no enclosing-scope references); "dynamic" routes every
    call through proc slots; "load" moves every function into its own
    loadable unit.  @dynamic functions load in every mode.
    """
    eff = {}
    for f in analysis.functions:
        if f.in_dynamic_set or mode == "load":
            eff[f.index] = DYNAMIC_LOAD
        elif mode == "auto":
            eff[f.index] = f.classification
        elif mode == "static":
            if not f.value_referenced and not f.has_uprefs:
                eff[f.index] = STATIC_DISPATCH
            else:
                eff[f.index] = DYNAMIC_DISPATCH
        else:
            eff[f.index] = DYNAMIC_DISPATCH
    return eff


# --- C fragments ----------------------------------------------------------------

_C_TYPE = {INT: "Int", REAL: "Real", COMPLEX: "Complex", OBJECT: "Object"}
_KIND_TAG = {INT: "int", REAL: "real", COMPLEX: "complex"}

# expression binding strength, for minimal parenthesization
_ATOM, _UNARY, _MUL, _ADD, _CMP = 100, 80, 60, 50, 40
_BIN_RANK = {"*": _MUL, "/": _MUL, "+": _ADD, "-": _ADD}


def c_type(kind):
    if is_vector(kind):
        return "Vector"
    if is_proc(kind):
        return "Proc"
    if kind == VOID:
        return "void"
    return _C_TYPE[kind]


def kind_tag(kind):
    if is_vector(kind):
        return "vector"
    if is_proc(kind):
        return "proc"
    if kind == VOID:
        return "void"
    return _KIND_TAG[kind]


def c_zero(kind):
    if kind == INT:
        return "0"
    if kind == REAL:
        return "0.0"
    return "(%s)0" % c_type(kind)


def c_string(text):
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
        elif " " <= ch <= "~":
            out.append(ch)
        else:
            out.append("\\%03o" % ord(ch))
    return '"%s"' % "".join(out)


def c_int(value):
    value = _wrap(value)
    if 0 <= value <= 0x7FFFFFFF:
        return str(value)
    if value > 0:
        return "%dLL" % value
    return "(Int)0x%016xULL" % (value & _WRAP_MASK)


def c_real(value):
    return repr(value)


def _real_key(value):
    # keyed by bit pattern so 0.0 and -0.0 stay distinct
    return ("real", struct.pack("<d", value))


def _is_zero_literal(node):
    return (isinstance(node, ast.IntLit) and node.value == 0) or \
           (isinstance(node, ast.RealLit) and node.value == 0.0)


class _Temp(ast.Node):
    """Placeholder for an already-emitted C temporary."""

    def __init__(self, name, kind):
        self.name = name
        self.kind = kind
        self.span = None


@dataclass
class _Frag:
    code: str
    rank: int

    def at_least(self, rank):
        if self.rank < rank:
            return "(%s)" % self.code
        return self.code


class _Gen:
    def __init__(self, analysis, config):
        self.analysis = analysis
        self.config = config
        self.eff = effective_classification(analysis, config.mode)
        self.func_of_node = {id(f.node): f for f in analysis.functions}
        self.pool = {}            # ("str", text) | ("real", bits) -> offset
        self.need_exec = any(c == DYNAMIC_LOAD for c in self.eff.values())

    # ----- literal pool -------------------------------------------------------
    # Hidden module slots carry every literal referenced from a function body:
    # strings always, reals so loaded code never touches .rodata.

    def _collect_pool(self):
        for f in self.analysis.functions:
            stack = list(reversed(f.node.body))
            while stack:
                node = stack.pop()
                if isinstance(node, ast.FunctionDef):
                    self._pool_add(("str", node.name))
                    child = self.func_of_node[id(node)]
                    if self.eff[child.index] == DYNAMIC_LOAD:
                        self._pool_add(("str", child.qualname))
                    continue  # its body is collected as its own function
                if isinstance(node, ast.StringLit):
                    self._pool_add(("str", node.value))
                elif isinstance(node, ast.RealLit):
                    self._pool_add(_real_key(node.value))
                stack.extend(reversed(list(ast.children(node))))

    def _pool_add(self, key):
        if key not in self.pool:
            self.pool[key] = self.analysis.module_slot_count + len(self.pool)

    # ----- top level ----------------------------------------------------------

    def run(self):
        self._collect_pool()
        units = [self._resident_unit()]
        rows = []
        for f in self.analysis.functions:
            if self.eff[f.index] != DYNAMIC_LOAD:
                continue
            unit = self._dynamic_unit(f)
            units.append(unit)
            rows.append("%s\t%s\t%s\t%d\t%d" % (
                f.qualname, f.mangled, unit.object_name, f.arity,
                1 if f.defer else 0))
        return CompiledProgram(units, "".join(r + "\n" for r in rows),
                               self.need_exec, self.config.mode, self.analysis)

    def _escaping(self, f):
        return 1 if f.scope.children else 0

    def _resident_unit(self):
        a = self.analysis
        out = ['#include "oly_rt.h"', ""]
        resident = [f for f in a.functions if self.eff[f.index] != DYNAMIC_LOAD]
        for f in resident:
            out.append("%s %s(Env env, Object self);"
                       % (c_type(f.ret_kind), f.mangled))
        if resident:
            out.append("")
        for f in resident:
            out.extend(self._function_text(f, dynamic_unit=False))
            out.append("")
        out.append("int main(void) {")
        body = _Emitter(self, func=None, dynamic_unit=False)
        total_slots = a.module_slot_count + len(self.pool)
        max_lex = self.config.max_lex_levels or a.max_lex_levels
        body.line("Env env = oly_rt_init(%d, %d, %d);"
                  % (max_lex, total_slots, 1 if self.need_exec else 0))
        for f in a.functions:
            entry = ("(OlyEntry)%s" % f.mangled
                     if self.eff[f.index] != DYNAMIC_LOAD else "(OlyEntry)0")
            body.line("oly_register(%s, %s, %d, %d, %d, %d);"
                      % (c_string(f.qualname), entry, f.arity, f.slot_count,
                         f.def_level, self._escaping(f)))
        for key, offset in self.pool.items():
            if key[0] == "str":
                body.line("declare_str(env, %d, %s);"
                          % (offset, c_string(key[1])))
            else:
                value = struct.unpack("<d", key[1])[0]
                body.line("update_real(env, 0, %d, %s);"
                          % (offset, c_real(value)))
        for stmt in a.module.body:
            body.statement(stmt)
        body.line("oly_exit(0);")
        body.line("return 0;")
        out.extend("    " + ln if ln else ln for ln in body.lines)
        out.append("}")
        return TranslationUnit("kernel.c", "\n".join(out) + "\n", "resident")

    def _dynamic_unit(self, f):
        out = ['#include "oly_rt.h"', ""]
        out.extend(self._function_text(f, dynamic_unit=True))
        name = "dyn_%s.c" % f.qualname.replace(".", "__")
        return TranslationUnit(name, "\n".join(out) + "\n", "dynamic",
                               qualname=f.qualname, mangled=f.mangled)

    def _function_text(self, f, dynamic_unit):
        em = _Emitter(self, func=f, dynamic_unit=dynamic_unit)
        for stmt in f.node.body:
            em.statement(stmt)
        lines = ["%s %s(Env env, Object self) {"
                 % (c_type(f.ret_kind), f.mangled)]
        lines.extend("    " + ln if ln else ln for ln in em.lines)
        falls_off = not f.node.body or not isinstance(f.node.body[-1],
                                                      ast.Return)
        if f.ret_kind != VOID and falls_off:
            lines.append("    return(%s);" % c_zero(f.ret_kind))
        lines.append("}")
        return lines


class _Emitter:
    """Emits the C statement list for one function body (or the module)."""

    def __init__(self, gen, func, dynamic_unit):
        self.gen = gen
        self.func = func
        self.dynamic_unit = dynamic_unit
        self.depth = func.body_level if func is not None else 0
        self.lines = []
        self.indent = 0
        self.tmp = 0

    # ----- plumbing -----------------------------------------------------------

    def line(self, text):
        self.lines.append("    " * self.indent + text)

    def fresh(self, prefix="oly_t"):
        self.tmp += 1
        return "%s%d" % (prefix, self.tmp - 1)

    def api(self, name):
        if self.dynamic_unit:
            return "OLY_API(env, %d)->%s" % (self.depth, name)
        if name.startswith(("alloc_", "print_")):
            return "oly_" + name
        return name

    def scope(self):
        return (self.gen.analysis.module_scope if self.func is None
                else self.func.scope)

    def str_ref(self, text):
        """A string literal value: direct at module level, pooled in bodies."""
        if self.func is None and not self.dynamic_unit:
            return c_string(text)
        offset = self.gen.pool[("str", text)]
        return "lookup_str(env, %d, %d)" % (self.depth, offset)

    def real_ref(self, value):
        if self.func is None and not self.dynamic_unit:
            return _Frag(c_real(value), _ATOM)
        offset = self.gen.pool[_real_key(value)]
        return _Frag("lookup_real(env, %d, %d)" % (self.depth, offset), _ATOM)

    # ----- kinds (re-derived; analysis already validated everything) ----------

    def kind_of(self, node):
        if isinstance(node, _Temp):
            return node.kind
        if isinstance(node, ast.Name):
            return node.sym.kind
        if isinstance(node, ast.IntLit):
            return INT
        if isinstance(node, ast.RealLit):
            return REAL
        if isinstance(node, ast.StringLit):
            return STR
        if isinstance(node, ast.ListLit):
            elem = INT
            for e in node.elts:
                if self.kind_of(e) == REAL:
                    elem = REAL
            return ("Vector", elem)
        if isinstance(node, ast.BinOp):
            if node.op == "*" and isinstance(node.left, ast.ListLit):
                return self.kind_of(node.left)
            if node.op == "/":
                return REAL
            if node.op in ("//", "%"):
                return INT
            lk, rk = self.kind_of(node.left), self.kind_of(node.right)
            return REAL if REAL in (lk, rk) else INT
        if isinstance(node, ast.UnaryOp):
            return self.kind_of(node.operand)
        if isinstance(node, ast.Compare):
            return INT
        if isinstance(node, ast.Index):
            return self.kind_of(node.value)[1]
        if isinstance(node, ast.Attribute):
            return REAL
        if isinstance(node, ast.Call):
            return node.ret_kind
        raise UnsupportedFeatureError("cannot emit expression", node.span)

    # ----- effect hoisting ----------------------------------------------------
    # Calls and vector constructions become temporaries in evaluation order,
    # leaving the remaining tree pure so statement emitters may read it (or
    # duplicate it, for augmented assignment) freely.

    def hoist(self, node):
        if isinstance(node, (ast.Name, ast.IntLit, ast.RealLit, ast.StringLit,
                             _Temp)):
            return node
        if isinstance(node, ast.Call):
            return self.hoist_call(node)
        if isinstance(node, ast.ListLit):
            return self.build_vector(self.kind_of(node)[1],
                                     [self.hoist(e) for e in node.elts], None)
        if (isinstance(node, ast.BinOp) and node.op == "*"
                and isinstance(node.left, ast.ListLit)):
            elts = [self.hoist(e) for e in node.left.elts]
            count = self.hoist(node.right)
            return self.build_vector(self.kind_of(node.left)[1], elts, count)
        out = copy.copy(node)
        for name in ("left", "right", "operand", "value", "index"):
            child = getattr(out, name, None)
            if isinstance(child, ast.Node):
                setattr(out, name, self.hoist(child))
        return out

    def build_vector(self, elem, elts, count):
        v = self.fresh()
        zeroed = all(_is_zero_literal(e) for e in elts)
        if count is None:
            self.line("Vector %s = %s(%d);"
                      % (v, self.api("alloc_vector"), len(elts)))
            if not zeroed:
                for j, e in enumerate(elts):
                    self.line("vector_update_%s(%s, %d, %s);"
                              % (kind_tag(elem), v, j, self.expr(e).code))
        else:
            n = self.fresh()
            self.line("Int %s = %s;" % (n, self.expr(count).code))
            total = n if len(elts) == 1 else "%s * %d" % (n, len(elts))
            self.line("Vector %s = %s(%s);"
                      % (v, self.api("alloc_vector"), total))
            if not zeroed:
                i = self.fresh("oly_i")
                self.line("for (Int %s = 0; %s < %s; %s++) {" % (i, i, n, i))
                self.indent += 1
                for j, e in enumerate(elts):
                    at = i if len(elts) == 1 else "%s * %d + %d" % (i,
                                                                    len(elts),
                                                                    j)
                    self.line("vector_update_%s(%s, %s, %s);"
                              % (kind_tag(elem), v, at, self.expr(e).code))
                self.indent -= 1
                self.line("}")
        return _Temp(v, ("Vector", elem))

    def hoist_call(self, node):
        if node.builtin == "len":
            out = copy.copy(node)
            out.args = [self.hoist(node.args[0])]
            return out
        if node.builtin == "print":
            raise UnsupportedFeatureError("print has no value", node.span)
        if node.builtin == "load_function":
            t = self.fresh()
            self.line("Proc %s = %s;" % (t, self.load_call(node)))
            return _Temp(t, node.ret_kind)
        func = self.hoist(node.func)
        args = [self.hoist(a) for a in node.args]
        return self.user_call(node, func, args)

    def load_call(self, node):
        target = self.gen.analysis.functions[node.load_target]
        return "%s(%s, env, %d)" % (self.api("load_proc"),
                                    self.str_ref(target.qualname),
                                    target.arity)

    def user_call(self, node, func, args):
        """Emit a call (operands already pure); returns the result temp."""
        functions = self.gen.analysis.functions
        target = None
        if node.direct_target is not None:
            target = functions[node.direct_target]
        if target is not None:
            param_kinds = [s.kind for s in
                           list(target.scope.symbols.values())[:target.arity]]
            ret = target.ret_kind
        else:
            param_kinds = node.arg_kinds
            ret = node.ret_kind
        if (target is not None and not self.dynamic_unit
                and self.gen.eff[target.index] == STATIC_DISPATCH):
            return self.static_call(target, ret, param_kinds, args)
        arr = self.arg_array(args, param_kinds)
        proc = self.expr(func).at_least(_CMP)
        code = "%s(%s, env, %d, %s)" % (self.api("call_proc_%s"
                                                 % kind_tag(ret)),
                                        proc, len(args), arr)
        return self._call_result(code, ret)

    def _call_result(self, code, ret):
        if ret == VOID:
            self.line(code + ";")
            return _Temp(None, VOID)
        t = self.fresh()
        self.line("%s %s = %s;" % (c_type(ret), t, code))
        return _Temp(t, ret)

    def static_call(self, target, ret, param_kinds, args):
        """Direct C call: push the callee frame, fill slots, call, pop."""
        # argument expressions read through the caller's display cells,
        # which the frame push may rebind (recursion, sibling calls), so
        # anything touching env lands in a temp first
        vals = []
        for arg, kind in zip(args, param_kinds):
            code = self.expr(arg).at_least(_CMP)
            if "env" in code:
                t = self.fresh("oly_a")
                self.line("%s %s = %s;" % (c_type(kind), t, code))
                vals.append(t)
            else:
                vals.append(code)
        ce = self.fresh("oly_c")
        if self.gen._escaping(target):
            self.line("Env %s = oly_scall_enter(%d, %d, 1);"
                      % (ce, target.body_level, target.slot_count))
        else:
            base = self.fresh("oly_f")
            self.line("OlySlotBits %s[%d];"
                      % (base, 2 + target.slot_count))
            self.line("Env %s = oly_frame_bind(%s, %d, %d);"
                      % (ce, base, target.body_level, target.slot_count))
        for i, (v, kind) in enumerate(zip(vals, param_kinds)):
            if is_proc(kind):
                self.line("update_proc(%s, %d, %s);" % (ce, i, v))
            elif is_vector(kind):
                self.line("update_vector(%s, 0, %d, %s);" % (ce, i, v))
            elif kind == REAL:
                self.line("update_real(%s, 0, %d, %s);" % (ce, i, v))
            elif kind == COMPLEX:
                self.line("update_complex(%s, 0, %d, %s);" % (ce, i, v))
            else:
                self.line("update_int(%s, 0, %d, %s);" % (ce, i, v))
        call = "%s(%s, NULL)" % (target.mangled, ce)
        result = self._call_result(call, ret)
        if self.gen._escaping(target):
            self.line("oly_scall_leave(%d);" % target.body_level)
        else:
            self.line("oly_frame_unbind(%d);" % target.body_level)
        return result

    def arg_array(self, args, param_kinds):
        if not args:
            return "(OlySlotBits *)0"
        name = self.fresh("oly_a")
        self.line("OlySlotBits %s[%d];" % (name, len(args)))
        for i, (arg, kind) in enumerate(zip(args, param_kinds)):
            if kind == INT:
                slot = "OLY_SLOT_INT(%s)"
            elif kind == REAL:
                slot = "OLY_SLOT_REAL(%s)"
            else:
                slot = "OLY_SLOT_PTR(%s)"
            self.line("%s[%d] = %s;"
                      % (name, i, slot % self.expr(arg).at_least(_CMP)))
        return name

    # ----- pure expressions ----------------------------------------------------

    def expr(self, node):
        if isinstance(node, _Temp):
            return _Frag(node.name, _ATOM)
        if isinstance(node, ast.Name):
            sym = node.sym
            return _Frag("lookup_%s(env, %d, %d)"
                         % (kind_tag(sym.kind), node.rel_level, sym.offset),
                         _ATOM)
        if isinstance(node, ast.IntLit):
            return _Frag(c_int(node.value), _ATOM)
        if isinstance(node, ast.RealLit):
            return self.real_ref(node.value)
        if isinstance(node, ast.BinOp):
            return self.binop(node)
        if isinstance(node, ast.UnaryOp):
            operand = self.expr(node.operand)
            if self.kind_of(node.operand) == REAL:
                # 0.0 - x instead of -x: loaded code must not pull the
                # sign-flip mask from .rodata (diverges only at x == 0.0)
                return _Frag("0.0 - %s" % operand.at_least(_ADD + 1), _ADD)
            return _Frag("-%s" % operand.at_least(_UNARY), _UNARY)
        if isinstance(node, ast.Compare):
            left = self.expr(node.left).at_least(_MUL)
            right = self.expr(node.right).at_least(_MUL)
            return _Frag("(Int)(%s %s %s)" % (left, node.op, right), _UNARY)
        if isinstance(node, ast.Index):
            base = self.expr(node.value).at_least(_CMP)
            idx = self.expr(node.index).at_least(_CMP)
            elem = self.kind_of(node.value)[1]
            return _Frag("vector_lookup_%s(%s, %s)"
                         % (kind_tag(elem), base, idx), _ATOM)
        if isinstance(node, ast.Attribute):
            base = self.expr(node.value).at_least(_CMP)
            return _Frag("lookup_complex_%s(%s)"
                         % ("real" if node.attr == "real" else "imag", base),
                         _ATOM)
        if isinstance(node, ast.Call) and node.builtin == "len":
            return _Frag("len_vec(%s)"
                         % self.expr(node.args[0]).at_least(_CMP), _ATOM)
        raise UnsupportedFeatureError("cannot emit expression", node.span)

    def binop(self, node):
        op = node.op
        left, right = self.expr(node.left), self.expr(node.right)
        if op == "//":
            return _Frag("oly_idiv(%s, %s)" % (left.at_least(_CMP),
                                               right.at_least(_CMP)), _ATOM)
        if op == "%":
            return _Frag("oly_imod(%s, %s)" % (left.at_least(_CMP),
                                               right.at_least(_CMP)), _ATOM)
        if op == "/":
            lc = (left.at_least(_MUL) if self.kind_of(node.left) == REAL
                  else "(Real)%s" % left.at_least(_UNARY))
            rc = (right.at_least(_MUL + 1) if self.kind_of(node.right) == REAL
                  else "(Real)%s" % right.at_least(_UNARY))
            return _Frag("%s / %s" % (lc, rc), _MUL)
        rank = _BIN_RANK[op]
        return _Frag("%s %s %s" % (left.at_least(rank), op,
                                   right.at_least(rank + 1)), rank)

    # ----- statements ------------------------------------------------------------

    def statement(self, stmt):
        if isinstance(stmt, ast.FunctionDef):
            self.stmt_funcdef(stmt)
        elif isinstance(stmt, ast.Assign):
            self.stmt_assign(stmt.target, stmt.value)
        elif isinstance(stmt, ast.AugAssign):
            self.stmt_aug(stmt)
        elif isinstance(stmt, ast.Return):
            self.stmt_return(stmt)
        elif isinstance(stmt, ast.If):
            self.stmt_if(stmt)
        elif isinstance(stmt, ast.While):
            self.stmt_while(stmt)
        elif isinstance(stmt, ast.For):
            self.stmt_for(stmt)
        elif isinstance(stmt, ast.ExprStmt):
            self.stmt_expr(stmt)
        elif isinstance(stmt, ast.Delete):
            name = stmt.name
            self.line("%s(env, %d, %d);" % (self.api("delete_proc"),
                                            name.rel_level, name.sym.offset))
        elif isinstance(stmt, (ast.GlobalDecl, ast.NonlocalDecl)):
            pass
        else:
            raise UnsupportedFeatureError("cannot emit statement", stmt.span)

    def stmt_funcdef(self, stmt):
        child = self.gen.func_of_node[id(stmt)]
        sym = self.scope().symbols[stmt.name]
        if self.gen.eff[child.index] == DYNAMIC_LOAD:
            if child.defer:
                value = "NULL"
            else:
                value = "%s(%s, env, %d)" % (self.api("load_proc"),
                                             self.str_ref(child.qualname),
                                             child.arity)
        else:
            value = "mk_proc(%s, env, %d)" % (child.mangled, child.arity)
        self.line("%s(env, %d, %s, %s);" % (self.api("declare_proc"),
                                            sym.offset,
                                            self.str_ref(stmt.name), value))

    def store_name(self, name, code):
        sym, rel = name.sym, name.rel_level
        if is_proc(sym.kind):
            if rel == 0:
                self.line("update_proc(env, %d, %s);" % (sym.offset, code))
            else:
                self.line("update_proc_at(env, %d, %d, %s);"
                          % (rel, sym.offset, code))
        else:
            self.line("update_%s(env, %d, %d, %s);"
                      % (kind_tag(sym.kind), rel, sym.offset, code))

    def stmt_assign(self, target, value):
        # value evaluates before the target's subscripts, as in Python
        if isinstance(target, ast.Name):
            if (isinstance(value, ast.Call)
                    and value.builtin == "load_function"):
                self.store_name(target, self.load_call(value))
                return
            self.store_name(target, self.expr(self.hoist(value)).code)
        elif isinstance(target, ast.Index):
            code = self.expr(self.hoist(value)).code
            base = self.hoist(target.value)
            idx = self.hoist(target.index)
            elem = self.kind_of(base)[1]
            self.line("vector_update_%s(%s, %s, %s);"
                      % (kind_tag(elem), self.expr(base).at_least(_CMP),
                         self.expr(idx).at_least(_CMP), code))
        elif isinstance(target, ast.Attribute):
            code = self.expr(self.hoist(value)).code
            base = self.hoist(target.value)
            field_ = "real" if target.attr == "real" else "imag"
            self.line("update_complex_%s(%s, %s);"
                      % (field_, self.expr(base).at_least(_CMP), code))
        else:
            raise UnsupportedFeatureError("cannot emit assignment",
                                          target.span)

    def _has_effects(self, node):
        for n in ast.walk(node):
            if isinstance(n, ast.Call) and n.builtin != "len":
                return True
            if isinstance(n, ast.ListLit):
                return True
        return False

    def stmt_aug(self, stmt):
        # the target location evaluates once, before the value
        target = stmt.target
        if isinstance(target, ast.Name):
            read = target
            store = lambda code: self.store_name(target, code)
        elif isinstance(target, ast.Index):
            base = self.hoist(target.value)
            idx = self.hoist(target.index)
            read = ast.Index(value=base, index=idx, span=stmt.span)
            elem = self.kind_of(base)[1]
            store = lambda code: self.line(
                "vector_update_%s(%s, %s, %s);"
                % (kind_tag(elem), self.expr(base).at_least(_CMP),
                   self.expr(idx).at_least(_CMP), code))
        elif isinstance(target, ast.Attribute):
            base = self.hoist(target.value)
            read = ast.Attribute(value=base, attr=target.attr, span=stmt.span)
            field_ = "real" if target.attr == "real" else "imag"
            store = lambda code: self.line(
                "update_complex_%s(%s, %s);"
                % (field_, self.expr(base).at_least(_CMP), code))
        else:
            raise UnsupportedFeatureError("cannot emit assignment",
                                          target.span)
        if self._has_effects(stmt.value):
            # the old value reads before the right side runs, as in Python
            kind = self.kind_of(read)
            t = self.fresh()
            self.line("%s %s = %s;" % (c_type(kind), t,
                                       self.expr(read).code))
            read = _Temp(t, kind)
        combined = ast.BinOp(op=stmt.op, left=read,
                             right=self.hoist(stmt.value), span=stmt.span)
        store(self.expr(combined).code)

    def stmt_return(self, stmt):
        ret = VOID if self.func is None else self.func.ret_kind
        if stmt.value is None:
            self.line("return;" if ret == VOID
                      else "return(%s);" % c_zero(ret))
            return
        value = self.hoist(stmt.value)
        frag = self.expr(value)
        if ret == REAL and self.kind_of(value) == INT:
            self.line("return((Real)%s);" % frag.at_least(_UNARY))
        else:
            self.line("return(%s);" % frag.code)

    def stmt_expr(self, stmt):
        value = stmt.value
        if isinstance(value, ast.Call) and value.builtin == "print":
            self.stmt_print(value)
            return
        out = self.hoist(value)
        if not isinstance(out, _Temp):
            self.line("(void)(%s);" % self.expr(out).code)

    def stmt_print(self, call):
        if not call.args:
            self.line("%s();" % self.api("print_nl"))
            return
        args = [self.hoist(a) for a in call.args]
        for i, arg in enumerate(args):
            last = 1 if i == len(args) - 1 else 0
            kind = self.kind_of(arg)
            if kind == STR:
                self.line("%s(%s, %d);" % (self.api("print_str"),
                                           self.str_ref(arg.value), last))
            else:
                fn = "print_real" if kind == REAL else "print_int"
                self.line("%s(%s, %d);" % (self.api(fn),
                                           self.expr(arg).at_least(_CMP),
                                           last))

    def stmt_if(self, stmt):
        cond = self.expr(self.hoist(stmt.cond))
        self.line("if (%s != 0) {" % cond.at_least(_CMP + 1))
        self.indent += 1
        for s in stmt.body:
            self.statement(s)
        self.indent -= 1
        if stmt.orelse:
            self.line("} else {")
            self.indent += 1
            for s in stmt.orelse:
                self.statement(s)
            self.indent -= 1
        self.line("}")

    def stmt_while(self, stmt):
        # the condition may hoist calls, so re-evaluate it inside the loop
        self.line("for (;;) {")
        self.indent += 1
        cond = self.expr(self.hoist(stmt.cond))
        self.line("if (%s == 0) break;" % cond.at_least(_CMP + 1))
        for s in stmt.body:
            self.statement(s)
        self.indent -= 1
        self.line("}")

    def stmt_for(self, stmt):
        args = [self.hoist(a) for a in stmt.range_args]
        if len(args) == 1:
            start, stop, step = None, args[0], None
        elif len(args) == 2:
            start, stop, step = args[0], args[1], None
        else:
            start, stop, step = args
        i = self.fresh("oly_i")
        n = self.fresh("oly_n")
        s = self.fresh("oly_s")
        self.line("Int %s = %s;"
                  % (i, self.expr(start).code if start else "0"))
        self.line("Int %s = %s;" % (n, self.expr(stop).code))
        self.line("Int %s = %s;" % (s, self.expr(step).code if step else "1"))
        self.line("for (; %s > 0 ? %s < %s : %s > %s; %s += %s) {"
                  % (s, i, n, i, n, i, s))
        self.indent += 1
        sym, rel = stmt.var.sym, stmt.var.rel_level
        self.line("update_int(env, %d, %d, %s);" % (rel, sym.offset, i))
        for st in stmt.body:
            self.statement(st)
        self.indent -= 1
        self.line("}")


def emit_fragment(stmts, dynamic_unit=False, depth=0):
    """Emit annotated statements outside any program (diagnostics, tests)."""
    class _Shim:
        analysis = None
        eff = {}
        pool = {}
        func_of_node = {}

        @staticmethod
        def _escaping(f):
            return 0

    em = _Emitter(_Shim(), func=None, dynamic_unit=dynamic_unit)
    em.depth = depth
    for stmt in stmts:
        em.statement(stmt)
    return em.lines
