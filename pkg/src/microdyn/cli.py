"""Command-line entry point wiring the pipeline together.

Subcommands: compile (emit C units), build (compile + toolchain), run
(build + execute under the host loader, streaming output), interp (the
reference interpreter), bench (the Jacobi suite), elf-dump (inspect a
relocatable object).

Exit status: 0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import traceback
from pathlib import Path

from . import bench, codegen, elf, host, parser, refinterp, semant
from .errors import MicrodynError
from .source import SourceProgram


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; user errors must exit 1 here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _lex_levels(text):
    if text == "auto":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected an integer or 'auto', got %r" % text)
    if value < 1:
        raise argparse.ArgumentTypeError("lexical depth must be positive")
    return value


def _profile(args):
    if getattr(args, "toolchain", None):
        return host.ToolchainProfile.from_config(args.toolchain)
    return host.ToolchainProfile()


def _outdir(args, default="microdyn-out"):
    if args.out:
        return Path(args.out)
    env = os.environ.get("MICRODYN_WORKDIR")
    return Path(env) if env else Path(default)


def _compile_file(args):
    source = SourceProgram.from_path(Path(args.file))
    analysis = semant.analyze(parser.parse(source))
    config = codegen.CodegenConfig(mode=args.dispatch,
                                   max_lex_levels=args.max_lex_levels)
    return codegen.generate(analysis, config)


def _cmd_compile(args):
    program = _compile_file(args)
    out = _outdir(args)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for unit in program.units:
        (out / unit.filename).write_text(unit.text)
        written.append(unit.filename)
    if args.emit_symtab:
        (out / "kernel.symtab").write_text(program.symtab)
        written.append("kernel.symtab")
    for name in written:
        print(out / name)
    return 0


def _cmd_build(args):
    built = host.build_kernel(_compile_file(args), _outdir(args),
                              profile=_profile(args))
    print(built.executable)
    for entry in built.symtab.values():
        print(entry.object_path)
    return 0


def _cmd_run(args):
    workdir = args.out or os.environ.get("MICRODYN_WORKDIR") \
        or tempfile.mkdtemp(prefix="microdyn-run-")
    built = host.build_kernel(_compile_file(args), Path(workdir),
                              profile=_profile(args))
    report = host.run_kernel(built, timeout=args.timeout,
                             on_output=lambda line: (sys.stdout.write(line),
                                                     sys.stdout.flush()))
    if report.exit_status != 0:
        print("microdyn: kernel exited with status %d" % report.exit_status,
              file=sys.stderr)
        return 1
    return 0


def _cmd_interp(args):
    source = SourceProgram.from_path(Path(args.file))
    sys.stdout.write(refinterp.run(source.text).output)
    return 0


def _cmd_bench(args):
    variants = tuple(v.strip() for v in args.variants.split(",") if v.strip())
    try:
        spec = bench.BenchmarkSpec(nx=args.nx, max_iters=args.max_iters,
                                   repetitions=args.repetitions,
                                   variants=variants, workdir=_outdir(
                                       args, default="bench-out"),
                                   profile=_profile(args))
    except ValueError as exc:
        print("microdyn: %s" % exc, file=sys.stderr)
        return 1
    result = bench.run_suite(spec)
    sys.stdout.write(result.table())
    print("csv written to %s" % (spec.workdir / "bench.csv"))
    return 0


_SYM_TYPES = {0: "NOTYPE", 1: "OBJECT", 2: "FUNC", 3: "SECTION", 4: "FILE"}


def _cmd_elf_dump(args):
    obj = elf.parse_object(Path(args.object).read_bytes())
    print("%s, %s, type %d" % (elf.machine_name(obj.machine),
                               "64-bit" if obj.is64 else "32-bit",
                               obj.et_type))
    print("sections:")
    for s in obj.sections:
        if s.sh_type == 0:
            continue
        alloc = " [alloc]" if s.flags & elf.SHF_ALLOC else ""
        print("  %-24s %6d bytes%s" % (s.name, s.size, alloc))
    print("symbols:")
    for sym in obj.symbols:
        if not sym.name:
            continue
        kind = _SYM_TYPES.get(sym.sym_type, str(sym.sym_type))
        print("  %-24s %-7s %6d bytes" % (sym.name, kind, sym.size))
    return 0


def _build_argparser():
    top = _Parser(prog="microdyn",
                  description="MiniPy to C compiler and dynamic loader")
    sub = top.add_subparsers(dest="command", required=True)

    def source_cmd(name, fn, help_text, out_help):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="MiniPy source file")
        p.add_argument("--out", metavar="DIR", help=out_help)
        p.add_argument("--dispatch", default="auto",
                       choices=("static", "dynamic", "load", "auto"),
                       help="force a dispatch mode (default: auto)")
        p.add_argument("--max-lex-levels", type=_lex_levels, default=None,
                       metavar="N|auto",
                       help="display depth (default: auto = computed)")
        p.add_argument("--toolchain", metavar="FILE",
                       help="JSON toolchain profile")
        p.set_defaults(fn=fn)
        return p

    p = source_cmd("compile", _cmd_compile, "emit C translation units",
                   "output directory for the units")
    p.add_argument("--emit-symtab", action="store_true",
                   help="also write the dynamic symbol table")

    source_cmd("build", _cmd_build, "compile and build a kernel executable",
               "build directory")

    p = source_cmd("run", _cmd_run, "build and run under the host loader",
                   "build directory (default: a fresh temp dir)")
    p.add_argument("--timeout", type=float, default=300.0,
                   help="kill the kernel after this many seconds")

    p = sub.add_parser("interp", help="run under the reference interpreter")
    p.add_argument("file", help="MiniPy source file")
    p.set_defaults(fn=_cmd_interp)

    p = sub.add_parser("bench", help="run the Jacobi benchmark suite")
    p.add_argument("--nx", type=int, default=100, help="grid points")
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--variants", default="static,dynamic,loading,native",
                   help="comma list from vm,static,dynamic,loading,native")
    p.add_argument("--out", metavar="DIR", help="suite working directory")
    p.add_argument("--toolchain", metavar="FILE",
                   help="JSON toolchain profile")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("elf-dump", help="inspect a relocatable object")
    p.add_argument("object", help="ELF object file")
    p.set_defaults(fn=_cmd_elf_dump)

    return top


def main(argv=None):
    args = _build_argparser().parse_args(argv)
    try:
        return args.fn(args)
    except MicrodynError as exc:
        print("microdyn: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("microdyn: %s" % exc, file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
