"""Host-side toolchain: build kernels, run them, serve function loads.

Building writes the generated translation units next to the runtime
sources, compiles the resident unit into a kernel executable, and
compiles each dynamic unit into a relocatable object.  Extraction is
validated at build time so a kernel never discovers an unloadable
function at run time.

Running speaks a little-endian framed protocol over the kernel's
stdin/stdout:

    kernel -> host   0x01 | u32 len | function key     (load request)
    kernel -> host   0x02 | u32 len | UTF-8 bytes      (output line)
    kernel -> host   0x03 | u32 4   | i32 status       (exit)
    host -> kernel   u8 status | u32 size | code bytes (load reply)

Every output frame is timestamped on arrival; runs started with
mark_times also collect the kernel's own emission clocks (reported out
of band on stderr), which is what the benchmark markers use, since pipe
scheduling makes arrival deltas meaningless at millisecond scale.
Every load is logged, which gives the load-trace tests their events.
"""

from __future__ import annotations

import json
import os
import statistics
import struct
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import codegen, elf, parser, semant
from .errors import (ChannelError, ToolchainError, UnknownFunctionError)

_RUNTIME_DIR = Path(__file__).resolve().parents[2] / "runtime"

RESIDENT_CFLAGS = ("-std=c99", "-O2", "-fwrapv")
# dynamic units must compile to self-contained position-independent-by-
# construction code: no PLT, no jump tables, no unwind tables, no stack
# protector cookies, since any of those would leave relocations behind
DYNAMIC_CFLAGS = ("-std=c99", "-Os", "-fwrapv", "-fno-pic",
                  "-fno-stack-protector", "-fno-asynchronous-unwind-tables",
                  "-fno-jump-tables", "-fomit-frame-pointer")


@dataclass
class ToolchainProfile:
    cc: str = None
    runtime_dir: Path = None
    resident_cflags: tuple = RESIDENT_CFLAGS
    dynamic_cflags: tuple = DYNAMIC_CFLAGS

    def __post_init__(self):
        if self.cc is None:
            self.cc = os.environ.get("MICRODYN_CC", "cc")
        if self.runtime_dir is None:
            self.runtime_dir = Path(os.environ.get("MICRODYN_RUNTIME",
                                                   _RUNTIME_DIR))
        self.runtime_dir = Path(self.runtime_dir)

    @classmethod
    def from_config(cls, path):
        """Profile from a JSON file; environment overrides still apply."""
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ToolchainError("bad toolchain config %s: %s" % (path, exc))
        known = {"cc", "runtime_dir", "resident_cflags", "dynamic_cflags"}
        unknown = set(raw) - known
        if unknown:
            raise ToolchainError("unknown toolchain config keys: %s"
                                 % ", ".join(sorted(unknown)))
        for key in ("resident_cflags", "dynamic_cflags"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass
class SymtabEntry:
    qualname: str
    mangled: str
    object_path: Path
    argc: int
    defer: bool


@dataclass
class BuiltKernel:
    workdir: Path
    executable: Path
    symtab: dict
    program: object
    profile: ToolchainProfile

    def code_bytes(self, qualname):
        """Extract the served bytes for one dynamic function."""
        entry = self.symtab.get(qualname)
        if entry is None:
            raise UnknownFunctionError("no loadable function %r" % qualname)
        obj = elf.parse_object(entry.object_path.read_bytes())
        elf.check_machine(obj)
        return elf.extract_function(obj, entry.mangled)

    def resident_size(self):
        """SHF_ALLOC bytes of the resident kernel image."""
        return elf.parse_object(
            (self.workdir / "kernel.o").read_bytes()).alloc_size()

    def dynamic_sizes(self):
        """qualname -> SHF_ALLOC bytes of its loadable object."""
        return {q: elf.parse_object(e.object_path.read_bytes()).alloc_size()
                for q, e in self.symtab.items()}


@dataclass
class RunReport:
    output: str
    events: list            # (seconds, kind, payload) in arrival order
    exit_status: int
    duration: float
    stderr: str = ""
    load_sizes: dict = field(default_factory=dict)
    kernel_times: dict = field(default_factory=dict)

    @property
    def loads(self):
        return [payload for _, kind, payload in self.events
                if kind == "load"]

    def marker_time(self, text):
        """Emission time of the first output line equal to text.

        Prefers the kernel's own clock (reported when the run was started
        with mark_times); falls back to host arrival time, which is only
        trustworthy at scales well above scheduler latency.
        """
        seq = 0
        for t, kind, payload in self.events:
            if kind != "output":
                continue
            if payload.rstrip("\n") == text:
                return self.kernel_times.get(seq, t)
            seq += 1
        raise ChannelError("marker %r never arrived" % text)

    def event_log(self):
        """JSON-lines event log, one record per event."""
        lines = []
        for t, kind, payload in self.events:
            rec = {"ts": round(t, 6), "kind": kind}
            if kind == "load":
                rec["name"] = payload
                if payload in self.load_sizes:
                    rec["bytes"] = self.load_sizes[payload]
            elif kind == "output":
                rec["bytes"] = len(payload.encode("utf-8"))
            else:
                rec["status"] = payload
            lines.append(json.dumps(rec))
        return "\n".join(lines) + "\n" if lines else ""


def _run_cc(cmd, cwd):
    res = subprocess.run(cmd, cwd=str(cwd), capture_output=True, text=True)
    if res.returncode != 0:
        raise ToolchainError("%s failed:\n%s" % (" ".join(cmd),
                                                 res.stderr.strip()))


_runtime_cache = {}


def _runtime_object(profile, workdir):
    """Compile oly_rt.c once per toolchain config, then reuse the bytes."""
    rt_src = profile.runtime_dir / "oly_rt.c"
    if not rt_src.exists():
        raise ToolchainError("runtime not found at %s" % rt_src)
    key = (profile.cc, profile.resident_cflags, str(rt_src),
           rt_src.stat().st_mtime_ns)
    obj = _runtime_cache.get(key)
    if obj is None:
        _run_cc([profile.cc, *profile.resident_cflags,
                 "-I", str(profile.runtime_dir), "-c", str(rt_src),
                 "-o", "oly_rt.o"], workdir)
        obj = (workdir / "oly_rt.o").read_bytes()
        _runtime_cache.clear()  # config changed; no point keeping old ones
        _runtime_cache[key] = obj
    else:
        (workdir / "oly_rt.o").write_bytes(obj)
    return workdir / "oly_rt.o"


def compile_source(source, mode="auto"):
    """Source text -> CompiledProgram (parse, analyze, generate)."""
    module = parser.parse(source)
    analysis = semant.analyze(module)
    return codegen.generate(analysis, codegen.CodegenConfig(mode=mode))


def build_kernel(source, workdir, mode="auto", profile=None):
    """Compile source (or a CompiledProgram) into a runnable kernel."""
    profile = profile or ToolchainProfile()
    program = (source if isinstance(source, codegen.CompiledProgram)
               else compile_source(source, mode))
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    include = ["-I", str(profile.runtime_dir)]

    for unit in program.units:
        (workdir / unit.filename).write_text(unit.text)
    (workdir / "kernel.symtab").write_text(program.symtab)

    _runtime_object(profile, workdir)
    _run_cc([profile.cc, *profile.resident_cflags, *include, "-c",
             "kernel.c", "-o", "kernel.o"], workdir)
    _run_cc([profile.cc, "kernel.o", "oly_rt.o", "-o", "kernel", "-lm"],
            workdir)

    symtab = {}
    for line in program.symtab.splitlines():
        qualname, mangled, objname, argc, defer = line.split("\t")
        src = objname[:-2] + ".c"
        _run_cc([profile.cc, *profile.dynamic_cflags, *include, "-c", src,
                 "-o", objname], workdir)
        symtab[qualname] = SymtabEntry(qualname, mangled, workdir / objname,
                                       int(argc), defer == "1")

    built = BuiltKernel(workdir, workdir / "kernel", symtab, program, profile)
    for qualname in symtab:
        # extract at build time so a bad unit fails here, not mid-run; the
        # raw image also lets the kernel run standalone with OLY_LOAD_DIR
        code = built.code_bytes(qualname)
        (workdir / (qualname + ".bin")).write_bytes(code)
    return built


def _read_exact(stream, n):
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise ChannelError("kernel closed its channel mid-frame")
        buf += chunk
    return buf


def run_kernel(built, timeout=60.0, env=None, expect_failure=False,
               mark_times=False, on_output=None):
    """Run a built kernel, serving loads and logging frames until exit.

    on_output, when given, is called with each output line as it
    arrives, so callers can stream instead of waiting for the report.
    """
    run_env = dict(os.environ)
    run_env["OLY_WIRE"] = "1"
    if mark_times:
        run_env["OLY_MARK_TIMES"] = "1"
    if env:
        run_env.update(env)
    proc = subprocess.Popen([str(built.executable)], stdin=subprocess.PIPE,
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                            env=run_env)
    stderr_chunks = []
    drain = threading.Thread(
        target=lambda: stderr_chunks.append(proc.stderr.read()), daemon=True)
    drain.start()
    killer = threading.Timer(timeout, proc.kill)
    killer.start()
    start = time.monotonic()
    events = []
    output = []
    load_sizes = {}
    exit_status = None
    try:
        while True:
            head = proc.stdout.read(5)
            if not head:
                break
            if len(head) < 5:
                raise ChannelError("truncated frame header")
            tag, length = head[0], struct.unpack("<I", head[1:5])[0]
            now = time.monotonic() - start
            if tag == 0x01:
                key = _read_exact(proc.stdout, length).decode("utf-8")
                try:
                    code = built.code_bytes(key)
                except UnknownFunctionError:
                    proc.stdin.write(b"\x01")
                    proc.stdin.flush()
                    raise
                events.append((now, "load", key))
                load_sizes[key] = len(code)
                proc.stdin.write(b"\x00" + struct.pack("<I", len(code)) +
                                 code)
                proc.stdin.flush()
            elif tag == 0x02:
                text = _read_exact(proc.stdout, length).decode("utf-8")
                events.append((now, "output", text))
                output.append(text)
                if on_output is not None:
                    on_output(text)
            elif tag == 0x03:
                payload = _read_exact(proc.stdout, length)
                exit_status = struct.unpack("<i", payload)[0]
                events.append((now, "exit", exit_status))
                break
            else:
                raise ChannelError("unknown frame tag 0x%02x" % tag)
    finally:
        killer.cancel()
        try:
            proc.stdin.close()
        except OSError:
            pass
        proc.wait(timeout=10)
        drain.join(timeout=10)
    duration = time.monotonic() - start
    stderr_text = (stderr_chunks[0] or b"").decode("utf-8", "replace") \
        if stderr_chunks else ""
    stderr_text, kernel_times = _split_mark_lines(stderr_text)
    if exit_status is None and not expect_failure:
        raise ChannelError("kernel ended without an exit frame%s"
                           % (": " + stderr_text.strip()
                              if stderr_text.strip() else ""))
    report = RunReport("".join(output), events,
                       proc.returncode if exit_status is None else exit_status,
                       duration, stderr_text, load_sizes, kernel_times)
    try:
        (built.workdir / "events.jsonl").write_text(report.event_log())
    except OSError:
        pass  # the log is advisory; the report is the source of truth
    return report


def _split_mark_lines(stderr_text):
    """Pull "OLY_TS <seq> <seconds>" lines out of the stderr capture."""
    if "OLY_TS " not in stderr_text:
        return stderr_text, {}
    kept = []
    kernel_times = {}
    for line in stderr_text.splitlines():
        if line.startswith("OLY_TS "):
            _, seq, sec = line.split()
            kernel_times[int(seq)] = float(sec)
        else:
            kept.append(line)
    return "\n".join(kept) + ("\n" if kept else ""), kernel_times


@dataclass
class MeasureReport:
    times: list          # marker-to-marker seconds, one per repetition
    resident_bytes: int  # kernel.o + oly_rt.o allocatable bytes
    dynamic_bytes: dict  # qualname -> allocatable bytes of its object
    output: str          # program output of the last repetition

    @property
    def median_s(self):
        return statistics.median(self.times)

    @property
    def total_bytes(self):
        return self.resident_bytes + sum(self.dynamic_bytes.values())


def measure(built, repetitions=5, timeout=600.0, start="start", stop="stop"):
    """Time the kernel between its output markers; collect code sizes."""
    rt_size = elf.parse_object(
        (built.workdir / "oly_rt.o").read_bytes()).alloc_size()
    times = []
    output = ""
    for _ in range(repetitions):
        rep = run_kernel(built, timeout=timeout, mark_times=True)
        times.append(rep.marker_time(stop) - rep.marker_time(start))
        output = rep.output
    return MeasureReport(times, built.resident_size() + rt_size,
                         built.dynamic_sizes(), output)


def run_source(source, workdir, mode="auto", timeout=60.0, profile=None):
    """Convenience: build and run in one step."""
    built = build_kernel(source, workdir, mode=mode, profile=profile)
    return run_kernel(built, timeout=timeout)
