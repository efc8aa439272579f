"""Relocatable-object parsing and function extraction.

The host serves compiled function bodies to a running kernel by slicing
them straight out of a relocatable ELF object: find the function's
symbol, take its [value, value+size) span of the containing section.
That is only sound if no relocation lands inside the span, so
extraction refuses spans with pending relocations unless the caller is
merely measuring sizes (relaxed=True).

Both ELF32 and ELF64 little-endian objects parse; the host gates served
code on the machine tag matching the kernel's own architecture.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import (BadMagicError, MachineMismatchError, NotRelocatableError,
                     RelocationUnresolvedError, SymbolNotFoundError,
                     TruncatedFileError, UnsupportedEndiannessError)

ET_REL = 1
SHT_SYMTAB = 2
SHT_STRTAB = 3
SHT_RELA = 4
SHT_NOBITS = 8
SHT_REL = 9
SHF_ALLOC = 0x2
STT_FUNC = 2

EM_386 = 3
EM_X86_64 = 62
EM_ARM = 40
EM_AARCH64 = 183

_MACHINE_NAMES = {EM_386: "i386", EM_X86_64: "x86-64", EM_ARM: "arm",
                  EM_AARCH64: "aarch64"}


def machine_name(code):
    return _MACHINE_NAMES.get(code, "machine %d" % code)


def host_machine_code():
    import platform
    return {"x86_64": EM_X86_64, "amd64": EM_X86_64, "i386": EM_386,
            "i686": EM_386, "aarch64": EM_AARCH64,
            "arm64": EM_AARCH64}.get(platform.machine().lower())


@dataclass
class Section:
    index: int
    name: str
    sh_type: int
    flags: int
    offset: int
    size: int
    link: int
    info: int
    entsize: int
    data: bytes = field(repr=False, default=b"")


@dataclass
class Symbol:
    name: str
    value: int
    size: int
    info: int
    shndx: int

    @property
    def sym_type(self):
        return self.info & 0xF

    @property
    def bind(self):
        return self.info >> 4


@dataclass
class Relocation:
    section_index: int   # section the relocation applies to
    offset: int
    sym: int
    rel_type: int
    addend: int


@dataclass
class ElfObject:
    is64: bool
    machine: int
    et_type: int
    sections: list
    symbols: list
    relocations: list

    def section_named(self, name):
        for s in self.sections:
            if s.name == name:
                return s
        return None

    def symbol_named(self, name):
        for s in self.symbols:
            if s.name == name:
                return s
        return None

    def alloc_size(self):
        """Bytes the object contributes to a loaded image (SHF_ALLOC)."""
        return sum(s.size for s in self.sections if s.flags & SHF_ALLOC)


def _need(data, start, count, what):
    if start < 0 or start + count > len(data):
        raise TruncatedFileError("%s extends past end of file (%d+%d of %d)"
                                 % (what, start, count, len(data)))
    return data[start:start + count]


def parse_object(data):
    """Parse a relocatable ELF object from bytes."""
    data = memoryview(bytes(data))
    ident = _need(data, 0, 16, "ELF identification")
    if bytes(ident[:4]) != b"\x7fELF":
        raise BadMagicError("not an ELF file")
    ei_class, ei_data = ident[4], ident[5]
    if ei_data != 1:
        raise UnsupportedEndiannessError("big-endian objects are not handled")
    if ei_class == 2:
        is64 = True
        hdr = struct.unpack_from("<HHIQQQIHHHHHH", _need(data, 16, 48,
                                                         "ELF header"))
    elif ei_class == 1:
        is64 = False
        hdr = struct.unpack_from("<HHIIIIIHHHHHH", _need(data, 16, 36,
                                                         "ELF header"))
    else:
        raise BadMagicError("bad ELF class %d" % ei_class)
    (et_type, machine, _version, _entry, _phoff, shoff, _flags, _ehsize,
     _phentsize, _phnum, shentsize, shnum, shstrndx) = hdr
    if et_type != ET_REL:
        raise NotRelocatableError("object type %d is not ET_REL" % et_type)
    want_entsize = 64 if is64 else 40
    if shentsize != want_entsize:
        raise TruncatedFileError("unexpected section header size %d"
                                 % shentsize)
    if shnum == 0 or shstrndx >= shnum:
        raise TruncatedFileError("section string table index out of range")

    raw_sections = []
    for i in range(shnum):
        raw = _need(data, shoff + i * shentsize, shentsize,
                    "section header %d" % i)
        if is64:
            (sh_name, sh_type, sh_flags, _addr, sh_offset, sh_size, sh_link,
             sh_info, _align, sh_entsize) = struct.unpack_from("<IIQQQQIIQQ",
                                                               raw)
        else:
            (sh_name, sh_type, sh_flags, _addr, sh_offset, sh_size, sh_link,
             sh_info, _align, sh_entsize) = struct.unpack_from("<IIIIIIIIII",
                                                               raw)
        body = b""
        if sh_type != SHT_NOBITS and sh_size:
            body = bytes(_need(data, sh_offset, sh_size, "section %d" % i))
        raw_sections.append((sh_name, Section(i, "", sh_type, sh_flags,
                                              sh_offset, sh_size, sh_link,
                                              sh_info, sh_entsize, body)))

    shstr = raw_sections[shstrndx][1].data

    def str_at(table, off):
        if off >= len(table):
            raise TruncatedFileError("string offset %d out of table" % off)
        end = table.find(b"\0", off)
        if end < 0:
            raise TruncatedFileError("unterminated string table entry")
        return table[off:end].decode("utf-8", "replace")

    sections = []
    for sh_name, sec in raw_sections:
        sec.name = str_at(shstr, sh_name)
        sections.append(sec)

    symbols = []
    for sec in sections:
        if sec.sh_type != SHT_SYMTAB:
            continue
        if sec.link >= len(sections):
            raise TruncatedFileError("symtab string link out of range")
        strtab = sections[sec.link].data
        entsize = 24 if is64 else 16
        if sec.entsize not in (0, entsize):
            raise TruncatedFileError("unexpected symbol size %d" % sec.entsize)
        if len(sec.data) % entsize:
            raise TruncatedFileError("symbol table size not a multiple of %d"
                                     % entsize)
        for off in range(0, len(sec.data), entsize):
            if is64:
                st_name, st_info, _other, st_shndx, st_value, st_size = \
                    struct.unpack_from("<IBBHQQ", sec.data, off)
            else:
                st_name, st_value, st_size, st_info, _other, st_shndx = \
                    struct.unpack_from("<IIIBBH", sec.data, off)
            symbols.append(Symbol(str_at(strtab, st_name), st_value, st_size,
                                  st_info, st_shndx))

    relocations = []
    for sec in sections:
        if sec.sh_type not in (SHT_REL, SHT_RELA):
            continue
        rela = sec.sh_type == SHT_RELA
        if is64:
            entsize = 24 if rela else 16
        else:
            entsize = 12 if rela else 8
        if len(sec.data) % entsize:
            raise TruncatedFileError("relocation table size not a multiple "
                                     "of %d" % entsize)
        for off in range(0, len(sec.data), entsize):
            if is64:
                if rela:
                    r_offset, r_info, r_addend = struct.unpack_from(
                        "<QQq", sec.data, off)
                else:
                    r_offset, r_info = struct.unpack_from("<QQ", sec.data,
                                                          off)
                    r_addend = 0
                sym, typ = r_info >> 32, r_info & 0xFFFFFFFF
            else:
                if rela:
                    r_offset, r_info, r_addend = struct.unpack_from(
                        "<IIi", sec.data, off)
                else:
                    r_offset, r_info = struct.unpack_from("<II", sec.data,
                                                          off)
                    r_addend = 0
                sym, typ = r_info >> 8, r_info & 0xFF
            relocations.append(Relocation(sec.info, r_offset, sym, typ,
                                          r_addend))
    return ElfObject(is64, machine, et_type, sections, symbols, relocations)


def extract_function(obj, name, relaxed=False):
    """Slice one function's code bytes out of a parsed object.

    Refuses (RelocationUnresolvedError) if any relocation lands inside
    the function span, since the bytes would run with unresolved
    references.  relaxed=True skips that check for size measurement.
    """
    sym = obj.symbol_named(name)
    if sym is None or sym.sym_type != STT_FUNC:
        raise SymbolNotFoundError("no function symbol %r" % name)
    if sym.shndx == 0 or sym.shndx >= len(obj.sections):
        raise SymbolNotFoundError("symbol %r has no defining section" % name)
    sec = obj.sections[sym.shndx]
    if sym.value + sym.size > len(sec.data):
        raise TruncatedFileError("symbol %r extends past its section" % name)
    if not relaxed:
        for rel in obj.relocations:
            if rel.section_index != sym.shndx:
                continue
            if sym.value <= rel.offset < sym.value + sym.size:
                raise RelocationUnresolvedError(
                    "function %r needs relocation type %d at +0x%x; "
                    "loadable code must be self-contained"
                    % (name, rel.rel_type, rel.offset - sym.value))
    return sec.data[sym.value:sym.value + sym.size]


def check_machine(obj, expect=None):
    """Gate an object on the kernel's architecture before serving it."""
    expect = expect if expect is not None else host_machine_code()
    if expect is not None and obj.machine != expect:
        raise MachineMismatchError(
            "object is %s but the kernel runs %s"
            % (machine_name(obj.machine), machine_name(expect)))
