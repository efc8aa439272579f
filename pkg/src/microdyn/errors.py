"""Error types shared across the toolchain.

Every stage raises from MicrodynError so the CLI can map failures to
exit code 1 (with usage errors reserved for exit code 2).  Errors that
correspond to a source location carry a (line, col) span.
"""

from __future__ import annotations


class MicrodynError(Exception):
    """Base class for all toolchain errors."""

    def __init__(self, message, span=None):
        self.span = span
        if span is not None:
            message = "line %d col %d: %s" % (span[0], span[1], message)
        super().__init__(message)


# --- frontend ---------------------------------------------------------------

class TabSpaceMixError(MicrodynError):
    """A tab character appeared in source; indentation is spaces-only."""


class UnterminatedStringError(MicrodynError):
    """A string literal ran off the end of its line."""


class ParseError(MicrodynError):
    """Token stream did not match the grammar.

    Carries the set of token descriptions that would have been accepted.
    """

    def __init__(self, message, span=None, expected=()):
        self.expected = frozenset(expected)
        if self.expected:
            message = "%s (expected %s)" % (message, ", ".join(sorted(self.expected)))
        super().__init__(message, span)


class UnsupportedFeatureError(MicrodynError):
    """Legal Python, but outside the kernel-language subset."""


# --- semantic analysis ------------------------------------------------------

class SemanticError(MicrodynError):
    """Base for scope/kind analysis failures."""


class UnboundNameError(SemanticError):
    """A name is referenced but bound in no enclosing scope."""


class NonlocalWithoutBindingError(SemanticError):
    """nonlocal names a variable with no enclosing function binding."""


class RedeclarationKindError(SemanticError):
    """A name is re-bound in a way that conflicts with its slot kind."""


class KindConflictError(SemanticError):
    """Two uses force a variable into incompatible kinds."""


class AmbiguousKindError(SemanticError):
    """A variable is used before any assignment fixes its kind."""


class NestedDynamicError(SemanticError):
    """@dynamic on a function nested inside another function."""


class NonTopLevelDynamicError(SemanticError):
    """@dynamic in a position other than a top-level def."""


class DeleteNonProcError(SemanticError):
    """del applied to something other than a Proc-kinded name."""


# --- ELF parsing ------------------------------------------------------------

class ElfError(MicrodynError):
    """Base for object-file parsing failures."""


class IoError(ElfError):
    """Object file could not be read."""


class BadMagicError(ElfError):
    """Input does not start with the ELF magic."""


class TruncatedFileError(ElfError):
    """A header, table, or section extends past end of file."""


class UnsupportedEndiannessError(ElfError):
    """Only little-endian objects are handled."""


class NotRelocatableError(ElfError):
    """Object is not ET_REL (the loader serves relocatable units only)."""


class SymbolNotFoundError(ElfError):
    """Requested function symbol is absent from .symtab."""


class MachineMismatchError(ElfError):
    """Object was compiled for a different machine than the kernel."""


class RelocationUnresolvedError(ElfError):
    """Extracted code span needs a relocation the loader cannot apply."""


# --- host / toolchain -------------------------------------------------------

class ToolchainError(MicrodynError):
    """External C compiler invocation failed."""


class ChannelError(MicrodynError):
    """Kernel byte channel produced a malformed or truncated frame."""


class UnknownFunctionError(MicrodynError):
    """Kernel requested a function absent from the symbol table."""


# --- runtime mirrors (used by the reference interpreter) --------------------

class MiniPyRuntimeError(MicrodynError):
    """Base for errors that mirror kernel-side runtime failures by name."""


class UnloadedProcError(MiniPyRuntimeError):
    """Call through a proc slot that is NULL, deleted, or never loaded."""


class DeleteStaticProcError(MiniPyRuntimeError):
    """del on a proc that is statically bound (owns no heap block)."""


class ZeroDivisionError_(MiniPyRuntimeError):
    """Integer // or % by zero."""


# --- bench ------------------------------------------------------------------

class VarianceError(MicrodynError):
    """Timing repetitions too noisy (IQR above 20% of the median)."""
