"""Source container with a line index for error reporting."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class SourceProgram:
    path: str
    text: str
    _line_starts: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        starts = [0]
        for i, ch in enumerate(self.text):
            if ch == "\n":
                starts.append(i + 1)
        self._line_starts = starts

    @classmethod
    def from_path(cls, path):
        with open(path, "r", encoding="utf-8") as f:
            return cls(str(path), f.read())

    @classmethod
    def from_text(cls, text, path="<string>"):
        return cls(path, text)

    def line(self, lineno):
        """1-based line text, without the trailing newline."""
        start = self._line_starts[lineno - 1]
        end = self.text.find("\n", start)
        return self.text[start:] if end < 0 else self.text[start:end]

    @property
    def line_count(self):
        return len(self._line_starts)
