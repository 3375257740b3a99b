"""Exception hierarchy for knotfair.

Every error derives from :class:`KnotError` and from the closest builtin so
callers can catch either way.
"""

from __future__ import annotations

from typing import Iterable, Optional


class KnotError(Exception):
    """Base class for every error raised by the package."""


class DegenerateSpeed(KnotError, ValueError):
    """A segment has (near) zero speed where curvature is needed."""


class DegenerateKnot(KnotError, ValueError):
    """The knot has (near) zero total arc length."""


class TangentialContact(KnotError, ValueError):
    """Two segments touch with parallel tangents instead of crossing."""


class MalformedPath(KnotError, ValueError):
    """Control sequence does not describe a closed, smooth Bezier loop."""


class MalformedSvg(KnotError, ValueError):
    """The SVG file is not well-formed XML."""

    def __init__(self, file: str, line: Optional[int], reason: str) -> None:
        where = f"{file}:{line}" if line is not None else file
        super().__init__(f"{where}: {reason}")
        self.file = file
        self.line = line


class BadLength(KnotError, ValueError):
    """A knot vector length is not a multiple of four."""


class NoPathFound(KnotError, ValueError):
    """The SVG document has no usable path element."""


class UnsupportedCommand(KnotError, ValueError):
    """Path data uses commands outside M/C/L/H/V/Z."""


class OpenPath(KnotError, ValueError):
    """Path data is not closed."""


class InconsistentSpec(KnotError, ValueError):
    """A symmetry specification contradicts itself or the knot."""

    def __init__(self, message: str, index: Optional[int] = None) -> None:
        super().__init__(message)
        self.index = index


class OverUnderMismatch(KnotError, ValueError):
    """Over/under rows do not match the detected crossings."""

    def __init__(
        self,
        rows: Iterable[tuple[int, int]] = (),
        crossings: Iterable[tuple[int, int]] = (),
    ) -> None:
        self.rows = [tuple(row) for row in rows]
        self.crossings = [tuple(pair) for pair in crossings]
        parts = []
        if self.rows:
            listed = ", ".join(f"({a},{b})" for a, b in self.rows)
            parts.append(f"rows naming segments that do not cross: {listed}")
        if self.crossings:
            listed = ", ".join(f"({a},{b})" for a, b in self.crossings)
            parts.append(f"crossings without a row: {listed}")
        super().__init__("; ".join(parts) or "over/under specification mismatch")


class NonFiniteStart(KnotError, ValueError):
    """The starting point of an optimization has no finite badness."""


class NonFiniteProbe(KnotError, ValueError):
    """A finite-difference probe evaluated to NaN or infinity."""


class OutOfRange(KnotError, IndexError):
    """A segment or node index lies outside 1..n."""


class IoFailure(KnotError, OSError):
    """Reading or writing a file failed."""


class TopologyChanged(KnotError, RuntimeError):
    """The crossing structure of the knot changed."""
