"""Beautification of knot diagrams drawn as closed cubic Bezier paths."""

from .config import settings

__all__ = ["settings"]
