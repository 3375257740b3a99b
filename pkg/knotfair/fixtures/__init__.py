"""Shipped first drafts and their symmetry and over/under files."""

from pathlib import Path

FIXTURES_DIR = Path(__file__).resolve().parent


def fixture_path(name: str) -> Path:
    return FIXTURES_DIR / name
