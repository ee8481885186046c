"""Learning package repository structure from installation outcomes."""
from __future__ import annotations
