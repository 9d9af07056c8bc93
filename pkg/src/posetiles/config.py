"""Configurable search and verification budgets.

Exceeding a budget raises BudgetExceededError; nothing is silently
truncated.  All fields can be overridden per call, via CLI flags, or via
POSETILES_* environment variables (see cli).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

_ENV_PREFIX = "POSETILES_"


@dataclass(frozen=True)
class Budgets:
    # Backtracking embedding search: largest base dimension tried.
    embed_dim_cap: int = 12
    # Largest lattice dimension for copy enumeration / mod certificates.
    enum_dim_cap: int = 24
    # Largest n tried when building an r-partition certificate.
    weak_dim_cap: int = 64
    # Cell budget for materializing and verifying tile certificates.
    cells: int = 10_000_000
    # Node budget for backtracking searches (copies, exact cover).
    nodes: int = 10_000_000


DEFAULT_BUDGETS = Budgets()

_ENV_FIELDS = {
    "embed_dim_cap": "EMBED_DIM_CAP",
    "enum_dim_cap": "ENUM_DIM_CAP",
    "weak_dim_cap": "WEAK_DIM_CAP",
    "cells": "BUDGET_CELLS",
    "nodes": "BUDGET_NODES",
}


def budgets_from_env(base: Budgets = DEFAULT_BUDGETS) -> Budgets:
    """Apply POSETILES_* environment overrides to ``base``."""
    overrides = {}
    for field, suffix in _ENV_FIELDS.items():
        raw = os.environ.get(_ENV_PREFIX + suffix)
        if raw is not None:
            overrides[field] = int(raw)
    return replace(base, **overrides) if overrides else base
