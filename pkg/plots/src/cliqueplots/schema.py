"""CSV contract for the experiment scenarios.

The experiment harness writes one semicolon-separated CSV per scenario with
a fixed header. This module is the only place those headers are spelled out;
a frame returned by load_table is fully validated and renderers never touch
the file again.
"""

from __future__ import annotations

from pathlib import Path

import pandas as pd


class SchemaError(ValueError):
    """Input CSV does not match the documented scenario schema."""


SEPARATOR = ";"

SCHEMAS: dict[str, tuple[str, ...]] = {
    "landscape": ("gamma", "c", "p_mc"),
    "improvement": ("lambda_max", "gamma_star", "p_gbs", "p_dgbs", "improvement"),
    "loss-prob": ("eta", "gamma", "p_mc"),
    "success-rate": (
        "sampler", "rate", "ci_low", "ci_high",
        "repeats", "n_samples", "n_sqz", "n_disp",
    ),
    "loss-success": (
        "eta", "sampler", "rate", "ci_low", "ci_high",
        "repeats", "n_samples", "n_sqz", "n_disp",
    ),
    "entropy": ("gamma", "entropy", "p_mc_cond"),
    "scaling": (
        "nodes", "clique_size", "improvement", "gamma_star",
        "loop_strength", "n_disp", "n_sqz", "ratio",
    ),
}

# Every column is numeric except the sampler tag.
TEXT_COLUMNS = frozenset({"sampler"})


def scenario_columns(scenario: str) -> tuple[str, ...]:
    try:
        return SCHEMAS[scenario]
    except KeyError:
        known = ", ".join(sorted(SCHEMAS))
        raise SchemaError(f"unknown scenario {scenario!r}; expected one of {known}") from None


def load_table(path: str | Path, scenario: str) -> pd.DataFrame:
    """Read and validate a scenario CSV; raises SchemaError on any mismatch."""
    required = scenario_columns(scenario)
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"CSV not found: {path}")
    try:
        frame = pd.read_csv(path, sep=SEPARATOR)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"empty CSV: {path}") from None
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(
            f"missing columns {missing} for scenario {scenario!r} in {path}"
        )
    if not len(frame):
        raise SchemaError(f"empty CSV: {path} has a header but no rows")
    for col in required:
        if col in TEXT_COLUMNS:
            continue
        values = pd.to_numeric(frame[col], errors="coerce")
        if values.isna().any():
            bad = frame[col][values.isna()].iloc[0]
            raise SchemaError(f"non-numeric value {bad!r} in column {col!r} of {path}")
        frame[col] = values
    return frame
