"""Shared fixtures and study-artifact loaders."""

import csv
import math
from pathlib import Path

import pytest

RESULTS = Path(__file__).resolve().parents[1] / "results"


def load_study(name):
    """Rows of results/<name>/study.csv as dicts with parsed numbers."""
    path = RESULTS / name / "study.csv"
    if not path.exists():
        pytest.fail(
            f"missing study artifact {path}; run scripts/run_studies.py first"
        )
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "set_index": int(row["set_index"]),
                    "scheme": row["scheme"],
                    "n": int(row["n"]),
                    "t_f": float(row["t_f"]),
                    "p_success": float(row["p_success"]),
                    "tts": float(row["tts"]),
                    "draws": int(row["draws"]),
                }
            )
    return rows


def series(rows, set_index, scheme, n_lo=None, n_hi=None):
    """Finite (n, tts) pairs of one study series, optionally size-windowed."""
    pairs = [
        (r["n"], r["tts"])
        for r in rows
        if r["set_index"] == set_index
        and r["scheme"] == scheme
        and math.isfinite(r["tts"])
        and (n_lo is None or r["n"] >= n_lo)
        and (n_hi is None or r["n"] <= n_hi)
    ]
    return [p[0] for p in pairs], [p[1] for p in pairs]
