"""Scaling studies: draw-averaged TTS cells, exponential fits, summaries.

A study is a grid of (parameter set, scheme kind, size) cells.  Each cell
is integrated once, written to its own JSON file, and reused on rerun, so
long studies are resumable and every cell is independently reproducible
from (seed, draw) alone.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import spectrum
from .drives import SCHEME_KINDS, Uniform
from .evolve import EvolutionConfig, TtsRecord, averaged_tts
from .problem import DEFAULT_ENSEMBLE, SET_NAMES, AmpParams

__all__ = [
    "ScalingFit",
    "RunConfig",
    "fit_exponential",
    "run_cell",
    "scaling_study",
    "study_fits",
    "gap_exponent",
    "table_one",
    "TABLE_COLUMNS",
    "results_dir",
    "RESULTS_ENV",
]

#: Environment variable overriding where study artifacts are written.
RESULTS_ENV = "AMPANNEAL_RESULTS"


def results_dir(out_dir=None) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    return Path(os.environ.get(RESULTS_ENV, "results"))


@dataclass
class ScalingFit:
    """Least-squares fit of log2 TTS(n) = beta + gamma n."""

    beta: float
    gamma: float
    residual: float  # RMS of the log2 fit residuals
    n_values: list[int]
    log2_values: list[float]

    def predict(self, n: float) -> float:
        return 2.0 ** (self.beta + self.gamma * n)


def fit_exponential(n_values, values) -> ScalingFit:
    """Fit values ~ 2^(beta + gamma n); values must be positive and finite."""
    ns = np.asarray(n_values, dtype=float)
    vals = np.asarray(values, dtype=float)
    if ns.size != vals.size or ns.size < 4:
        raise ValueError("need at least four (n, value) pairs of equal length")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise ValueError("values must be finite and positive for a log fit")
    logs = np.log2(vals)
    gamma, beta = np.polyfit(ns, logs, 1)
    rms = float(np.sqrt(np.mean((beta + gamma * ns - logs) ** 2)))
    return ScalingFit(
        beta=float(beta),
        gamma=float(gamma),
        residual=rms,
        n_values=[int(v) for v in ns],
        log2_values=[float(v) for v in logs],
    )


@dataclass
class RunConfig:
    """Serializable description of one study grid."""

    kinds: list[str] = field(default_factory=lambda: ["uniform"])
    set_indices: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    n_values: list[int] = field(default_factory=lambda: list(range(5, 13)))
    draws: int = 1
    seed: int = 0
    target: float = 0.99
    norm_tol: float = 1e-6
    dt_max: float = 0.05
    runtime_coeff: float | None = None
    runtime_power: float = 2.0
    sample_kwargs: dict = field(default_factory=dict)

    def __post_init__(self):
        for kind in self.kinds:
            if kind not in SCHEME_KINDS:
                raise ValueError(f"unknown scheme kind {kind!r}")
        for idx in self.set_indices:
            if not 0 <= idx < len(DEFAULT_ENSEMBLE):
                raise ValueError(f"set index {idx} out of range")

    def evolution_config(self) -> EvolutionConfig:
        kwargs = {
            "norm_tol": self.norm_tol,
            "dt_max": self.dt_max,
            "runtime_power": self.runtime_power,
        }
        if self.runtime_coeff is not None:
            kwargs["runtime_coeff"] = self.runtime_coeff
        return EvolutionConfig(**kwargs)

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2))

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        return cls(**json.loads(Path(path).read_text()))


def _cell_path(out_dir: Path, set_index: int, kind: str, n: int, run: RunConfig) -> Path:
    # Tag encodes every knob that changes the cell's numbers besides the
    # coordinates in the name, so differently-configured studies never
    # collide in a shared output directory.
    knobs = json.dumps(
        [
            run.target,
            run.norm_tol,
            run.dt_max,
            run.runtime_coeff,
            run.runtime_power,
            sorted(run.sample_kwargs.items()),
        ],
        default=str,
    )
    tag = f"{zlib.crc32(knobs.encode()):08x}"
    name = f"set{set_index}_{kind}_n{n}_d{run.draws}_s{run.seed}_{tag}.json"
    return out_dir / "cells" / name


def run_cell(
    run: RunConfig,
    set_index: int,
    kind: str,
    n: int,
    out_dir=None,
    refresh: bool = False,
) -> TtsRecord:
    """Compute (or load the cached) draw-averaged record of one cell.

    The cell seed mixes the study seed with the cell coordinates, so each
    cell has an independent, reproducible random stream.
    """
    out = results_dir(out_dir)
    path = _cell_path(out, set_index, kind, n, run)
    if path.exists() and not refresh:
        payload = json.loads(path.read_text())
        payload.pop("schema", None)
        return TtsRecord.from_dict(payload)
    params = DEFAULT_ENSEMBLE.params(set_index, n)
    cell_seed = int(
        np.random.SeedSequence(
            [run.seed, set_index, SCHEME_KINDS.index(kind), n]
        ).generate_state(1)[0]
    )
    record = averaged_tts(
        kind,
        params,
        run.evolution_config(),
        draws=run.draws,
        seed=cell_seed,
        target=run.target,
        keep_schemes=True,
        **run.sample_kwargs,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({"schema": 1, **record.to_dict()}))
    tmp.replace(path)
    return record


def scaling_study(
    run: RunConfig, out_dir=None, refresh: bool = False, progress=None
) -> dict[tuple[int, str], list[TtsRecord]]:
    """Run the full grid, caching per cell, and write a summary CSV.

    progress, when given, is called with (set_index, kind, n, record)
    after each cell.
    """
    out = results_dir(out_dir)
    results: dict[tuple[int, str], list[TtsRecord]] = {}
    for set_index in run.set_indices:
        for kind in run.kinds:
            records = []
            for n in run.n_values:
                rec = run_cell(run, set_index, kind, n, out, refresh)
                records.append(rec)
                if progress is not None:
                    progress(set_index, kind, n, rec)
            results[(set_index, kind)] = records
    _write_csv(out / "study.csv", results)
    fits = study_fits(results)
    summary = {
        f"set{si}_{kind}": asdict(fit) for (si, kind), fit in sorted(fits.items())
    }
    (out / "fits.json").write_text(json.dumps(summary, indent=2))
    return results


def _write_csv(path: Path, results) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "set_index",
                "set_name",
                "scheme",
                "n",
                "t_f",
                "p_success",
                "tts",
                "draws",
                "seed",
            ]
        )
        for (set_index, kind), records in sorted(results.items()):
            for rec in records:
                writer.writerow(
                    [
                        set_index,
                        SET_NAMES[set_index],
                        kind,
                        rec.n,
                        f"{rec.t_f:.9g}",
                        f"{rec.p_success:.12g}",
                        f"{rec.tts:.12g}" if math.isfinite(rec.tts) else "inf",
                        rec.draws,
                        rec.seed,
                    ]
                )


def study_fits(results) -> dict[tuple[int, str], ScalingFit]:
    """Exponential TTS fit per (set, scheme) series.

    Cells with an unreachable target (infinite TTS) are excluded from the
    fit; a warning is issued when more than 10% of a series is excluded.
    Series with fewer than four usable cells are omitted.
    """
    fits = {}
    for key, records in results.items():
        usable = [r for r in records if math.isfinite(r.tts) and r.tts > 0]
        if len(usable) < len(records) and len(records) - len(usable) > 0.1 * len(
            records
        ):
            warnings.warn(
                f"series {key}: {len(records) - len(usable)}/{len(records)} "
                "cells excluded from the fit (target unreachable)",
                stacklevel=2,
            )
        if len(usable) >= 4:
            fits[key] = fit_exponential(
                [r.n for r in usable], [r.tts for r in usable]
            )
    return fits


_GAP_CACHE: dict[tuple[int, int], float] = {}


def gap_exponent(set_index: int, n_values) -> ScalingFit:
    """Scaling fit of the inverse-square minimum gap of the plain sweep."""
    vals = []
    for n in n_values:
        key = (set_index, int(n))
        if key not in _GAP_CACHE:
            params = DEFAULT_ENSEMBLE.params(set_index, int(n))
            _GAP_CACHE[key] = spectrum.gap_profile(Uniform(), params).delta_min
        vals.append(1.0 / _GAP_CACHE[key] ** 2)
    return fit_exponential(list(n_values), vals)


#: Summary-table columns: short label -> scheme kind (None = adiabatic
#: reference exponent fitted from 1/gap^2 of the plain sweep).
TABLE_COLUMNS: tuple[tuple[str, str | None], ...] = (
    ("1/gap^2", None),
    ("S", "uniform"),
    ("I", "inhomogeneous"),
    ("C_F", "couplers-ferro"),
    ("C_A", "couplers-antiferro"),
    ("C_M", "couplers-mixed"),
    ("M", "rfqa-m"),
    ("CM", "rfqa-m-couplers"),
    ("SyncM", "sync-m"),
    ("SyncMC", "sync-m-couplers"),
    ("D", "rfqa-d"),
)


def table_one(run: RunConfig, out_dir=None, progress=None) -> list[dict]:
    """Method-by-set matrix of fitted scaling exponents.

    Runs (or loads from cache) every cell of the grid described by `run`,
    fits each (set, scheme) series, and returns one dict per cell with
    keys set_index, set_name, column, scheme, gamma, residual, draws; a
    cell that cannot be fitted instead carries a `reason`.  Writes
    table1.csv (long format) and table1.txt (aligned gamma matrix) under
    the output directory.
    """
    out = results_dir(out_dir)
    results = scaling_study(run, out, progress=progress)
    fits = study_fits(results)
    cells = []
    for set_index in run.set_indices:
        for label, kind in TABLE_COLUMNS:
            cell = {
                "set_index": set_index,
                "set_name": SET_NAMES[set_index],
                "column": label,
                "scheme": kind or "",
            }
            if kind is None:
                if len(run.n_values) >= 4:
                    fit = gap_exponent(set_index, run.n_values)
                    cell.update(gamma=fit.gamma, residual=fit.residual, draws=0)
                else:
                    cell["reason"] = "fewer than four sizes with a gap solve"
            elif kind not in run.kinds:
                cell["reason"] = "scheme not in this run"
            elif (set_index, kind) not in fits:
                cell["reason"] = "fewer than four finite TTS cells"
            else:
                fit = fits[(set_index, kind)]
                cell.update(
                    gamma=fit.gamma, residual=fit.residual, draws=run.draws
                )
            cells.append(cell)
    _write_table(out, cells)
    return cells


def _write_table(out: Path, cells: list[dict]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table1.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["set_index", "set_name", "column", "scheme", "gamma", "residual",
             "draws", "reason"]
        )
        for c in cells:
            writer.writerow(
                [
                    c["set_index"],
                    c["set_name"],
                    c["column"],
                    c["scheme"],
                    f"{c['gamma']:.6g}" if "gamma" in c else "",
                    f"{c['residual']:.3g}" if "residual" in c else "",
                    c.get("draws", ""),
                    c.get("reason", ""),
                ]
            )
    labels = [label for label, _ in TABLE_COLUMNS]
    set_indices = sorted({c["set_index"] for c in cells})
    by_key = {(c["set_index"], c["column"]): c for c in cells}
    width = 8
    lines = ["set       " + "".join(f"{lab:>{width}}" for lab in labels)]
    notes = []
    for si in set_indices:
        row = [f"{SET_NAMES[si]:<10}"]
        for lab in labels:
            c = by_key[(si, lab)]
            if "gamma" in c:
                row.append(f"{c['gamma']:>{width}.2f}")
            else:
                row.append(f"{'--':>{width}}")
                notes.append(f"{SET_NAMES[si]}/{lab}: {c['reason']}")
        lines.append("".join(row))
    if notes:
        lines.append("")
        lines.extend(f"missing {note}" for note in notes)
    (out / "table1.txt").write_text("\n".join(lines) + "\n")
