"""Command-line interface: spectra, sweeps, TTS studies and fits."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import evolve, experiments, hilbert, spectrum
from .drives import SCHEME_KINDS, sample_scheme
from .problem import DEFAULT_ENSEMBLE, SET_NAMES, AmpParams, density_of_states

__all__ = ["main", "build_parser"]


def _set_index(text: str) -> int:
    """Parse a difficulty set given as an index (0..3) or a name."""
    if text in SET_NAMES:
        return SET_NAMES.index(text)
    try:
        idx = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown set {text!r}; use 0..{len(DEFAULT_ENSEMBLE) - 1} "
            f"or one of {', '.join(SET_NAMES)}"
        ) from None
    if not 0 <= idx < len(DEFAULT_ENSEMBLE):
        raise argparse.ArgumentTypeError(f"set index {idx} out of range")
    return idx


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--set",
        type=_set_index,
        default=0,
        help="benchmark parameter set: index 0 (hardest) .. 3 (easiest) or "
        "a name (hardest, hard, medium, easiest)",
    )
    p.add_argument("-a", "--asymmetry", type=float, help="override well asymmetry")
    p.add_argument("--xp", type=float, help="override peak location")
    p.add_argument("-n", "--spins", type=int, default=8, help="number of spins")


def _add_scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--scheme",
        default="uniform",
        choices=SCHEME_KINDS,
        help="drive scheme kind",
    )
    p.add_argument("--seed", type=int, default=0, help="random stream seed")


def _params(args) -> AmpParams:
    a, xp = DEFAULT_ENSEMBLE.sets[args.set]
    if getattr(args, "asymmetry", None) is not None:
        a = args.asymmetry
    if getattr(args, "xp", None) is not None:
        xp = args.xp
    return AmpParams(n=args.spins, a=a, xp=xp)


def _scheme(args, n: int):
    rng = np.random.default_rng([args.seed, 0])
    return sample_scheme(args.scheme, n, rng, seed=args.seed)


def _evolution_config(args) -> evolve.EvolutionConfig:
    kwargs = {}
    if getattr(args, "t_f", None) is not None:
        kwargs["t_f"] = args.t_f
    if getattr(args, "coeff", None) is not None:
        kwargs["runtime_coeff"] = args.coeff
    if getattr(args, "norm_tol", None) is not None:
        kwargs["norm_tol"] = args.norm_tol
    if getattr(args, "renormalize", False):
        kwargs["renormalize"] = True
    return evolve.EvolutionConfig(**kwargs)


def _n_range(text: str) -> list[int]:
    lo, _, hi = text.partition(":")
    try:
        lo_i, hi_i = int(lo), int(hi or lo)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, want LO:HI") from exc
    if hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo_i, hi_i + 1))


def cmd_dos(args) -> int:
    dos = density_of_states(args.spins)
    rows = [(f"{m:.12g}", f"{w:.17g}") for m, w in sorted(dos.items())]
    _emit_csv(args.out, ["magnetization", "weight"], rows)
    return 0


def cmd_energy(args) -> int:
    params = _params(args)
    from .problem import sector_energies

    energies = sector_energies(params)
    rows = [
        (f"{k / params.n:.12g}", f"{e:.17g}") for k, e in enumerate(energies)
    ]
    _emit_csv(args.out, ["magnetization", "energy"], rows)
    return 0


def cmd_gap(args) -> int:
    params = _params(args)
    scheme = _scheme(args, params.n)
    profile = spectrum.gap_profile(scheme, params, resolution=args.resolution)
    if args.out:
        profile.to_csv(args.out)
    print(f"s_min {profile.s_min:.8f}")
    print(f"delta_min {profile.delta_min:.10e}")
    return 0


def cmd_forward_gap(args) -> int:
    params = _params(args)
    kappa_c = args.kappa_c
    if kappa_c is None:
        kappa_c = spectrum.critical_kappa(params)
    gap = spectrum.forward_gap(
        params,
        kappa_c=kappa_c,
        corrected=not args.uncorrected,
        units=args.units,
    )
    print(f"kappa_c {kappa_c:.8f}")
    print(f"forward_gap {gap:.10e}")
    return 0


def cmd_levels(args) -> int:
    params = _params(args)
    scheme = _scheme(args, params.n)
    diagram = spectrum.level_diagram(
        scheme, params, k_levels=args.levels, resolution=args.resolution
    )
    if args.out:
        diagram.to_csv(args.out)
        print(f"wrote {args.out}")
    else:
        diagram.to_csv(sys.stdout)
    return 0


def cmd_overlaps(args) -> int:
    params = _params(args)
    scheme = _scheme(args, params.n)
    s_grid = np.linspace(0.0, 1.0, args.resolution + 1)
    tr = spectrum.overlap_trace(scheme, params, s_grid)
    rows = [
        (
            f"{s:.8f}",
            f"{tr['ground_up'][i]:.10e}",
            f"{tr['ground_down'][i]:.10e}",
            f"{tr['excited_up'][i]:.10e}",
            f"{tr['excited_down'][i]:.10e}",
        )
        for i, s in enumerate(s_grid)
    ]
    _emit_csv(
        args.out,
        ["s", "ground_up", "ground_down", "excited_up", "excited_down"],
        rows,
    )
    return 0


def cmd_evolve(args) -> int:
    params = _params(args)
    scheme = _scheme(args, params.n)
    config = _evolution_config(args)
    state = evolve.integrate(scheme, params, config)
    p = evolve.success_probability(state, params)
    print(f"t_f {config.total_time(params.n):.6g}")
    print(f"p_success {p:.12e}")
    print(f"norm_drift {abs(state.norm() - 1.0):.3e}")
    if args.out:
        if isinstance(state, hilbert.SymmetricState):
            state = hilbert.embed(state)
        hilbert.dump_state_csv(state, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_tts(args) -> int:
    params = _params(args)
    config = _evolution_config(args)
    record = evolve.averaged_tts(
        args.scheme,
        params,
        config,
        draws=args.draws,
        seed=args.seed,
        keep_schemes=args.draws <= 8,
    )
    print(json.dumps(record.to_dict(), indent=2))
    return 0


def cmd_scaling(args) -> int:
    if args.config:
        run = experiments.RunConfig.from_json(args.config)
    else:
        run = experiments.RunConfig(
            kinds=args.schemes,
            set_indices=args.sets,
            n_values=args.n_range,
            draws=args.draws,
            seed=args.seed,
            norm_tol=args.norm_tol,
            runtime_coeff=args.coeff,
        )

    def progress(set_index, kind, n, rec):
        print(
            f"set{set_index} {kind:18s} n={n:2d} "
            f"p={rec.p_success:.6e} tts={rec.tts:.6g}",
            flush=True,
        )

    experiments.scaling_study(run, args.out, refresh=args.refresh, progress=progress)
    out = experiments.results_dir(args.out)
    print(f"wrote {out / 'study.csv'}")
    return 0


def cmd_table1(args) -> int:
    run = experiments.RunConfig(
        kinds=list(args.schemes),
        set_indices=args.sets,
        n_values=args.n_range,
        draws=args.draws,
        seed=args.seed,
        norm_tol=args.norm_tol,
        runtime_coeff=args.coeff,
    )

    def progress(set_index, kind, n, rec):
        print(
            f"set{set_index} {kind:18s} n={n:2d} "
            f"p={rec.p_success:.6e} tts={rec.tts:.6g}",
            flush=True,
        )

    experiments.table_one(run, args.out, progress=progress)
    out = experiments.results_dir(args.out)
    print((out / "table1.txt").read_text(), end="")
    print(f"wrote {out / 'table1.csv'}")
    return 0


def cmd_fit(args) -> int:
    ns, vals = [], []
    with open(args.csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if int(row["set_index"]) != args.set or row["scheme"] != args.scheme:
                continue
            t = float(row["tts"])
            if math.isfinite(t) and t > 0:
                ns.append(int(row["n"]))
                vals.append(t)
    if len(ns) < 4:
        print("not enough finite rows to fit (need four)", file=sys.stderr)
        return 1
    fit = experiments.fit_exponential(ns, vals)
    print(f"beta {fit.beta:.6f}")
    print(f"gamma {fit.gamma:.6f}")
    return 0


def _emit_csv(out, header, rows) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        print(f"wrote {out}")
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(row))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ampanneal",
        description="Quantum annealing simulator for the asymmetric "
        "magnetization problem",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dos", help="magnetization density of states")
    p.add_argument("-n", "--spins", type=int, default=8)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_dos)

    p = sub.add_parser("energy", help="classical sector energies")
    _add_problem_args(p)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("gap", help="minimum gap of a sweep")
    _add_problem_args(p)
    _add_scheme_args(p)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--out", help="CSV output path for the gap profile")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("forward-gap", help="perturbative gap prediction")
    _add_problem_args(p)
    p.add_argument("--kappa-c", type=float, help="override the critical field")
    p.add_argument("--uncorrected", action="store_true")
    p.add_argument("--units", choices=("sweep", "field"), default="sweep")
    p.set_defaults(func=cmd_forward_gap)

    p = sub.add_parser("levels", help="excitation energies across the sweep")
    _add_problem_args(p)
    _add_scheme_args(p)
    p.add_argument("--levels", type=int, default=20)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("overlaps", help="well overlaps of the two lowest levels")
    _add_problem_args(p)
    _add_scheme_args(p)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("evolve", help="integrate one sweep")
    _add_problem_args(p)
    _add_scheme_args(p)
    p.add_argument("--t-f", type=float, help="total anneal time")
    p.add_argument("--coeff", type=float, help="runtime coefficient in coeff*n^2")
    p.add_argument("--norm-tol", type=float)
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--out", help="CSV dump of the final state")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("tts", help="draw-averaged time to solution")
    _add_problem_args(p)
    _add_scheme_args(p)
    p.add_argument("--draws", type=int, default=1)
    p.add_argument("--t-f", type=float)
    p.add_argument("--coeff", type=float)
    p.add_argument("--norm-tol", type=float)
    p.set_defaults(func=cmd_tts)

    p = sub.add_parser("scaling", help="run a resumable study grid")
    p.add_argument("--config", help="RunConfig JSON path (overrides flags)")
    p.add_argument(
        "--schemes", nargs="+", default=["uniform"], choices=SCHEME_KINDS
    )
    p.add_argument("--sets", nargs="+", type=_set_index, default=[0, 1, 2, 3])
    p.add_argument("--n-range", type=_n_range, default=list(range(5, 13)))
    p.add_argument("--draws", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--norm-tol", type=float, default=1e-6)
    p.add_argument("--coeff", type=float)
    p.add_argument("--refresh", action="store_true", help="recompute cached cells")
    p.add_argument("--out", help="study output directory")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("table1", help="summary of fitted scaling exponents")
    p.add_argument(
        "--schemes",
        nargs="+",
        default=[kind for _, kind in experiments.TABLE_COLUMNS if kind],
        choices=SCHEME_KINDS,
    )
    p.add_argument("--sets", nargs="+", type=_set_index, default=[0, 1, 2, 3])
    p.add_argument("--n-range", type=_n_range, default=list(range(5, 11)))
    p.add_argument("--draws", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--norm-tol", type=float, default=1e-6)
    p.add_argument("--coeff", type=float)
    p.add_argument("--out", help="study output directory")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("fit", help="exponential fit of one study series")
    p.add_argument("--csv", required=True, help="study.csv path")
    p.add_argument("--set", type=_set_index, required=True)
    p.add_argument("--scheme", required=True, choices=SCHEME_KINDS)
    p.set_defaults(func=cmd_fit)

    return parser


def main(argv=None) -> int:
    threads = os.environ.get("AMPANNEAL_THREADS")
    if threads:
        # Single knob for every threaded backend touched by the kernels.
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
        try:
            import numba

            numba.set_num_threads(int(threads))
        except (ImportError, ValueError):
            pass
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
