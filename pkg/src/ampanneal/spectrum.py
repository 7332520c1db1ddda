"""Instantaneous spectra, minimum gaps and the analytic gap predictor.

Site-uniform schemes are diagonalized in the (n+1)-dimensional Dicke
basis; everything else runs in the full product space (dense up to 2^11,
matrix-free Lanczos above that).

Unit conventions.  The sweep Hamiltonian H(s) = -(1-s)/n sum sigma^x
+ s f(m) can be rescaled by n/s into "field units" H = n f(m) - kappa
sum sigma^x with kappa = (1-s)/s, where a single spin flip out of the
false well costs 1/xp.  The perturbative gap formula lives in field
units; forward_gap converts back to sweep units with the factor
s_c = 1/(1 + kappa_c) so it can be compared against gap_profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse.linalg

from . import hilbert
from .drives import DriveScheme, is_symmetric_scheme, terms_at
from .problem import AmpParams

__all__ = [
    "GapProfile",
    "LevelDiagram",
    "gap_profile",
    "level_diagram",
    "overlap_trace",
    "forward_gap",
    "critical_kappa",
    "multiphoton_rate",
    "multiphoton_rate_sum",
    "EigensolveError",
]

FULL_DENSE_MAX_N = 11
FULL_SPACE_MAX_N = 14
DEFAULT_RESOLUTION = 200


class EigensolveError(RuntimeError):
    """Raised when an eigensolve fails to converge, with the offending s."""

    def __init__(self, s: float, message: str):
        super().__init__(f"eigensolve failed at s={s}: {message}")
        self.s = s


@dataclass
class GapProfile:
    """Sampled first excitation gap vs s, with a refined minimum."""

    s_grid: np.ndarray
    gaps: np.ndarray
    s_min: float
    delta_min: float

    def to_csv(self, path) -> None:
        np.savetxt(
            path,
            np.column_stack([self.s_grid, self.gaps]),
            delimiter=",",
            header="s,gap",
            comments="",
        )


@dataclass
class LevelDiagram:
    """Energy differences E_k - E_0, one row per excited level."""

    s_grid: np.ndarray
    diffs: np.ndarray  # shape (k_levels, len(s_grid))

    def to_csv(self, path) -> None:
        header = "s," + ",".join(f"e{k + 1}" for k in range(self.diffs.shape[0]))
        np.savetxt(
            path,
            np.column_stack([self.s_grid, self.diffs.T]),
            delimiter=",",
            header=header,
            comments="",
        )


def _eigensolve(
    scheme: DriveScheme,
    params: AmpParams,
    s: float,
    t: float,
    k: int,
    vectors: bool = False,
):
    """Lowest k eigenvalues (and optionally vectors) of H(s, t)."""
    n = params.n
    terms = terms_at(scheme, params, s, t)
    if is_symmetric_scheme(scheme):
        mat = hilbert.symmetric_matrix(terms, params)
        if vectors:
            vals, vecs = np.linalg.eigh(mat)
            return vals[:k], vecs[:, :k]
        return np.linalg.eigvalsh(mat)[:k], None
    if n <= FULL_DENSE_MAX_N:
        mat = hilbert.dense_hamiltonian(terms, params)
        if vectors:
            vals, vecs = np.linalg.eigh(mat)
            return vals[:k], vecs[:, :k]
        return np.linalg.eigvalsh(mat)[:k], None
    if n > FULL_SPACE_MAX_N:
        raise ValueError(f"full-space eigensolve capped at n={FULL_SPACE_MAX_N}")
    psi_buf = hilbert.StateVector(np.zeros(2**n, dtype=np.complex128), n)

    def matvec(v):
        psi_buf.amplitudes = v.astype(np.complex128)
        return hilbert.apply_hamiltonian(terms, psi_buf, params).amplitudes

    op = scipy.sparse.linalg.LinearOperator(
        (2**n, 2**n), matvec=matvec, dtype=np.complex128
    )
    try:
        vals, vecs = scipy.sparse.linalg.eigsh(
            op, k=k, which="SA", ncv=max(40, 4 * k), tol=1e-12, maxiter=20000
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise EigensolveError(s, str(exc)) from exc
    order = np.argsort(vals)
    if vectors:
        return vals[order], vecs[:, order]
    return vals[order], None


def _gap_at(scheme, params, s, t) -> float:
    vals, _ = _eigensolve(scheme, params, s, t, k=2)
    return float(vals[1] - vals[0])


def gap_profile(
    scheme: DriveScheme,
    params: AmpParams,
    resolution: int = DEFAULT_RESOLUTION,
    t: float = 0.0,
) -> GapProfile:
    """Gap E1 - E0 on an s grid, with golden-section refined minimum."""
    s_grid = np.linspace(0.0, 1.0, resolution + 1)
    gaps = np.array([_gap_at(scheme, params, s, t) for s in s_grid])
    imin = int(np.argmin(gaps))
    if imin in (0, len(s_grid) - 1):
        return GapProfile(s_grid, gaps, float(s_grid[imin]), float(gaps[imin]))
    lo, mid, hi = s_grid[imin - 1], s_grid[imin], s_grid[imin + 1]
    res = scipy.optimize.minimize_scalar(
        lambda s: _gap_at(scheme, params, s, t),
        bracket=(lo, mid, hi),
        method="golden",
        options={"xtol": 1e-6},
    )
    s_min = float(res.x)
    delta_min = float(min(res.fun, gaps[imin]))
    return GapProfile(s_grid, gaps, s_min, delta_min)


def level_diagram(
    scheme: DriveScheme,
    params: AmpParams,
    k_levels: int = 20,
    resolution: int = DEFAULT_RESOLUTION,
    t: float = 0.0,
) -> LevelDiagram:
    """E_k - E_0 for k = 1..k_levels over the sweep."""
    dim = params.n + 1 if is_symmetric_scheme(scheme) else 2**params.n
    k = min(k_levels + 1, dim)
    s_grid = np.linspace(0.0, 1.0, resolution + 1)
    diffs = np.empty((k - 1, len(s_grid)))
    for col, s in enumerate(s_grid):
        vals, _ = _eigensolve(scheme, params, s, t, k=k)
        diffs[:, col] = vals[1:] - vals[0]
    return LevelDiagram(s_grid, diffs)


def overlap_trace(
    scheme: DriveScheme,
    params: AmpParams,
    s_grid,
    t: float = 0.0,
) -> dict[str, np.ndarray]:
    """Squared overlaps of the two lowest eigenstates with the classical wells.

    Keys: ground_up, ground_down, excited_up, excited_down.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    out = {
        key: np.empty(len(s_grid))
        for key in ("ground_up", "ground_down", "excited_up", "excited_down")
    }
    symmetric = is_symmetric_scheme(scheme)
    for i, s in enumerate(s_grid):
        vals, vecs = _eigensolve(scheme, params, s, t, k=2, vectors=True)
        if symmetric:
            up, down = params.n, 0
        else:
            up, down = 2**params.n - 1, 0
        out["ground_up"][i] = abs(vecs[up, 0]) ** 2
        out["ground_down"][i] = abs(vecs[down, 0]) ** 2
        out["excited_up"][i] = abs(vecs[up, 1]) ** 2
        out["excited_down"][i] = abs(vecs[down, 1]) ** 2
    return out


def _well_energy_gap(params: AmpParams, kappa: float) -> float:
    """Difference of the two per-spin well energies at field kappa.

    e(m) = f(m) - 2 kappa sqrt(m (1 - m)) is the per-spin energy of a
    product state with magnetization m; each branch of f contributes one
    local minimum.  Positive while the false well sits above the true
    well.
    """
    a, xp = params.a, params.xp

    def energy(m: float) -> float:
        if m < xp:
            f = m / xp
        else:
            f = 1.0 - (1.0 + a) * (m - xp) / (1.0 - xp)
        return f - 2.0 * kappa * math.sqrt(max(m * (1.0 - m), 0.0))

    false_min = scipy.optimize.minimize_scalar(
        energy, bounds=(0.0, xp), method="bounded",
        options={"xatol": 1e-12},
    )
    true_min = scipy.optimize.minimize_scalar(
        energy, bounds=(xp, 1.0), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(false_min.fun - true_min.fun)


def critical_kappa(params: AmpParams) -> float:
    """Per-site field strength at which the two dressed wells cross.

    The field corrections to each competing ground state's energy are
    resummed into the product-state (per-spin) energy e(m); its two branch
    minima reproduce the second-order corrections at small field and stay
    finite at the crossing.  Root-found to 1e-6 in kappa.
    """
    lo, hi = 1e-9, 1.0
    if _well_energy_gap(params, lo) <= 0:
        raise ValueError("wells already crossed at zero field; invalid params")
    while _well_energy_gap(params, hi) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(
                "no well crossing found below kappa=1e6; "
                f"gap at 1e6: {_well_energy_gap(params, hi / 2):.3g}"
            )
    return float(
        scipy.optimize.brentq(
            lambda k: _well_energy_gap(params, k), lo, hi, xtol=1e-6
        )
    )


def _log_denominators(params: AmpParams, kappa_c: float) -> float:
    """log of prod_{n=1}^{N-1} U_n with the resummed flip denominators."""
    n, a, xp = params.n, params.a, params.xp
    c_lower = 1.0 / xp + 2.0 * kappa_c**2 * xp
    c_upper = (1.0 + a) / (1.0 - xp) + 2.0 * kappa_c**2 * (1.0 - xp) / (1.0 + a)
    total = 0.0
    for nn in range(1, n):
        u = nn * c_lower if nn <= xp * n else (n - nn) * c_upper
        if u <= 0.0:
            raise ZeroDivisionError(f"degenerate flip denominator U_{nn} = {u}")
        total += math.log(u)
    return total


def forward_gap(
    params: AmpParams,
    kappa_c: float | None = None,
    corrected: bool = True,
    units: str = "sweep",
) -> float:
    """Nth-order perturbative minimum-gap prediction.

    In field units the prediction is N! kappa_c^N / prod U_n; `corrected`
    multiplies by 2 pi / N (the empirical finite-size correction).  With
    units="sweep" the value is scaled by s_c^1.5 where s_c = 1/(1+kappa_c),
    an empirical convention (calibrated once against the numerical sweep
    gaps) that makes the corrected prediction directly comparable to
    gap_profile of the uniform sweep; the absolute normalization is only
    validated through that ratio.
    """
    if kappa_c is None:
        kappa_c = critical_kappa(params)
    if kappa_c <= 0:
        raise ValueError(f"kappa_c must be positive, got {kappa_c}")
    n = params.n
    log_gap = (
        math.lgamma(n + 1) + n * math.log(kappa_c) - _log_denominators(params, kappa_c)
    )
    gap = math.exp(log_gap)
    if corrected:
        gap *= 2.0 * math.pi / n
    if units == "sweep":
        gap *= (1.0 / (1.0 + kappa_c)) ** 1.5
    elif units != "field":
        raise ValueError(f"unknown units {units!r}")
    return gap


def multiphoton_rate(omega0: float, w: float, lam: float, n: int) -> float:
    """Closed-form total multi-photon transition rate (Omega0^2/W)(1+2 L^2)^n."""
    if w <= 0:
        raise ValueError(f"sweep energy scale w must be positive, got {w}")
    if lam < 0:
        raise ValueError(f"per-order suppression must be >= 0, got {lam}")
    return omega0**2 / w * (1.0 + 2.0 * lam**2) ** n


def multiphoton_rate_sum(omega0: float, w: float, lam: float, n: int) -> float:
    """Explicit binomial sum over photon orders l = 0..n (validation route)."""
    if w <= 0:
        raise ValueError(f"sweep energy scale w must be positive, got {w}")
    total = sum(lam ** (2 * l) * math.comb(n, l) * 2**l for l in range(n + 1))
    return omega0**2 / w * total
