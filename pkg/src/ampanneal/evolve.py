"""Fixed-step Schrodinger evolution and time-to-solution accounting.

The integrator is classical RK4 without renormalization by default, so
norm drift doubles as an accuracy monitor: for a mode of energy E the
per-step norm loss is (E dt)^6 / 144, hence the step size is chosen as
dt = (144 tol / (t_f omega^6))^(1/5) from a conservative spectral bound
omega.  Site-uniform schemes run in the (n+1)-dimensional Dicke basis,
everything else in the full 2^n space via numba kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import hilbert
from .drives import (
    Couplers,
    DriveScheme,
    Inhomogeneous,
    ReverseAnneal,
    RfqaD,
    RfqaM,
    RfqaMCouplers,
    SyncM,
    Uniform,
    is_symmetric_scheme,
    sample_scheme,
    scheme_to_dict,
)
from .hilbert import _apply_full  # njit kernel, callable from nopython code
from .problem import AmpParams, sector_energies

__all__ = [
    "EvolutionConfig",
    "IntegrationError",
    "TtsRecord",
    "DEFAULT_RUNTIME_COEFF",
    "integrate",
    "initial_state",
    "success_probability",
    "spectral_bound",
    "tts",
    "averaged_tts",
]

#: Anneal time prefactor in t_f = coeff * n^power, calibrated so the plain
#: sweep on the easiest benchmark set lands mid-range success at n=5.
DEFAULT_RUNTIME_COEFF = 4.0

#: Sentinel for unreachable solutions (success probability <= 0).
TTS_INFINITE = math.inf

_CHECK_EVERY = 256

# Scheme codes shared by the python layer and the kernels.
_CODE_UNIFORM = 0
_CODE_INHOMOG = 1
_CODE_COUPLERS = 2
_CODE_OSC_MAG = 3
_CODE_OSC_DIR = 4
_CODE_OSC_COUPLERS = 5

_PROF_LINEAR = 0
_PROF_REVERSE = 1


class IntegrationError(RuntimeError):
    """Raised when norm drift exceeds the configured tolerance."""

    def __init__(self, step: int, drift: float, tol: float):
        super().__init__(
            f"norm drift {drift:.3e} exceeded tolerance {tol:.3e} "
            f"at step {step}"
        )
        self.step = step
        self.drift = drift


@dataclass(frozen=True)
class EvolutionConfig:
    """Integration policy.

    t_f overrides the runtime polynomial coeff * n^power when given.
    norm_tol bounds the accepted norm drift of the unrenormalized RK4
    run; renormalize=True restores the norm each step instead (then the
    drift check is moot).
    """

    t_f: float | None = None
    runtime_coeff: float = DEFAULT_RUNTIME_COEFF
    runtime_power: float = 2.0
    dt_max: float = 0.05
    steps_per_period: int = 40
    norm_tol: float = 1e-9
    renormalize: bool = False

    def total_time(self, n: int) -> float:
        if self.t_f is not None:
            if self.t_f < 0:
                raise ValueError(f"t_f must be >= 0, got {self.t_f}")
            return float(self.t_f)
        return float(self.runtime_coeff * n**self.runtime_power)


@njit(cache=True)
def _s_of_t(prof, s_pause, dwell, t, t_f):  # pragma: no cover
    if prof == _PROF_LINEAR:
        s = t / t_f
    else:
        ramp = (t_f - dwell) / 2.0
        if ramp <= 0.0:
            s = 1.0 if (t <= 0.0 or t >= t_f) else s_pause
        elif t < ramp:
            s = 1.0 - (1.0 - s_pause) * t / ramp
        elif t <= ramp + dwell:
            s = s_pause
        else:
            s = s_pause + (1.0 - s_pause) * (t - ramp - dwell) / ramp
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return s


@njit(cache=True)
def _fill_coeffs(
    code, n, s, t, sp, freqs, pair_signs, pair_freqs, x, y, pc
):  # pragma: no cover
    for j in range(n):
        y[j] = 0.0
    for p in range(pc.shape[0]):
        pc[p] = 0.0
    if code == _CODE_UNIFORM:
        c = -(1.0 - s) / n
        for j in range(n):
            x[j] = c
    elif code == _CODE_INHOMOG:
        base = n * (1.0 - s ** sp[2])
        for j in range(n):
            g = base - j  # site j+1: ramp n(1-s^r) + 1 - i
            if g < 0.0:
                g = 0.0
            elif g > 1.0:
                g = 1.0
            x[j] = -g / n
    elif code == _CODE_COUPLERS:
        c = -(1.0 - s) / n
        for j in range(n):
            x[j] = c
        cc = s * (1.0 - s) / n
        for p in range(pc.shape[0]):
            pc[p] = cc * pair_signs[p]
    elif code == _CODE_OSC_MAG or code == _CODE_OSC_COUPLERS:
        kap = sp[0]
        al = sp[1]
        for j in range(n):
            x[j] = -(1.0 - s) * kap * (
                1.0 + al * math.sin(2.0 * math.pi * freqs[j] * t)
            )
        if code == _CODE_OSC_COUPLERS:
            kr = sp[3]
            for p in range(pc.shape[0]):
                pc[p] = (1.0 - s) * kr * math.sin(
                    2.0 * math.pi * pair_freqs[p] * t
                )
    elif code == _CODE_OSC_DIR:
        kap = sp[0]
        al = sp[1]
        for j in range(n):
            ph = al * math.sin(2.0 * math.pi * freqs[j] * t)
            x[j] = -(1.0 - s) * kap * math.cos(ph)
            y[j] = -(1.0 - s) * kap * math.sin(ph)


@njit(cache=True)
def _rk4_full_kernel(
    psi,
    n,
    fdiag,
    pa,
    pb,
    code,
    sp,
    freqs,
    pair_signs,
    pair_freqs,
    prof,
    s_pause,
    dwell,
    t_f,
    nsteps,
    dt,
    renorm,
    check_every,
    norm_tol,
):  # pragma: no cover
    dim = psi.shape[0]
    npairs = pa.shape[0]
    x = np.zeros(n)
    y = np.zeros(n)
    pc = np.zeros(npairs)
    k1 = np.empty(dim, np.complex128)
    k2 = np.empty(dim, np.complex128)
    k3 = np.empty(dim, np.complex128)
    k4 = np.empty(dim, np.complex128)
    tmp = np.empty(dim, np.complex128)
    for step in range(nsteps):
        t0 = step * dt
        s = _s_of_t(prof, s_pause, dwell, t0, t_f)
        _fill_coeffs(code, n, s, t0, sp, freqs, pair_signs, pair_freqs, x, y, pc)
        _apply_full(k1, psi, n, fdiag, s, x, y, pa, pb, pc)
        for i in range(dim):
            k1[i] *= -1j
            tmp[i] = psi[i] + 0.5 * dt * k1[i]
        tm = t0 + 0.5 * dt
        s = _s_of_t(prof, s_pause, dwell, tm, t_f)
        _fill_coeffs(code, n, s, tm, sp, freqs, pair_signs, pair_freqs, x, y, pc)
        _apply_full(k2, tmp, n, fdiag, s, x, y, pa, pb, pc)
        for i in range(dim):
            k2[i] *= -1j
            tmp[i] = psi[i] + 0.5 * dt * k2[i]
        # midpoint coefficients are identical for stage 3
        _apply_full(k3, tmp, n, fdiag, s, x, y, pa, pb, pc)
        for i in range(dim):
            k3[i] *= -1j
            tmp[i] = psi[i] + dt * k3[i]
        t1 = t0 + dt
        s = _s_of_t(prof, s_pause, dwell, t1, t_f)
        _fill_coeffs(code, n, s, t1, sp, freqs, pair_signs, pair_freqs, x, y, pc)
        _apply_full(k4, tmp, n, fdiag, s, x, y, pa, pb, pc)
        for i in range(dim):
            psi[i] += (dt / 6.0) * (
                k1[i] + 2.0 * (k2[i] + k3[i]) - 1j * k4[i]
            )
        if renorm:
            nrm2 = 0.0
            for i in range(dim):
                nrm2 += psi[i].real ** 2 + psi[i].imag ** 2
            inv = 1.0 / math.sqrt(nrm2)
            for i in range(dim):
                psi[i] *= inv
        elif check_every > 0 and (step + 1) % check_every == 0:
            nrm2 = 0.0
            for i in range(dim):
                nrm2 += psi[i].real ** 2 + psi[i].imag ** 2
            if abs(math.sqrt(nrm2) - 1.0) > norm_tol:
                return step + 1
    return -1


@njit(cache=True)
def _apply_dicke(out, phi, fsec, xoff, xx, s, cx, cxx):  # pragma: no cover
    nd = phi.shape[0]
    for k in range(nd):
        v = s * fsec[k] * phi[k]
        if k + 1 < nd:
            v += cx * xoff[k] * phi[k + 1]
        if k > 0:
            v += cx * xoff[k - 1] * phi[k - 1]
        out[k] = v
    if cxx != 0.0:
        for k in range(nd):
            acc = 0.0 + 0.0j
            for j in range(nd):
                acc += xx[k, j] * phi[j]
            out[k] += cxx * acc


@njit(cache=True)
def _dicke_coeffs(code, n, s, t, sp):  # pragma: no cover
    if code == _CODE_UNIFORM:
        return -(1.0 - s) / n, 0.0
    if code == _CODE_COUPLERS:
        return -(1.0 - s) / n, sp[4] * s * (1.0 - s) / n
    # collective magnitude oscillation (single shared frequency in sp[2])
    cx = -(1.0 - s) * sp[0] * (
        1.0 + sp[1] * math.sin(2.0 * math.pi * sp[2] * t)
    )
    return cx, 0.0


@njit(cache=True)
def _rk4_dicke_kernel(
    phi,
    n,
    fsec,
    xoff,
    xx,
    code,
    sp,
    prof,
    s_pause,
    dwell,
    t_f,
    nsteps,
    dt,
    renorm,
    check_every,
    norm_tol,
):  # pragma: no cover
    nd = phi.shape[0]
    k1 = np.empty(nd, np.complex128)
    k2 = np.empty(nd, np.complex128)
    k3 = np.empty(nd, np.complex128)
    k4 = np.empty(nd, np.complex128)
    tmp = np.empty(nd, np.complex128)
    for step in range(nsteps):
        t0 = step * dt
        s = _s_of_t(prof, s_pause, dwell, t0, t_f)
        cx, cxx = _dicke_coeffs(code, n, s, t0, sp)
        _apply_dicke(k1, phi, fsec, xoff, xx, s, cx, cxx)
        for i in range(nd):
            k1[i] *= -1j
            tmp[i] = phi[i] + 0.5 * dt * k1[i]
        tm = t0 + 0.5 * dt
        s = _s_of_t(prof, s_pause, dwell, tm, t_f)
        cx, cxx = _dicke_coeffs(code, n, s, tm, sp)
        _apply_dicke(k2, tmp, fsec, xoff, xx, s, cx, cxx)
        for i in range(nd):
            k2[i] *= -1j
            tmp[i] = phi[i] + 0.5 * dt * k2[i]
        _apply_dicke(k3, tmp, fsec, xoff, xx, s, cx, cxx)
        for i in range(nd):
            k3[i] *= -1j
            tmp[i] = phi[i] + dt * k3[i]
        t1 = t0 + dt
        s = _s_of_t(prof, s_pause, dwell, t1, t_f)
        cx, cxx = _dicke_coeffs(code, n, s, t1, sp)
        _apply_dicke(k4, tmp, fsec, xoff, xx, s, cx, cxx)
        for i in range(nd):
            phi[i] += (dt / 6.0) * (
                k1[i] + 2.0 * (k2[i] + k3[i]) - 1j * k4[i]
            )
        if renorm:
            nrm2 = 0.0
            for i in range(nd):
                nrm2 += phi[i].real ** 2 + phi[i].imag ** 2
            inv = 1.0 / math.sqrt(nrm2)
            for i in range(nd):
                phi[i] *= inv
        elif check_every > 0 and (step + 1) % check_every == 0:
            nrm2 = 0.0
            for i in range(nd):
                nrm2 += phi[i].real ** 2 + phi[i].imag ** 2
            if abs(math.sqrt(nrm2) - 1.0) > norm_tol:
                return step + 1
    return -1


_EMPTY = np.zeros(0, dtype=np.float64)


def _compile_scheme(scheme: DriveScheme, n: int):
    """Map a scheme onto (code, scalars, freqs, pair_signs, pair_freqs,
    profile, s_pause, dwell, f_max)."""
    sp = np.zeros(5)
    prof, s_pause, dwell = _PROF_LINEAR, 0.0, 0.0
    freqs = pair_signs = pair_freqs = _EMPTY
    f_max = 0.0
    if isinstance(scheme, Uniform):
        code = _CODE_UNIFORM
    elif isinstance(scheme, ReverseAnneal):
        code = _CODE_UNIFORM
        prof, s_pause, dwell = _PROF_REVERSE, scheme.s_pause, scheme.dwell
    elif isinstance(scheme, Inhomogeneous):
        code = _CODE_INHOMOG
        sp[2] = scheme.r
    elif isinstance(scheme, Couplers):
        code = _CODE_COUPLERS
        npairs = n * (n - 1) // 2
        if scheme.coupler_kind == "ferro":
            pair_signs = -np.ones(npairs)
        elif scheme.coupler_kind == "antiferro":
            pair_signs = np.ones(npairs)
        else:
            pair_signs = np.asarray(scheme.signs, dtype=np.float64)
        sp[4] = pair_signs[0]
    elif isinstance(scheme, (RfqaM, SyncM)):
        code = _CODE_OSC_MAG
        sp[0], sp[1] = scheme.kappa, scheme.alpha_bar
        freqs = np.asarray(scheme.freqs, dtype=np.float64)
        sp[2] = freqs[0]  # shared frequency on the Dicke path
        f_max = float(np.max(np.abs(freqs)))
    elif isinstance(scheme, RfqaD):
        code = _CODE_OSC_DIR
        sp[0], sp[1] = scheme.kappa, scheme.alpha_bar
        freqs = np.asarray(scheme.freqs, dtype=np.float64)
        f_max = float(np.max(np.abs(freqs)))
    elif isinstance(scheme, RfqaMCouplers):
        code = _CODE_OSC_COUPLERS
        sp[0], sp[1] = scheme.base.kappa, scheme.base.alpha_bar
        sp[3] = scheme.kappa_r
        freqs = np.asarray(scheme.base.freqs, dtype=np.float64)
        pair_freqs = np.asarray(scheme.coupler_freqs, dtype=np.float64)
        f_max = float(
            max(np.max(np.abs(freqs)), np.max(np.abs(pair_freqs)))
        )
    else:
        raise TypeError(f"unknown drive scheme {scheme!r}")
    return code, sp, freqs, pair_signs, pair_freqs, prof, s_pause, dwell, f_max


def spectral_bound(scheme: DriveScheme, params: AmpParams) -> float:
    """Conservative bound on ||H(s, t)|| over the whole sweep.

    Worst-cases the oscillatory envelopes and maximizes the s profile on
    a coarse grid; overestimating only shrinks the time step.
    """
    from .drives import gamma_i

    n = params.n
    fmax = float(np.max(np.abs(sector_energies(params))))
    sg = np.linspace(0.0, 1.0, 101)
    if isinstance(scheme, (Uniform, ReverseAnneal)):
        drive = 1.0 - sg
    elif isinstance(scheme, Inhomogeneous):
        sites = np.arange(1, n + 1)
        drive = np.array(
            [gamma_i(scheme, n, sites, s).sum() / n for s in sg]
        )
    elif isinstance(scheme, Couplers):
        drive = (1.0 - sg) + sg * (1.0 - sg) * (n - 1) / 2.0
    elif isinstance(scheme, (RfqaM, SyncM)):
        drive = (1.0 - sg) * scheme.kappa * n * (1.0 + abs(scheme.alpha_bar))
    elif isinstance(scheme, RfqaD):
        drive = (1.0 - sg) * scheme.kappa * n * math.sqrt(2.0)
    elif isinstance(scheme, RfqaMCouplers):
        base = scheme.base
        npairs = n * (n - 1) // 2
        drive = (1.0 - sg) * (
            base.kappa * n * (1.0 + abs(base.alpha_bar))
            + abs(scheme.kappa_r) * npairs
        )
    else:
        raise TypeError(f"unknown drive scheme {scheme!r}")
    return float(np.max(sg * fmax + drive))


def _time_step(
    t_f: float, omega: float, f_max: float, config: EvolutionConfig
) -> tuple[float, int]:
    dt = config.dt_max
    if f_max > 0.0:
        dt = min(dt, 1.0 / (config.steps_per_period * f_max))
    if t_f > 0.0 and omega > 0.0 and not config.renormalize:
        # quarter of the budget as safety against the bound being loose
        dt = min(dt, (144.0 * 0.25 * config.norm_tol / (t_f * omega**6)) ** 0.2)
    nsteps = max(1, int(math.ceil(t_f / dt)))
    return t_f / nsteps, nsteps


def initial_state(scheme: DriveScheme, params: AmpParams):
    """Starting state of a sweep.

    Forward sweeps start in the uniform superposition (drive ground
    state at s=0); reverse anneals start in the false classical minimum
    (all spins down) at s=1.
    """
    n = params.n
    if isinstance(scheme, ReverseAnneal):
        phi = np.zeros(n + 1, dtype=np.complex128)
        phi[0] = 1.0
        return hilbert.SymmetricState(phi, n)
    if is_symmetric_scheme(scheme):
        weights = np.sqrt(
            np.array([math.comb(n, k) for k in range(n + 1)]) / 2.0**n
        )
        return hilbert.SymmetricState(weights.astype(np.complex128), n)
    return hilbert.uniform_superposition(n)


def integrate(
    scheme: DriveScheme,
    params: AmpParams,
    config: EvolutionConfig = EvolutionConfig(),
):
    """Run one sweep; returns the final state (Dicke or full basis)."""
    n = params.n
    t_f = config.total_time(n)
    state = initial_state(scheme, params)
    if t_f == 0.0:
        return state
    (
        code,
        sp,
        freqs,
        pair_signs,
        pair_freqs,
        prof,
        s_pause,
        dwell,
        f_max,
    ) = _compile_scheme(scheme, n)
    if prof == _PROF_REVERSE and dwell > t_f:
        raise ValueError(
            f"reverse-anneal dwell {dwell} exceeds total time {t_f}"
        )
    omega = spectral_bound(scheme, params)
    dt, nsteps = _time_step(t_f, omega, f_max, config)
    if isinstance(state, hilbert.SymmetricState):
        fsec = sector_energies(params)
        xoff = np.sqrt((n - np.arange(n)) * (np.arange(n) + 1.0))
        xx = hilbert.collective_xx(n) if code == _CODE_COUPLERS else np.zeros((1, 1))
        status = _rk4_dicke_kernel(
            state.amplitudes,
            n,
            fsec,
            xoff,
            xx,
            code,
            sp,
            prof,
            s_pause,
            dwell,
            t_f,
            nsteps,
            dt,
            config.renormalize,
            _CHECK_EVERY,
            config.norm_tol,
        )
    else:
        pa, pb = hilbert.pair_indices(n)
        if pair_signs.size == 0 and pair_freqs.size == 0:
            pa = pb = np.zeros(0, dtype=np.int64)
        status = _rk4_full_kernel(
            state.amplitudes,
            n,
            hilbert.diag_energies(params),
            pa,
            pb,
            code,
            sp,
            freqs,
            pair_signs,
            pair_freqs,
            prof,
            s_pause,
            dwell,
            t_f,
            nsteps,
            dt,
            config.renormalize,
            _CHECK_EVERY,
            config.norm_tol,
        )
    drift = abs(state.norm() - 1.0)
    if status >= 0:
        raise IntegrationError(status, drift, config.norm_tol)
    if not config.renormalize and drift > config.norm_tol:
        raise IntegrationError(nsteps, drift, config.norm_tol)
    return state


def success_probability(state, params: AmpParams) -> float:
    """Population of the classical ground state (all spins up)."""
    if isinstance(state, hilbert.SymmetricState):
        amp = state.amplitudes[params.n]
    else:
        amp = state.amplitudes[2**params.n - 1]
    return float(abs(amp) ** 2)


def tts(t_f: float, p_success: float, target: float = 0.99) -> float:
    """Expected total anneal time to reach the target success odds.

    Repetition count ln(1-target)/ln(1-p) times the single-shot time;
    p >= 1 needs one shot, p <= 0 never succeeds (returns inf).
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must be in (0, 1), got {target}")
    if t_f < 0.0:
        raise ValueError(f"t_f must be >= 0, got {t_f}")
    if p_success <= 0.0:
        return TTS_INFINITE
    if p_success >= 1.0:
        return t_f
    return t_f * math.log(1.0 - target) / math.log(1.0 - p_success)


@dataclass
class TtsRecord:
    """Draw-averaged outcome of one (scheme kind, instance, runtime) cell."""

    n: int
    scheme_kind: str
    t_f: float
    p_success: float
    tts: float
    draws: int
    seed: int | None = None
    p_values: list[float] = field(default_factory=list)
    schemes: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "scheme_kind": self.scheme_kind,
            "t_f": self.t_f,
            "p_success": self.p_success,
            "tts": self.tts,
            "draws": self.draws,
            "seed": self.seed,
            "p_values": self.p_values,
            "schemes": self.schemes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TtsRecord":
        return cls(**d)


def averaged_tts(
    kind: str,
    params: AmpParams,
    config: EvolutionConfig = EvolutionConfig(),
    draws: int = 1,
    seed: int = 0,
    target: float = 0.99,
    keep_schemes: bool = False,
    **sample_kwargs,
) -> TtsRecord:
    """Sample `draws` frozen scheme instances, average the success
    probability, and convert with the shared runtime.

    Draw d uses the deterministic stream seeded by (seed, d), so any cell
    can be reproduced independently.
    """
    n = params.n
    t_f = config.total_time(n)
    p_values: list[float] = []
    schemes: list[dict] = []
    for d in range(draws):
        rng = np.random.default_rng([seed, d])
        scheme = sample_scheme(kind, n, rng, seed=seed, **sample_kwargs)
        state = integrate(scheme, params, config)
        p_values.append(success_probability(state, params))
        if keep_schemes:
            schemes.append(scheme_to_dict(scheme))
    p_mean = float(np.mean(p_values))
    return TtsRecord(
        n=n,
        scheme_kind=kind,
        t_f=t_f,
        p_success=p_mean,
        tts=tts(t_f, p_mean, target),
        draws=draws,
        seed=seed,
        p_values=p_values,
        schemes=schemes,
    )
