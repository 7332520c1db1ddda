"""Annealing drive schemes and their instantaneous Hamiltonian coefficients.

Every scheme maps (s, t) to a HamiltonianTerms value.  The problem part
always enters with coefficient s; the drive part carries the scheme's own
schedule.  Randomized schemes (mixed couplers, the oscillating-field
family, reverse-anneal pause points) are sampled once, frozen into the
scheme value, and fully serializable for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .hilbert import HamiltonianTerms, pair_indices
from .problem import AmpParams

__all__ = [
    "Uniform",
    "Inhomogeneous",
    "Couplers",
    "RfqaM",
    "RfqaD",
    "SyncM",
    "RfqaMCouplers",
    "ReverseAnneal",
    "DriveScheme",
    "terms_at",
    "gamma_i",
    "sample_frequencies",
    "default_band",
    "reverse_profile",
    "is_symmetric_scheme",
    "sample_scheme",
    "scheme_to_dict",
    "scheme_from_dict",
    "SCHEME_KINDS",
]


def default_band(n: int) -> tuple[float, float]:
    """Oscillation-frequency band; shrinks as n^-1.5 to avoid heating."""
    return 0.01 / n**1.5, 0.02 / n**1.5


@dataclass(frozen=True)
class Uniform:
    """Plain transverse-field sweep, -(1-s)/n per site."""

    kind = "uniform"


@dataclass(frozen=True)
class Inhomogeneous:
    """Per-site fields shut down sequentially with ramp exponent r."""

    r: float = 1.0
    kind = "inhomogeneous"


@dataclass(frozen=True)
class Couplers:
    """Transverse sigma^x sigma^x pairs on the s(1-s) path.

    coupler_kind: 'ferro' (-1), 'antiferro' (+1) or 'mixed' (frozen random
    signs, one per pair in pair_indices order).
    """

    coupler_kind: str
    signs: tuple[int, ...] | None = None
    seed: int | None = None
    kind = "couplers"

    def __post_init__(self):
        if self.coupler_kind not in ("ferro", "antiferro", "mixed"):
            raise ValueError(f"unknown coupler kind {self.coupler_kind!r}")
        if self.coupler_kind == "mixed" and self.signs is None:
            raise ValueError("mixed couplers need frozen signs")


@dataclass(frozen=True)
class RfqaM:
    """Magnitude oscillation: kappa (1 + alpha_bar sin 2 pi f_i t) per site."""

    kappa: float
    alpha_bar: float
    freqs: tuple[float, ...]
    seed: int | None = None
    kind = "rfqa-m"


@dataclass(frozen=True)
class RfqaD:
    """Direction oscillation in the x-y plane; spectrum preserving."""

    kappa: float
    alpha_bar: float
    freqs: tuple[float, ...]
    seed: int | None = None
    kind = "rfqa-d"


@dataclass(frozen=True)
class SyncM:
    """Magnitude oscillation with per-group shared frequencies.

    groups[i] is the group id of site i; freqs[i] is the (tied) per-site
    frequency, equal within each group.
    """

    kappa: float
    alpha_bar: float
    groups: tuple[int, ...]
    freqs: tuple[float, ...]
    seed: int | None = None
    kind = "sync-m"

    def __post_init__(self):
        by_group: dict[int, float] = {}
        for g, f in zip(self.groups, self.freqs):
            if g in by_group and by_group[g] != f:
                raise ValueError("sites of one group must share a frequency")
            by_group[g] = f


@dataclass(frozen=True)
class RfqaMCouplers:
    """Oscillating-field base plus oscillating transverse couplers.

    coupler_freqs has one signed frequency per pair (pair_indices order);
    each pair contributes (1-s) kappa_r sin(2 pi r_ij t) sigma^x sigma^x.
    """

    base: Union[RfqaM, SyncM]
    kappa_r: float
    coupler_freqs: tuple[float, ...]
    seed: int | None = None

    @property
    def kind(self) -> str:
        return "sync-m-couplers" if isinstance(self.base, SyncM) else "rfqa-m-couplers"


@dataclass(frozen=True)
class ReverseAnneal:
    """Start in the false minimum at s=1, dip to s_pause, dwell, return."""

    s_pause: float
    dwell: float
    seed: int | None = None
    kind = "reverse"

    def __post_init__(self):
        if not 0.0 < self.s_pause < 1.0:
            raise ValueError(f"s_pause must be in (0, 1), got {self.s_pause}")
        if self.dwell < 0:
            raise ValueError("dwell must be non-negative")


DriveScheme = Union[
    Uniform,
    Inhomogeneous,
    Couplers,
    RfqaM,
    RfqaD,
    SyncM,
    RfqaMCouplers,
    ReverseAnneal,
]

SCHEME_KINDS = (
    "uniform",
    "inhomogeneous",
    "couplers-ferro",
    "couplers-antiferro",
    "couplers-mixed",
    "rfqa-m",
    "rfqa-d",
    "sync-m",
    "rfqa-m-couplers",
    "sync-m-couplers",
    "reverse",
)


def gamma_i(scheme: Inhomogeneous, n: int, i, s: float):
    """Shutdown multiplier of site i (1-based) at annealing parameter s.

    The ramp n(1 - s^r) + (1 - i) equals 1 at s_i = ((n-i)/n)^(1/r) and 0
    at s_{i-1}; outside the ramp the value saturates, so a plain clip
    implements all three branches.
    """
    ramp = n * (1.0 - np.power(s, scheme.r)) + (1.0 - np.asarray(i, dtype=float))
    return np.clip(ramp, 0.0, 1.0)


def sample_frequencies(
    n: int, rng, band: tuple[float, float] | None = None
) -> np.ndarray:
    """n signed frequencies, |f| uniform in the band, signs fair coin."""
    if band is None:
        band = default_band(n)
    f_min, f_max = band
    if not 0 < f_min < f_max:
        raise ValueError(f"invalid frequency band {band}")
    rng = np.random.default_rng(rng)
    mags = rng.uniform(f_min, f_max, size=n)
    signs = rng.integers(0, 2, size=n) * 2 - 1
    return mags * signs


def reverse_profile(scheme: ReverseAnneal, t: float, total_time: float) -> float:
    """Piecewise-linear s(t): 1 -> s_pause, hold for dwell, -> 1."""
    if not 0.0 <= t <= total_time:
        raise ValueError(f"t={t} outside [0, {total_time}]")
    if scheme.dwell > total_time:
        raise ValueError("dwell longer than the total anneal time")
    ramp = (total_time - scheme.dwell) / 2.0
    if ramp <= 0.0:
        return scheme.s_pause if 0.0 < t < total_time else 1.0
    if t < ramp:
        return 1.0 - (1.0 - scheme.s_pause) * t / ramp
    if t <= ramp + scheme.dwell:
        return scheme.s_pause
    return scheme.s_pause + (1.0 - scheme.s_pause) * (t - ramp - scheme.dwell) / ramp


def _check_st(s: float, t: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"annealing parameter s={s} outside [0, 1]")
    if t < 0.0:
        raise ValueError(f"time t={t} must be non-negative")


def terms_at(
    scheme: DriveScheme, params: AmpParams, s: float, t: float = 0.0
) -> HamiltonianTerms:
    """Instantaneous Hamiltonian coefficients of a scheme at (s, t)."""
    _check_st(s, t)
    n = params.n
    if isinstance(scheme, (Uniform, ReverseAnneal)):
        x = np.full(n, -(1.0 - s) / n)
        return HamiltonianTerms(n=n, diag_scale=s, x_coeffs=x)
    if isinstance(scheme, Inhomogeneous):
        g = gamma_i(scheme, n, np.arange(1, n + 1), s)
        return HamiltonianTerms(n=n, diag_scale=s, x_coeffs=-g / n)
    if isinstance(scheme, Couplers):
        x = np.full(n, -(1.0 - s) / n)
        npairs = n * (n - 1) // 2
        if scheme.coupler_kind == "ferro":
            sign = -np.ones(npairs)
        elif scheme.coupler_kind == "antiferro":
            sign = np.ones(npairs)
        else:
            sign = np.asarray(scheme.signs, dtype=float)
            if sign.shape != (npairs,):
                raise ValueError("mixed couplers need one sign per pair")
        xx = s * (1.0 - s) / n * sign
        return HamiltonianTerms(n=n, diag_scale=s, x_coeffs=x, xx_coeffs=xx)
    if isinstance(scheme, (RfqaM, SyncM)):
        f = np.asarray(scheme.freqs)
        x = -(1.0 - s) * scheme.kappa * (
            1.0 + scheme.alpha_bar * np.sin(2.0 * np.pi * f * t)
        )
        return HamiltonianTerms(n=n, diag_scale=s, x_coeffs=x)
    if isinstance(scheme, RfqaD):
        f = np.asarray(scheme.freqs)
        phase = scheme.alpha_bar * np.sin(2.0 * np.pi * f * t)
        x = -(1.0 - s) * scheme.kappa * np.cos(phase)
        y = -(1.0 - s) * scheme.kappa * np.sin(phase)
        return HamiltonianTerms(n=n, diag_scale=s, x_coeffs=x, y_coeffs=y)
    if isinstance(scheme, RfqaMCouplers):
        base = terms_at(scheme.base, params, s, t)
        r = np.asarray(scheme.coupler_freqs)
        xx = (1.0 - s) * scheme.kappa_r * np.sin(2.0 * np.pi * r * t)
        return HamiltonianTerms(
            n=n, diag_scale=s, x_coeffs=base.x_coeffs, xx_coeffs=xx
        )
    raise TypeError(f"unknown drive scheme {scheme!r}")


def is_symmetric_scheme(scheme: DriveScheme) -> bool:
    """True when the scheme can run in the Dicke subspace."""
    if isinstance(scheme, (Uniform, ReverseAnneal)):
        return True
    if isinstance(scheme, Couplers):
        return scheme.coupler_kind in ("ferro", "antiferro")
    if isinstance(scheme, SyncM):
        return len(set(scheme.groups)) == 1
    return False


def _two_groups(n: int) -> tuple[int, ...]:
    half = n // 2
    return tuple(0 if i < half else 1 for i in range(n))


def sample_scheme(
    kind: str,
    n: int,
    rng,
    *,
    r: float = 1.0,
    alpha_bar: float = 0.9,
    kappa: float | None = None,
    kappa_r: float | None = None,
    k_groups: int = 2,
    s_pause_window: tuple[float, float] = (0.55, 0.95),
    dwell_coeff: float = 1.0,
    seed: int | None = None,
) -> DriveScheme:
    """Draw one frozen scheme instance of the given kind.

    Deterministic given the rng state; `seed` is recorded as metadata only.
    kappa defaults to 1/n (matching the uniform-sweep normalization) and
    kappa_r to 1/n^2.
    """
    rng = np.random.default_rng(rng)
    kappa = 1.0 / n if kappa is None else kappa
    kappa_r = 1.0 / n**2 if kappa_r is None else kappa_r
    if kind == "uniform":
        return Uniform()
    if kind == "inhomogeneous":
        return Inhomogeneous(r=r)
    if kind in ("couplers-ferro", "couplers-antiferro"):
        return Couplers(coupler_kind=kind.removeprefix("couplers-"))
    if kind == "couplers-mixed":
        npairs = n * (n - 1) // 2
        signs = tuple(int(v) for v in rng.integers(0, 2, size=npairs) * 2 - 1)
        return Couplers(coupler_kind="mixed", signs=signs, seed=seed)
    if kind == "rfqa-m":
        freqs = tuple(sample_frequencies(n, rng))
        return RfqaM(kappa=kappa, alpha_bar=alpha_bar, freqs=freqs, seed=seed)
    if kind == "rfqa-d":
        freqs = tuple(sample_frequencies(n, rng))
        return RfqaD(kappa=kappa, alpha_bar=alpha_bar, freqs=freqs, seed=seed)
    if kind == "sync-m":
        groups = _two_groups(n) if k_groups == 2 else tuple(
            i * k_groups // n for i in range(n)
        )
        gf = sample_frequencies(k_groups, rng)
        freqs = tuple(float(gf[g]) for g in groups)
        return SyncM(
            kappa=kappa, alpha_bar=alpha_bar, groups=groups, freqs=freqs, seed=seed
        )
    if kind in ("rfqa-m-couplers", "sync-m-couplers"):
        base = sample_scheme(
            "sync-m" if kind == "sync-m-couplers" else "rfqa-m",
            n,
            rng,
            alpha_bar=alpha_bar,
            kappa=kappa,
            k_groups=k_groups,
        )
        pa, pb = pair_indices(n)
        if kind == "sync-m-couplers":
            # Couplers synchronized by group-pair class.
            groups = base.groups
            classes = sorted(
                {tuple(sorted((groups[a], groups[b]))) for a, b in zip(pa, pb)}
            )
            cf = sample_frequencies(len(classes), rng)
            class_freq = dict(zip(classes, cf))
            coupler_freqs = tuple(
                float(class_freq[tuple(sorted((groups[a], groups[b])))])
                for a, b in zip(pa, pb)
            )
        else:
            coupler_freqs = tuple(sample_frequencies(pa.size, rng, default_band(n)))
        return RfqaMCouplers(
            base=base, kappa_r=kappa_r, coupler_freqs=coupler_freqs, seed=seed
        )
    if kind == "reverse":
        lo, hi = s_pause_window
        s_pause = float(rng.uniform(lo, hi))
        return ReverseAnneal(
            s_pause=s_pause, dwell=dwell_coeff * n**2, seed=seed
        )
    raise ValueError(f"unknown scheme kind {kind!r}")


def scheme_to_dict(scheme: DriveScheme) -> dict:
    """JSON-friendly serialization including all sampled values."""
    d = {"kind": scheme.kind}
    if isinstance(scheme, Inhomogeneous):
        d["r"] = scheme.r
    elif isinstance(scheme, Couplers):
        d["coupler_kind"] = scheme.coupler_kind
        if scheme.signs is not None:
            d["signs"] = list(scheme.signs)
        d["seed"] = scheme.seed
    elif isinstance(scheme, (RfqaM, RfqaD)):
        d.update(
            kappa=scheme.kappa,
            alpha_bar=scheme.alpha_bar,
            freqs=list(scheme.freqs),
            seed=scheme.seed,
        )
    elif isinstance(scheme, SyncM):
        d.update(
            kappa=scheme.kappa,
            alpha_bar=scheme.alpha_bar,
            groups=list(scheme.groups),
            freqs=list(scheme.freqs),
            seed=scheme.seed,
        )
    elif isinstance(scheme, RfqaMCouplers):
        d.update(
            base=scheme_to_dict(scheme.base),
            kappa_r=scheme.kappa_r,
            coupler_freqs=list(scheme.coupler_freqs),
            seed=scheme.seed,
        )
    elif isinstance(scheme, ReverseAnneal):
        d.update(s_pause=scheme.s_pause, dwell=scheme.dwell, seed=scheme.seed)
    return d


def scheme_from_dict(d: dict) -> DriveScheme:
    kind = d["kind"]
    if kind == "uniform":
        return Uniform()
    if kind == "inhomogeneous":
        return Inhomogeneous(r=d.get("r", 1.0))
    if kind == "couplers":
        signs = d.get("signs")
        return Couplers(
            coupler_kind=d["coupler_kind"],
            signs=tuple(signs) if signs is not None else None,
            seed=d.get("seed"),
        )
    if kind == "rfqa-m":
        return RfqaM(d["kappa"], d["alpha_bar"], tuple(d["freqs"]), d.get("seed"))
    if kind == "rfqa-d":
        return RfqaD(d["kappa"], d["alpha_bar"], tuple(d["freqs"]), d.get("seed"))
    if kind == "sync-m":
        return SyncM(
            d["kappa"],
            d["alpha_bar"],
            tuple(d["groups"]),
            tuple(d["freqs"]),
            d.get("seed"),
        )
    if kind in ("rfqa-m-couplers", "sync-m-couplers"):
        return RfqaMCouplers(
            base=scheme_from_dict(d["base"]),
            kappa_r=d["kappa_r"],
            coupler_freqs=tuple(d["coupler_freqs"]),
            seed=d.get("seed"),
        )
    if kind == "reverse":
        return ReverseAnneal(d["s_pause"], d["dwell"], d.get("seed"))
    raise ValueError(f"unknown scheme kind {kind!r}")
