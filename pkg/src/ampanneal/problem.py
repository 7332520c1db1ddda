"""Asymmetric magnetization problem: energy landscape and state counting.

The classical cost depends only on the total magnetization m = k/N of a
bitstring.  It rises linearly from the false minimum at m=0 to a peak of
height 1 at m=xp, then drops linearly to -A at m=1, so the all-up state is
the unique ground state while almost all bitstrings sit on the wrong side
of the peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AmpParams",
    "DifficultyEnsemble",
    "DEFAULT_ENSEMBLE",
    "classical_energy",
    "sector_energies",
    "magnetization",
    "density_of_states",
]


@dataclass(frozen=True)
class AmpParams:
    """Problem instance: spin count n, well asymmetry a, peak location xp."""

    n: int
    a: float
    xp: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 spins, got n={self.n}")
        if not self.a > 0:
            raise ValueError(f"asymmetry a must be > 0, got {self.a}")
        if not 0.5 < self.xp < 1.0:
            raise ValueError(f"peak xp must lie in (0.5, 1), got {self.xp}")

    def to_dict(self) -> dict:
        return {"n": self.n, "a": self.a, "xp": self.xp}

    @classmethod
    def from_dict(cls, d: dict) -> "AmpParams":
        return cls(n=int(d["n"]), a=float(d["a"]), xp=float(d["xp"]))


@dataclass(frozen=True)
class DifficultyEnsemble:
    """Ordered (a, xp) pairs, hardest first."""

    sets: tuple[tuple[float, float], ...]

    def params(self, index: int, n: int) -> AmpParams:
        a, xp = self.sets[index]
        return AmpParams(n=n, a=a, xp=xp)

    def __len__(self) -> int:
        return len(self.sets)


#: The four benchmark parameter sets in descending difficulty order.
DEFAULT_ENSEMBLE = DifficultyEnsemble(
    sets=((0.2, 0.8), (0.28, 0.7), (0.3, 0.64), (0.34, 0.59))
)

#: Human-readable labels for the default ensemble, hardest first.
SET_NAMES = ("hardest", "hard", "medium", "easiest")


def _energy_of_fraction(a: float, xp: float, x: float) -> float:
    # Ties at x == xp take the descending branch.
    if x < xp:
        return x / xp
    return 1.0 - (1.0 + a) * (x - xp) / (1.0 - xp)


def classical_energy(params: AmpParams, m: float) -> float:
    """Energy f(m) of a magnetization sector; m must equal k/n exactly.

    Ground state is m=1 with energy -a; f(0) - f(1) = a.
    """
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"magnetization {m} outside [0, 1]")
    k = m * params.n
    if abs(k - round(k)) > 1e-9:
        raise ValueError(
            f"magnetization {m} is not on the k/{params.n} grid"
        )
    return _energy_of_fraction(params.a, params.xp, m)


def sector_energies(params: AmpParams) -> np.ndarray:
    """f(k/n) for k = 0..n as a float array."""
    ks = np.arange(params.n + 1) / params.n
    lower = ks / params.xp
    upper = 1.0 - (1.0 + params.a) * (ks - params.xp) / (1.0 - params.xp)
    return np.where(ks < params.xp, lower, upper)


def magnetization(bits) -> float:
    """Fraction of up spins in a bitstring ('1' or 1 means spin up)."""
    if isinstance(bits, str):
        vals = [int(c) for c in bits]
    else:
        vals = [int(b) for b in bits]
    if any(v not in (0, 1) for v in vals):
        raise ValueError("bitstring entries must be 0 or 1")
    return sum(vals) / len(vals)


def density_of_states(n: int) -> dict[float, float]:
    """Probability weight of each magnetization sector, C(n,k)/2^n."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    total = 2**n
    return {k / n: math.comb(n, k) / total for k in range(n + 1)}
