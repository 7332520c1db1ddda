"""State representations and matrix-free Hamiltonian kernels.

Two bases are supported:

* the full 2^n product basis, little-endian: bit b of the basis index is
  spin b, bit value 1 means sigma^z = +1 (spin up);
* the (n+1)-dimensional permutation-symmetric (Dicke) basis, one uniform
  superposition per magnetization sector, valid whenever the drive treats
  all sites identically.

Operators are applied without ever materializing a 2^n x 2^n matrix.
Pair couplings use the fixed lexicographic ordering of pair_indices().
The sigma^y convention is sigma^y|0> = i|1>, sigma^y|1> = -i|0>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .problem import AmpParams, sector_energies

__all__ = [
    "StateVector",
    "SymmetricState",
    "HamiltonianTerms",
    "pair_indices",
    "sector_of_index",
    "apply_hamiltonian",
    "apply_symmetric",
    "embed",
    "project",
    "dense_hamiltonian",
    "symmetric_matrix",
    "collective_x",
    "uniform_superposition",
    "dump_state_csv",
]


@dataclass
class StateVector:
    """Complex amplitudes over the 2^n product basis."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n,):
            raise ValueError(
                f"expected {2**self.n} amplitudes, got {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class SymmetricState:
    """Complex amplitudes over the n+1 magnetization sectors."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.n + 1,):
            raise ValueError(
                f"expected {self.n + 1} amplitudes, got {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class HamiltonianTerms:
    """Coefficients of one instantaneous Hamiltonian.

    H = diag_scale * f(m) + sum_i x_coeffs[i] sigma^x_i
        + sum_i y_coeffs[i] sigma^y_i
        + sum_{i<j} xx_coeffs[pair] sigma^x_i sigma^x_j

    y_coeffs and xx_coeffs may be None when absent.  xx_coeffs follows the
    pair_indices() ordering.
    """

    n: int
    diag_scale: float
    x_coeffs: np.ndarray
    y_coeffs: np.ndarray | None = None
    xx_coeffs: np.ndarray | None = None

    def __post_init__(self):
        self.x_coeffs = np.asarray(self.x_coeffs, dtype=np.float64)
        if self.x_coeffs.shape != (self.n,):
            raise ValueError("x_coeffs must have one entry per site")
        if self.y_coeffs is not None:
            self.y_coeffs = np.asarray(self.y_coeffs, dtype=np.float64)
            if self.y_coeffs.shape != (self.n,):
                raise ValueError("y_coeffs must have one entry per site")
        if self.xx_coeffs is not None:
            self.xx_coeffs = np.asarray(self.xx_coeffs, dtype=np.float64)
            npairs = self.n * (self.n - 1) // 2
            if self.xx_coeffs.shape != (npairs,):
                raise ValueError("xx_coeffs must have one entry per pair")

    def is_symmetric(self) -> bool:
        """True when every site (and pair) carries the same coefficient."""
        same = np.allclose(self.x_coeffs, self.x_coeffs[0], rtol=0, atol=1e-14)
        if self.y_coeffs is not None:
            same &= np.allclose(
                self.y_coeffs, self.y_coeffs[0], rtol=0, atol=1e-14
            )
        if self.xx_coeffs is not None and self.xx_coeffs.size:
            same &= np.allclose(
                self.xx_coeffs, self.xx_coeffs[0], rtol=0, atol=1e-14
            )
        return bool(same)


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographic (i, j) site pairs with i < j."""
    a, b = np.triu_indices(n, k=1)
    return a.astype(np.int64), b.astype(np.int64)


def sector_of_index(n: int) -> np.ndarray:
    """Popcount (up-spin count) of every basis index."""
    idx = np.arange(2**n, dtype=np.int64)
    counts = np.zeros(2**n, dtype=np.int64)
    for b in range(n):
        counts += (idx >> b) & 1
    return counts


def _diag_energies(params: AmpParams) -> np.ndarray:
    """f(m) over the full basis (cached per instance)."""
    fsec = sector_energies(params)
    return fsec[sector_of_index(params.n)]


_DIAG_CACHE: dict[tuple[int, float, float], np.ndarray] = {}


def diag_energies(params: AmpParams) -> np.ndarray:
    key = (params.n, params.a, params.xp)
    arr = _DIAG_CACHE.get(key)
    if arr is None:
        arr = _diag_energies(params)
        if len(_DIAG_CACHE) > 32:
            _DIAG_CACHE.clear()
        _DIAG_CACHE[key] = arr
    return arr


@njit(cache=True)
def _apply_full(out, psi, n, fdiag, diag_scale, x, y, pa, pb, pc):  # pragma: no cover
    dim = psi.shape[0]
    for i in range(dim):
        out[i] = diag_scale * fdiag[i] * psi[i]
    for j in range(n):
        c = x[j]
        if c != 0.0:
            bit = 1 << j
            for i in range(dim):
                out[i] += c * psi[i ^ bit]
    for j in range(n):
        c = y[j]
        if c != 0.0:
            bit = 1 << j
            for i in range(dim):
                if i & bit:
                    out[i] += 1j * c * psi[i ^ bit]
                else:
                    out[i] += -1j * c * psi[i ^ bit]
    for p in range(pa.shape[0]):
        c = pc[p]
        if c != 0.0:
            mask = (1 << pa[p]) | (1 << pb[p])
            for i in range(dim):
                out[i] += c * psi[i ^ mask]
    return out


_EMPTY_F = np.zeros(0, dtype=np.float64)
_EMPTY_I = np.zeros(0, dtype=np.int64)


def apply_hamiltonian(
    terms: HamiltonianTerms, psi: StateVector, params: AmpParams
) -> StateVector:
    """H|psi> in the full basis, matrix-free."""
    if terms.n != psi.n or params.n != psi.n:
        raise ValueError("spin counts of terms, state and params differ")
    y = terms.y_coeffs if terms.y_coeffs is not None else np.zeros(terms.n)
    if terms.xx_coeffs is not None:
        pa, pb = pair_indices(terms.n)
        pc = terms.xx_coeffs
    else:
        pa, pb, pc = _EMPTY_I, _EMPTY_I, _EMPTY_F
    out = np.empty_like(psi.amplitudes)
    _apply_full(
        out,
        psi.amplitudes,
        terms.n,
        diag_energies(params),
        terms.diag_scale,
        terms.x_coeffs,
        np.asarray(y, dtype=np.float64),
        pa,
        pb,
        np.asarray(pc, dtype=np.float64),
    )
    return StateVector(out, psi.n)


def collective_x(n: int) -> np.ndarray:
    """Matrix of sum_i sigma^x_i in the Dicke basis (tridiagonal)."""
    off = np.sqrt(
        (n - np.arange(n)) * (np.arange(n) + 1.0)
    )  # <k+1| sum sigma^x |k>
    mat = np.zeros((n + 1, n + 1))
    idx = np.arange(n)
    mat[idx + 1, idx] = off
    mat[idx, idx + 1] = off
    return mat


def _collective_y(n: int) -> np.ndarray:
    off = np.sqrt((n - np.arange(n)) * (np.arange(n) + 1.0))
    mat = np.zeros((n + 1, n + 1), dtype=np.complex128)
    idx = np.arange(n)
    mat[idx + 1, idx] = 1j * off
    mat[idx, idx + 1] = -1j * off
    return mat


def collective_xx(n: int) -> np.ndarray:
    """Matrix of sum_{i<j} sigma^x_i sigma^x_j = ((sum sigma^x)^2 - n)/2."""
    x = collective_x(n)
    return (x @ x - n * np.eye(n + 1)) / 2.0


def symmetric_matrix(terms: HamiltonianTerms, params: AmpParams) -> np.ndarray:
    """Dense (n+1)x(n+1) Hamiltonian in the Dicke basis.

    Requires a symmetric term set (identical coefficients on every site
    and pair).
    """
    if not terms.is_symmetric():
        raise ValueError("term set is not permutation symmetric")
    n = terms.n
    mat = np.diag(terms.diag_scale * sector_energies(params)).astype(
        np.complex128
    )
    if terms.x_coeffs[0] != 0.0:
        mat += terms.x_coeffs[0] * collective_x(n)
    if terms.y_coeffs is not None and terms.y_coeffs[0] != 0.0:
        mat += terms.y_coeffs[0] * _collective_y(n)
    if terms.xx_coeffs is not None and terms.xx_coeffs.size:
        if terms.xx_coeffs[0] != 0.0:
            mat += terms.xx_coeffs[0] * collective_xx(n)
    return mat


def apply_symmetric(
    terms: HamiltonianTerms, phi: SymmetricState, params: AmpParams
) -> SymmetricState:
    """H|phi> restricted to the Dicke subspace."""
    if terms.n != phi.n:
        raise ValueError("spin counts of terms and state differ")
    mat = symmetric_matrix(terms, params)
    return SymmetricState(mat @ phi.amplitudes, phi.n)


def _sector_weights(n: int) -> np.ndarray:
    return np.sqrt(np.array([math.comb(n, k) for k in range(n + 1)], dtype=float))


def embed(phi: SymmetricState) -> StateVector:
    """Isometric embedding: sector amplitude spread evenly over C(n,k) strings."""
    n = phi.n
    w = _sector_weights(n)
    sectors = sector_of_index(n)
    psi = phi.amplitudes[sectors] / w[sectors]
    return StateVector(psi, n)


def project(psi: StateVector) -> SymmetricState:
    """Adjoint of embed: per-sector sums with 1/sqrt(C(n,k)) weights."""
    n = psi.n
    w = _sector_weights(n)
    sectors = sector_of_index(n)
    phi = np.zeros(n + 1, dtype=np.complex128)
    np.add.at(phi, sectors, psi.amplitudes)
    return SymmetricState(phi / w, n)


def uniform_superposition(n: int) -> StateVector:
    dim = 2**n
    return StateVector(np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128), n)


def dense_hamiltonian(terms: HamiltonianTerms, params: AmpParams) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the term set (diagnostics and eigensolves)."""
    n = terms.n
    dim = 2**n
    mat = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    mat[idx, idx] = terms.diag_scale * diag_energies(params)
    for j in range(n):
        flipped = idx ^ (1 << j)
        if terms.x_coeffs[j] != 0.0:
            mat[idx, flipped] += terms.x_coeffs[j]
        if terms.y_coeffs is not None and terms.y_coeffs[j] != 0.0:
            up = (idx >> j) & 1
            mat[idx, flipped] += terms.y_coeffs[j] * 1j * (2 * up - 1)
    if terms.xx_coeffs is not None and terms.xx_coeffs.size:
        pa, pb = pair_indices(n)
        for p in range(pa.size):
            if terms.xx_coeffs[p] != 0.0:
                mask = (1 << int(pa[p])) | (1 << int(pb[p]))
                mat[idx, idx ^ mask] += terms.xx_coeffs[p]
    return mat


def dump_state_csv(psi: StateVector, path) -> None:
    """CSV dump of (basis index, Re amplitude, Im amplitude)."""
    data = np.column_stack(
        [np.arange(2**psi.n), psi.amplitudes.real, psi.amplitudes.imag]
    )
    np.savetxt(
        path,
        data,
        delimiter=",",
        header="index,re,im",
        comments="",
        fmt=["%d", "%.17g", "%.17g"],
    )
