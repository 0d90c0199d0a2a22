"""Finite Hermitian matrices for the circle derivative and weighted
Dirichlet-to-Neumann families.

Matrices act on Fourier modes -M..M (``fourier`` basis) or on the explicit
eigenbasis of the weighted derivative (``phi`` basis).  A two-tier window
convention applies everywhere: assemble at order M, trust spectral data only
up to M/2, since Galerkin truncation corrupts the top of the spectrum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circle_fourier import (
    GRID_CAP,
    TWO_PI,
    GridSampling,
    WeightFunction,
    _next_pow2,
    antiderivative_mean_one,
    boundary_length,
    pointwise_map,
    require_positive,
    synthesize_real,
    trim,
)
from .errors import (
    BandwidthExceeded,
    NegativeEigenvalue,
    NonPositiveWeight,
    NotNormalized,
)

#: eigenvalues at or below this are treated as the kernel mode
KERNEL_TOL = 1e-8

#: relative Hermitian-deviation tolerance for assembled matrices
HERMITIAN_REL_TOL = 1e-12

#: grids for phi-basis sampling never exceed this
PHI_GRID_CAP = 1 << 15

_TAIL_TOL = 1e-13

FOURIER_OPERATORS = ("Lambda_a", "D_a", "Dsq_a", "mult_a")


@dataclass(frozen=True)
class OperatorMatrix:
    """Hermitian matrix of an operator on modes -M..M in a tagged basis."""

    entries: np.ndarray
    basis: str
    weight_id: str
    M: int

    def __post_init__(self):
        A = np.array(self.entries, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != 2 * self.M + 1:
            raise ValueError("entries must be square of size 2M+1")
        dev = float(np.max(np.abs(A - A.conj().T)))
        scale = 1.0 + float(np.max(np.abs(A)))
        if dev > HERMITIAN_REL_TOL * scale:
            raise ValueError(f"matrix not Hermitian: deviation {dev:.3e}")
        A.setflags(write=False)
        object.__setattr__(self, "entries", A)

    @property
    def size(self) -> int:
        return 2 * self.M + 1

    def to_dict(self) -> dict:
        """Debug dump; not a stability-guaranteed interface."""
        rows = [[[float(v.real), float(v.imag)] for v in row] for row in self.entries]
        return {"basis": self.basis, "M": self.M, "rows": rows}


@dataclass(frozen=True)
class KernelProjection:
    """Rank-one orthogonal projection onto the common kernel mode."""

    vector: np.ndarray
    basis: str

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex)
        v = v / np.linalg.norm(v)
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(self.vector, np.conj(self.vector))

    @property
    def idempotency_defect(self) -> float:
        P = self.matrix
        return float(np.max(np.abs(P @ P - P)))


def _hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def _toeplitz(coeffs: np.ndarray, bandwidth: int, size: int) -> np.ndarray:
    """T[m, n] = c_{m-n} from an array indexed by modes -bandwidth..bandwidth."""
    idx = np.arange(size)
    off = idx[:, None] - idx[None, :]
    inside = np.abs(off) <= bandwidth
    out = np.zeros((size, size), dtype=complex)
    out[inside] = coeffs[off[inside] + bandwidth]
    return out


def _weight_id(a: WeightFunction) -> str:
    return a.meta if a.meta else a.fingerprint[:12]


# ---------------------------------------------------------------------------
# Fourier-basis assembly


def assemble_fourier(a: WeightFunction, M: int, which: str) -> OperatorMatrix:
    """Assemble one of the operator family on Fourier modes -M..M.

    ``mult_a`` is the Toeplitz matrix of a.  ``Lambda_a`` and ``D_a`` are
    S.diag(|n|).S and S.diag(n).S with S the Toeplitz matrix of sqrt(a).
    ``Dsq_a`` is the square of the weighted derivative assembled from its
    expansion as a second-order differential operator; it exists purely as an
    independent consistency path and is exact for band-limited weights.
    """
    if which not in FOURIER_OPERATORS:
        raise ValueError(f"unknown operator tag {which!r}")
    require_positive(a)
    size = 2 * M + 1
    if which == "mult_a":
        A = _toeplitz(a.coeffs, a.M, size)
    elif which in ("Lambda_a", "D_a"):
        root = sqrt_representation(a, 2 * M)
        if root.M < 2 * M:
            raise BandwidthExceeded(
                f"sqrt bandwidth {root.M} below 2*M={2 * M}; reduce the matrix order")
        S = _toeplitz(root.coeffs, root.M, size)
        n = np.arange(-M, M + 1)
        d = np.abs(n) if which == "Lambda_a" else n
        A = _hermitize(S @ (d[:, None] * S))
    else:  # Dsq_a
        modes = np.arange(-a.M, a.M + 1)
        da = modes * a.coeffs
        d2a = modes ** 2 * a.coeffs
        c2 = np.convolve(a.coeffs, a.coeffs)
        c1 = np.convolve(a.coeffs, da)
        c0 = 0.5 * np.convolve(a.coeffs, d2a) + 0.25 * np.convolve(da, da)
        band = 2 * a.M
        n = np.arange(-M, M + 1)
        A = (_toeplitz(c2, band, size) * (n ** 2)[None, :]
             + 2.0 * _toeplitz(c1, band, size) * n[None, :]
             + _toeplitz(c0, band, size))
        A = _hermitize(A)
    return OperatorMatrix(A, "fourier", _weight_id(a), M)


@lru_cache(maxsize=16)
def sqrt_representation(a: WeightFunction, min_modes: int) -> WeightFunction:
    """Wide-band coefficients of sqrt(a), cached per (weight, bandwidth)."""
    return pointwise_map(a, "sqrt", min_modes=min_modes)


@lru_cache(maxsize=16)
def _lambda_fourier_entries(a: WeightFunction, M: int) -> np.ndarray:
    return assemble_fourier(a, M, "Lambda_a").entries


@lru_cache(maxsize=16)
def fourier_eigenvalues(a: WeightFunction, M: int) -> np.ndarray:
    vals = np.linalg.eigvalsh(_lambda_fourier_entries(a, M))
    vals.setflags(write=False)
    return vals


# ---------------------------------------------------------------------------
# phi basis


def _require_normalized(a: WeightFunction, tol: float = 1e-10) -> None:
    dev = abs(boundary_length(a) / TWO_PI - 1.0)
    if dev > tol:
        raise NotNormalized(f"mean of 1/a differs from 1 by {dev:.3e}")


def _boundary_flow(a: WeightFunction):
    """Increasing angle reparametrization b with b' = 1/a and b(0) = 0."""
    c = trim(pointwise_map(a, "reciprocal"), 1e-15)
    c0 = c.coeff(0).real
    # remove quadrature-level drift so the mean is exactly one
    c = WeightFunction(c.coeffs / c0, meta=f"reciprocal-density({_weight_id(a)})")
    return antiderivative_mean_one(c)


def phi_basis_samples(a: WeightFunction, n: int, N: int) -> GridSampling:
    """Samples of the n-th weighted-derivative eigenfunction on an N-grid.

    phi_n(theta) = (2*pi*a(theta))**-0.5 * exp(i*n*b(theta)) with b the
    mean-one antiderivative of 1/a.  Requires a normalized weight.
    """
    _require_normalized(a)
    b = _boundary_flow(a)
    theta = TWO_PI * np.arange(N) / N
    avals = synthesize_real(a, N)
    if avals.min() <= 0.0:
        raise NonPositiveWeight("phi sampling hit a nonpositive weight value")
    vals = np.exp(1j * n * b(theta)) / np.sqrt(TWO_PI * avals)
    return GridSampling(vals)


def _phi_mode_coefficients(a: WeightFunction, M: int):
    """Fourier coefficients of exp(i*m*b) for all |m| <= M on an adaptive grid.

    Returns (C, k) where C[m + M, :] holds the coefficients of mode m and k
    the signed Fourier mode numbers of the columns.  The grid is doubled
    until the analysis tail of the extreme mode drops below 1e-13 relative.
    """
    b = _boundary_flow(a)
    N = _next_pow2(max(256, 8 * (M + 1), 8 * (2 * a.M + 1)))
    N = min(N, PHI_GRID_CAP)
    while True:
        theta = TWO_PI * np.arange(N) / N
        E = np.exp(1j * b(theta))
        probe = np.fft.fft(E ** M) / N
        mags = np.abs(probe)
        # bins N/4..3N/4 hold the modes with |k| >= N/4 (the top octave)
        tail = float(mags[N // 4 : 3 * N // 4 + 1].max())
        if tail <= _TAIL_TOL * max(float(mags.max()), 1e-300) or N >= PHI_GRID_CAP:
            if N >= PHI_GRID_CAP and tail > _TAIL_TOL * float(mags.max()):
                warnings.warn(
                    f"phi-mode analysis tail {tail:.2e} at grid cap {N}; "
                    "results may lose accuracy", stacklevel=2)
            break
        N *= 2
    U = np.empty((2 * M + 1, N), dtype=complex)
    U[M] = 1.0
    for m in range(1, M + 1):
        U[M + m] = U[M + m - 1] * E
        U[M - m] = np.conj(U[M + m])
    C = np.fft.fft(U, axis=1) / N
    k = np.rint(np.fft.fftfreq(N) * N).astype(int)
    return C, k


def _phi_dtn_entries(a: WeightFunction, M: int) -> np.ndarray:
    C, k = _phi_mode_coefficients(a, M)
    W = C * np.sqrt(np.abs(k))[None, :]
    G = W @ W.conj().T
    return _hermitize(G.T)


@lru_cache(maxsize=16)
def phi_dtn_matrix(a: WeightFunction, M: int) -> np.ndarray:
    """Cached matrix of the weighted DtN operator in the phi basis."""
    _require_normalized(a)
    require_positive(a)
    A = _phi_dtn_entries(a, M)
    A.setflags(write=False)
    return A


@lru_cache(maxsize=16)
def phi_eigensystem(a: WeightFunction, M: int):
    """Cached eigendecomposition of the phi-basis DtN matrix."""
    w, V = np.linalg.eigh(phi_dtn_matrix(a, M))
    if w[0] < -1e-9:
        raise NegativeEigenvalue(f"phi assembly has eigenvalue {w[0]:.3e}")
    w.setflags(write=False)
    V.setflags(write=False)
    return w, V


def phi_derivative_matrix(a: WeightFunction, M: int) -> OperatorMatrix:
    """Matrix of the weighted derivative in the phi basis (diagnostic).

    Should be diagonal with entries n; off-diagonal magnitude measures the
    quadrature and reparametrization error of the whole phi pipeline.
    """
    _require_normalized(a)
    C, k = _phi_mode_coefficients(a, M)
    G = (C * k[None, :]) @ C.conj().T
    return OperatorMatrix(_hermitize(G.T), "phi", _weight_id(a), M)


def assemble_phi(a: WeightFunction, M: int, t: float = 1.0) -> OperatorMatrix:
    """Weighted DtN matrix in the phi basis, raised to the power t >= 0.

    For t = 1 entries are computed spectrally: sample sqrt(a)*phi_m, analyze,
    weight Fourier coefficients by |k|, inner-product.  Other powers go
    through matrix_power of the t = 1 assembly.
    """
    if t < 0:
        raise ValueError("power must be >= 0")
    A = OperatorMatrix(phi_dtn_matrix(a, M), "phi", _weight_id(a), M)
    if t == 1.0:
        return A
    return matrix_power(A, t)


def matrix_power(A: OperatorMatrix, s: float) -> OperatorMatrix:
    """Spectral power with the kernel convention: eigenvalues <= KERNEL_TOL map to 0."""
    w, V = np.linalg.eigh(A.entries)
    if w[0] < -1e-9:
        raise NegativeEigenvalue(
            f"matrix_power: eigenvalue {w[0]:.3e} below -1e-9 signals assembly inconsistency")
    g = np.where(w > KERNEL_TOL, np.maximum(w, KERNEL_TOL) ** float(s), 0.0)
    P = _hermitize((V * g) @ V.conj().T)
    return OperatorMatrix(P, A.basis, A.weight_id, A.M)


def kernel_projection(a: WeightFunction, M: int, basis: str = "fourier") -> KernelProjection:
    """Projection onto the kernel mode phi_0 = (2*pi*a)**-0.5 in the given basis."""
    if basis == "phi":
        v = np.zeros(2 * M + 1, dtype=complex)
        v[M] = 1.0
        return KernelProjection(v, "phi")
    if basis != "fourier":
        raise ValueError(f"unknown basis {basis!r}")
    phi0 = pointwise_map(a, "power", exponent=-0.5, min_modes=2 * M)
    v = np.zeros(2 * M + 1, dtype=complex)
    K = min(M, phi0.M)
    v[M - K : M + K + 1] = phi0.coeffs[phi0.M - K : phi0.M + K + 1]
    return KernelProjection(v / math.sqrt(TWO_PI), "fourier")
