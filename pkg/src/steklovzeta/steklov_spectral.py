"""Eigenvalue extraction, Rayleigh data and the classical eigenvalue bounds.

The reference spectrum of the disk weight is {0, 1, 1, 2, 2, ...}; a general
weight approaches (2*pi/L) times that sequence super-polynomially fast, which
is what the residual diagnostics measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle_fourier import TWO_PI, WeightFunction, boundary_length, require_positive
from .dtn_operators import (
    KERNEL_TOL,
    _lambda_fourier_entries,
    _require_normalized,
    phi_dtn_matrix,
    phi_eigensystem,
)
from .errors import EigenSolverFailure


@dataclass(frozen=True)
class SteklovSpectrum:
    """Sorted nonnegative eigenvalues with truncation and trust metadata."""

    values: np.ndarray
    K_trust: int
    L: float
    M_big: int
    weight_id: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def reference(self) -> np.ndarray:
        """Disk reference sequence 0, 1, 1, 2, 2, ... of matching length."""
        n = np.arange(self.values.size)
        return np.ceil(n / 2.0)

    @property
    def trusted(self) -> np.ndarray:
        return self.values[: self.K_trust]

    def to_csv(self, path) -> None:
        """Rows (n, lambda_n, (2*pi/L)*lambda^0_n, delta_n)."""
        scale = TWO_PI / self.L
        ref = self.reference
        with open(path, "w") as fh:
            fh.write("n,lambda,reference,delta\n")
            for n, (lam, r) in enumerate(zip(self.values, ref)):
                fh.write(f"{n},{lam:.17g},{scale * r:.17g},{lam - scale * r:.17g}\n")


def steklov_spectrum(a: WeightFunction, M_big: int) -> SteklovSpectrum:
    """Eigenvalues of the weighted DtN assembly at order M_big, sorted ascending.

    The first M_big/2 entries are trusted; beyond that Galerkin truncation of
    the sqrt-weight composition corrupts the values.
    """
    require_positive(a)
    L = boundary_length(a)
    try:
        vals = np.linalg.eigvalsh(_lambda_fourier_entries(a, M_big))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    if vals[0] < -1e-9:
        raise EigenSolverFailure(f"PSD assembly returned eigenvalue {vals[0]:.3e}")
    vals = np.maximum(vals, 0.0)
    return SteklovSpectrum(vals, M_big // 2, L, M_big,
                           weight_id=a.meta or a.fingerprint[:12])


def rayleigh_quotient(a: WeightFunction, n: int, t: float = 1.0,
                      M_big: int | None = None) -> float:
    """Diagonal Rayleigh datum of the t-th DtN power against the phi basis.

    Computed from diagonal reads of the phi-basis assembly (never from
    eigenvectors).  Guaranteed >= |n|**t up to truncation noise for t >= 1.
    """
    if t < 1.0:
        raise ValueError("power t must be >= 1")
    _require_normalized(a)
    if M_big is None:
        M_big = max(64, 4 * (abs(n) + 1))
    if abs(n) > M_big // 2:
        raise ValueError(f"mode {n} outside the trusted window of M_big={M_big}")
    row = n + M_big
    if t == 1.0:
        return float(phi_dtn_matrix(a, M_big)[row, row].real)
    w, V = phi_eigensystem(a, M_big)
    g = np.where(w > KERNEL_TOL, np.maximum(w, KERNEL_TOL) ** float(t), 0.0)
    return float(np.abs(V[row]) ** 2 @ g)


@dataclass(frozen=True)
class AsymptoticDiagnostics:
    """Residuals against the rescaled disk spectrum plus a decay-slope fit."""

    deltas: np.ndarray
    decay_slope: float

    def max_abs(self, start: int = 0) -> float:
        return float(np.max(np.abs(self.deltas[start:])))


def asymptotic_residuals(sp: SteklovSpectrum) -> AsymptoticDiagnostics:
    """delta_n = lambda_n - (2*pi/L) * lambda^0_n for n up to the trusted edge.

    The slope of log|delta| against log n is reported as a super-polynomial
    decay diagnostic; only the finite-window slope is observable.
    """
    if sp.K_trust < 1:
        raise ValueError("empty trusted window")
    upto = min(sp.K_trust, sp.values.size - 1)
    scale = TWO_PI / sp.L
    deltas = sp.values[: upto + 1] - scale * sp.reference[: upto + 1]
    ns = np.arange(deltas.size)
    mask = (ns >= 2) & (np.abs(deltas) > 1e-13)
    if mask.sum() >= 3:
        slope = float(np.polyfit(np.log(ns[mask]), np.log(np.abs(deltas[mask])), 1)[0])
    else:
        slope = float("nan")
    return AsymptoticDiagnostics(deltas, slope)


@dataclass(frozen=True)
class ClassicalInequalityReport:
    """Margins for the first-eigenvalue, linear and pairwise-product bounds.

    Margins are bound minus value, so a nonnegative margin means the
    inequality holds.  Strictness is never asserted, only reported.
    """

    weinstock_margin: float
    single_margins: np.ndarray
    pair_min_margin: float
    pair_argmin: tuple
    tol: float = 1e-9

    @property
    def weinstock_holds(self) -> bool:
        return self.weinstock_margin >= -self.tol

    @property
    def singles_hold(self) -> bool:
        return bool(np.min(self.single_margins) >= -self.tol)

    @property
    def pairs_hold(self) -> bool:
        return self.pair_min_margin >= -self.tol

    @property
    def all_hold(self) -> bool:
        return self.weinstock_holds and self.singles_hold and self.pairs_hold


def classical_inequality_report(sp: SteklovSpectrum) -> ClassicalInequalityReport:
    """Check lambda_1 <= 2*pi/L, lambda_k <= 2*pi*k/L and the pairwise product
    bound with parity-dependent constant, over the trusted window."""
    if sp.K_trust < 10:
        raise ValueError("need at least 10 trusted eigenvalues")
    K = sp.K_trust
    lam = sp.values
    T = TWO_PI / sp.L
    weinstock = T - lam[1]
    singles = T * np.arange(K) - lam[:K]
    best = math.inf
    arg = (0, 0)
    unit = (math.pi / sp.L) ** 2
    for k in range(1, K):
        for ell in range(k, K - k + 1):
            s = k + ell
            bound = unit * (s ** 2 if s % 2 == 0 else (s - 1) ** 2)
            margin = bound - lam[k] * lam[ell]
            if margin < best:
                best = margin
                arg = (k, ell)
    return ClassicalInequalityReport(float(weinstock), singles, float(best), arg)
