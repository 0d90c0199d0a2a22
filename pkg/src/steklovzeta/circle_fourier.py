"""Fourier representation and algebra of smooth periodic functions on the circle.

A weight is a truncated two-sided Fourier series.  All nonlinear work
(reciprocals, square roots, powers) happens pointwise on oversampled uniform
grids followed by re-analysis, so operator assembly downstream can stay in
coefficient space.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, MeanNotOne, NonPositiveWeight

#: oversampling factor applied by every pointwise nonlinear map
OVERSAMPLE = 4

#: hard cap on any internal grid size
GRID_CAP = 1 << 16

#: tolerance for Hermitian symmetry of coefficient arrays
HERMITIAN_TOL = 1e-12

TWO_PI = 2.0 * math.pi


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class WeightFunction:
    """A function a(theta) = sum_{|n| <= M} c_n exp(i*n*theta) on the circle.

    Instances are immutable; every operation returns a new object.  ``meta``
    is a free-form provenance string carried along by transformations.
    """

    __slots__ = ("coeffs", "M", "meta", "_fingerprint")

    def __init__(self, coeffs, meta: str = ""):
        arr = np.array(coeffs, dtype=complex)
        if arr.ndim != 1 or arr.size % 2 == 0:
            raise ValueError("need an odd-length coefficient array for modes -M..M")
        arr.setflags(write=False)
        self.coeffs = arr
        self.M = arr.size // 2
        self.meta = meta
        self._fingerprint = hashlib.sha1(arr.tobytes()).hexdigest()

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, meta: str = "constant") -> "WeightFunction":
        return cls(np.array([value], dtype=complex), meta=meta)

    @classmethod
    def from_modes(cls, modes: dict, meta: str = "", hermitian: bool = False) -> "WeightFunction":
        """Build from a sparse {mode: amplitude} mapping.

        With ``hermitian=True`` only modes n >= 0 need to be given; negative
        modes are filled with conjugates.
        """
        if not modes:
            return cls.constant(0.0, meta=meta)
        M = max(abs(int(n)) for n in modes)
        c = np.zeros(2 * M + 1, dtype=complex)
        for n, amp in modes.items():
            c[int(n) + M] = amp
        if hermitian:
            for n, amp in modes.items():
                n = int(n)
                if n > 0 and (-n not in modes):
                    c[-n + M] = np.conj(amp)
        return cls(c, meta=meta)

    # -- accessors ---------------------------------------------------------

    def coeff(self, n: int) -> complex:
        """Coefficient of exp(i*n*theta); zero outside the stored band."""
        if abs(n) > self.M:
            return 0j
        return complex(self.coeffs[n + self.M])

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    @property
    def hermitian_asymmetry(self) -> float:
        """max |c_n - conj(c_{-n})|, zero for a real-valued function."""
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))))

    @property
    def is_real(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return self.hermitian_asymmetry <= HERMITIAN_TOL * scale

    @property
    def tail_ratio(self) -> float:
        """|c_{+-M}| / max|c_n|, a conditioning diagnostic for the truncation."""
        top = float(np.max(np.abs(self.coeffs)))
        if top == 0.0 or self.M == 0:
            return 0.0
        edge = max(abs(self.coeffs[0]), abs(self.coeffs[-1]))
        return float(edge / top)

    def eval_at_points(self, z) -> np.ndarray:
        """Evaluate at complex points z on the unit circle (Horner in z and 1/z)."""
        z = np.asarray(z, dtype=complex)
        pos = np.zeros_like(z)
        neg = np.zeros_like(z)
        zbar = np.conj(z)
        for n in range(self.M, 0, -1):
            pos = (pos + self.coeffs[n + self.M]) * z
            neg = (neg + self.coeffs[-n + self.M]) * zbar
        return pos + neg + self.coeffs[self.M]

    def __call__(self, theta) -> np.ndarray:
        return self.eval_at_points(np.exp(1j * np.asarray(theta, dtype=float)))

    def min_value(self) -> float:
        """Minimum of the synthesized function over a dense grid (>= 8M points)."""
        N = min(_next_pow2(max(8 * self.M, 64)), GRID_CAP)
        return float(np.min(synthesize_real(self, N)))

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, WeightFunction)
            and self.M == other.M
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.M, self._fingerprint))

    def __repr__(self):
        return f"WeightFunction(M={self.M}, meta={self.meta!r})"

    @property
    def fingerprint(self) -> str:
        return self._fingerprint


@dataclass(frozen=True)
class GridSampling:
    """Values of a function at theta_j = 2*pi*j/N with N a power of two."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=complex)
        if arr.ndim != 1 or not _is_pow2(arr.size):
            raise ValueError("grid size must be a power of two")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.N) / self.N


# ---------------------------------------------------------------------------
# synthesis / analysis


def _synthesize(a: WeightFunction, N: int) -> np.ndarray:
    spectrum = np.zeros(N, dtype=complex)
    for n in range(-a.M, a.M + 1):
        spectrum[n % N] += a.coeffs[n + a.M]
    return np.fft.ifft(spectrum) * N


def synthesize_real(a: WeightFunction, N: int) -> np.ndarray:
    """Synthesize a real-valued weight on an N-point grid, validating realness."""
    vals = _synthesize(a, N)
    scale = 1.0 + float(np.max(np.abs(vals.real)))
    if float(np.max(np.abs(vals.imag))) > 1e-10 * scale:
        raise ValueError("coefficients are not Hermitian: synthesized values are complex")
    return vals.real.copy()


def to_samples(a: WeightFunction, N: int) -> GridSampling:
    """Synthesize on the uniform N-point grid; N must satisfy N >= 2*(2M+1)."""
    if N < 2 * (2 * a.M + 1):
        raise AliasingError(f"grid N={N} below anti-aliasing floor {2 * (2 * a.M + 1)}")
    return GridSampling(_synthesize(a, N))


def from_samples(g: GridSampling, meta: str = "analyzed") -> WeightFunction:
    """Discrete Fourier analysis: coefficients for |n| <= N/2 - 1."""
    N = g.N
    F = np.fft.fft(np.asarray(g.values, dtype=complex)) / N
    M = N // 2 - 1
    c = np.empty(2 * M + 1, dtype=complex)
    for n in range(-M, M + 1):
        c[n + M] = F[n % N]
    return WeightFunction(c, meta=meta)


def trim(a: WeightFunction, rel_tol: float = 1e-14) -> WeightFunction:
    """Drop trailing modes below rel_tol * max|c_n|; keeps at least mode 0."""
    mags = np.abs(a.coeffs)
    scale = max(float(mags.max()), 1e-300)
    keep = np.nonzero(mags > rel_tol * scale)[0]
    if keep.size == 0:
        K = 0
    else:
        K = int(max(abs(keep.min() - a.M), abs(keep.max() - a.M)))
    if K == a.M:
        return a
    return WeightFunction(a.coeffs[a.M - K : a.M + K + 1], meta=a.meta)


# ---------------------------------------------------------------------------
# positivity and nonlinear pointwise maps


def require_positive(a: WeightFunction) -> None:
    m = a.min_value()
    if m <= 0.0:
        raise NonPositiveWeight(f"weight has min sample {m:.3e} <= 0")


def pointwise_map(a: WeightFunction, kind: str, exponent: float | None = None,
                  min_modes: int = 0) -> WeightFunction:
    """Apply reciprocal / sqrt / power p pointwise on a 4x-oversampled grid.

    The result is re-analyzed at the oversampled bandwidth, so its truncation
    order is wider than the input's.  ``min_modes`` forces a minimum result
    bandwidth (used by operator assembly, which needs sqrt coefficients out
    to twice the matrix order).
    """
    if kind not in ("reciprocal", "sqrt", "power"):
        raise ValueError(f"unknown pointwise map {kind!r}")
    if kind == "power" and exponent is None:
        raise ValueError("power map needs an exponent")
    N = _next_pow2(OVERSAMPLE * max(2 * a.M + 1, int(min_modes) + 1))
    N = min(max(N, 64), GRID_CAP)
    vals = synthesize_real(a, N)
    if vals.min() <= 0.0:
        raise NonPositiveWeight(
            f"pointwise {kind}: min sample {vals.min():.3e} <= 0 on {N}-point grid")
    if kind == "reciprocal":
        mapped = 1.0 / vals
    elif kind == "sqrt":
        mapped = np.sqrt(vals)
    else:
        mapped = vals ** float(exponent)
    out = from_samples(GridSampling(mapped), meta=f"{kind}({a.meta or 'weight'})")
    asym = out.hermitian_asymmetry
    scale = max(1.0, float(np.max(np.abs(out.coeffs))))
    if asym >= HERMITIAN_TOL * scale:
        raise ValueError(f"pointwise map produced asymmetric coefficients ({asym:.2e})")
    sym = 0.5 * (out.coeffs + np.conj(out.coeffs[::-1]))
    return WeightFunction(sym, meta=out.meta)


def boundary_length(a: WeightFunction) -> float:
    """L(a) = integral of 1/a over the circle, by spectrally accurate trapezoid."""
    N = min(max(_next_pow2(OVERSAMPLE * (2 * a.M + 1)), 64), GRID_CAP)
    vals = synthesize_real(a, N)
    if vals.min() <= 0.0:
        raise NonPositiveWeight(f"boundary_length: min sample {vals.min():.3e} <= 0")
    return TWO_PI * float(np.mean(1.0 / vals))


def normalize(a: WeightFunction) -> WeightFunction:
    """Rescale so the mean of 1/a is one, i.e. boundary length 2*pi."""
    scale = boundary_length(a) / TWO_PI
    meta = a.meta + f"; normalized(scale={scale:.17g})" if a.meta else f"normalized(scale={scale:.17g})"
    return WeightFunction(a.coeffs * scale, meta=meta)


def antiderivative_mean_one(c: WeightFunction):
    """Return theta -> integral_0^theta c, for c with mean exactly one.

    The result satisfies b(0) = 0 and b(theta + 2*pi) = b(theta) + 2*pi, and
    is strictly increasing whenever c > 0.
    """
    c0 = c.coeff(0)
    if abs(c0 - 1.0) > 1e-12:
        raise MeanNotOne(f"mean coefficient {c0} differs from 1 beyond 1e-12")
    ks = c.modes[np.abs(c.modes) > 0]
    amps = np.array([c.coeff(int(k)) for k in ks])
    w = amps / (1j * ks)
    const = -np.sum(w)

    def b(theta):
        th = np.asarray(theta, dtype=float)
        flat = np.atleast_1d(th).astype(float)
        acc = flat.astype(complex) + const
        # chunk the outer product so huge grids stay in cache
        step = 2048
        for lo in range(0, flat.size, step):
            hi = min(lo + step, flat.size)
            acc[lo:hi] += np.exp(1j * np.outer(flat[lo:hi], ks)) @ w
        out = acc.real
        return float(out[0]) if th.ndim == 0 else out.reshape(th.shape)

    return b


# ---------------------------------------------------------------------------
# persistence

def weight_to_dict(a: WeightFunction) -> dict:
    """JSON-ready form: {"M", "coeffs": [[n, re, im], ...], "meta"}.

    For real weights only modes n >= 0 are written; Hermitian completion is
    implied by the format.
    """
    if a.is_real:
        rows = [[int(n), float(a.coeff(n).real), float(a.coeff(n).imag)]
                for n in range(0, a.M + 1)]
    else:
        rows = [[int(n), float(a.coeff(n).real), float(a.coeff(n).imag)]
                for n in range(-a.M, a.M + 1)]
    return {"M": int(a.M), "coeffs": rows, "meta": a.meta}


def weight_from_dict(d: dict) -> WeightFunction:
    M = int(d["M"])
    c = np.zeros(2 * M + 1, dtype=complex)
    seen = set()
    for n, re, im in d["coeffs"]:
        n = int(n)
        if abs(n) > M:
            raise ValueError(f"mode {n} outside declared truncation order {M}")
        c[n + M] = complex(re, im)
        seen.add(n)
    for n in range(1, M + 1):
        if n in seen and -n not in seen:
            c[-n + M] = np.conj(c[n + M])
        elif -n in seen and n not in seen:
            c[n + M] = np.conj(c[-n + M])
    return WeightFunction(c, meta=d.get("meta", ""))


def save_weight(a: WeightFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(weight_to_dict(a), fh, indent=1)


def load_weight(path) -> WeightFunction:
    with open(path) as fh:
        return weight_from_dict(json.load(fh))


def samples_to_csv(g: GridSampling, path) -> None:
    """Dump rows (theta_j, value); imaginary parts are dropped when negligible."""
    vals = g.values
    real_only = float(np.max(np.abs(vals.imag))) <= 1e-12 * (1.0 + float(np.max(np.abs(vals.real))))
    with open(path, "w") as fh:
        if real_only:
            fh.write("theta,value\n")
            for t, v in zip(g.theta, vals.real):
                fh.write(f"{t:.17g},{v:.17g}\n")
        else:
            fh.write("theta,re,im\n")
            for t, v in zip(g.theta, vals):
                fh.write(f"{t:.17g},{v.real:.17g},{v.imag:.17g}\n")
