"""Disk automorphisms acting on boundary weights, and planar-domain ingestion.

A disk automorphism Psi(z) = e^{i*alpha} (z - w) / (1 - conj(w) z) restricts
to a circle diffeomorphism; pulling a weight back along it preserves the
boundary length, the Steklov spectrum and all zeta data.  Planar domains
enter through the boundary modulus of the derivative of a Riemann map.
"""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circle_fourier import (
    TWO_PI,
    GridSampling,
    WeightFunction,
    _next_pow2,
    from_samples,
    require_positive,
    trim,
)
from .errors import NonPositiveWeight, UnivalenceWarning, UnknownGallery, VanishingDerivative

_PULLBACK_GRID_CAP = 1 << 14
_TAIL_TOL = 1e-13

ORIENTATIONS = ("preserving", "reversing")


@dataclass(frozen=True)
class MoebiusMap:
    """Disk automorphism, possibly composed with complex conjugation."""

    w: complex = 0j
    alpha: float = 0.0
    orientation: str = "preserving"

    def __post_init__(self):
        if abs(self.w) >= 1.0:
            raise ValueError(f"automorphism parameter |w|={abs(self.w)} must be < 1")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        object.__setattr__(self, "w", complex(self.w))
        object.__setattr__(self, "alpha", float(self.alpha))

    def boundary_points(self, theta: np.ndarray) -> np.ndarray:
        """Image points Psi(e^{i theta}) on the unit circle."""
        z = np.exp(1j * np.asarray(theta, dtype=float))
        if self.orientation == "reversing":
            z = np.conj(z)
        return np.exp(1j * self.alpha) * (z - self.w) / (1.0 - np.conj(self.w) * z)

    def boundary_speed(self, theta: np.ndarray) -> np.ndarray:
        """|d psi / d theta| in closed form: (1-|w|^2) / |1 - conj(w) z|^2."""
        z = np.exp(1j * np.asarray(theta, dtype=float))
        if self.orientation == "reversing":
            z = np.conj(z)
        return (1.0 - abs(self.w) ** 2) / np.abs(1.0 - np.conj(self.w) * z) ** 2

    def _conjugated(self) -> "MoebiusMap":
        return MoebiusMap(np.conj(self.w), -self.alpha, "preserving")

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """The automorphism self o other (apply ``other`` first)."""
        a, b = self, other
        flip = (a.orientation == "reversing") != (b.orientation == "reversing")
        conf_a = MoebiusMap(a.w, a.alpha, "preserving")
        conf_b = MoebiusMap(b.w, b.alpha, "preserving")
        if a.orientation == "reversing":
            # a(z) = conf_a(conj z), and conj(conf_b(.)) factors through the
            # conjugated-coefficient automorphism
            conf_b = conf_b._conjugated()
        comp = _compose_conformal(conf_a, conf_b)
        return MoebiusMap(comp.w, comp.alpha, "reversing" if flip else "preserving")


def _matrix(m: MoebiusMap) -> np.ndarray:
    phase = np.exp(1j * m.alpha)
    return np.array([[phase, -phase * m.w], [-np.conj(m.w), 1.0]], dtype=complex)


def _compose_conformal(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    mat = _matrix(m1) @ _matrix(m2)
    p, q = mat[0]
    r, s = mat[1]
    w = -q / p
    alpha = float(np.angle(p / s))
    if abs(r / s + np.conj(w)) > 1e-10:
        raise ValueError("composition did not yield a disk automorphism")
    return MoebiusMap(w, alpha, "preserving")


@dataclass(frozen=True)
class DomainMap:
    """Derivative of a Riemann map as a finite Taylor series on the disk."""

    taylor: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.array(self.taylor, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("taylor must be a nonempty coefficient vector")
        c.setflags(write=False)
        object.__setattr__(self, "taylor", c)
        vals = self.boundary_values(1024)
        if float(np.min(np.abs(vals))) <= 1e-12:
            raise VanishingDerivative(
                f"map derivative vanishes on the boundary grid (min {np.min(np.abs(vals)):.2e})")
        weights = np.arange(1, c.size) * np.abs(c[1:])
        if weights.sum() > abs(c[0]):
            warnings.warn(
                f"univalence heuristic violated for {self.name or 'domain map'}: "
                f"sum n|c_n| = {weights.sum():.3g} > |c_0| = {abs(c[0]):.3g}",
                UnivalenceWarning, stacklevel=2)

    def boundary_values(self, N: int) -> np.ndarray:
        z = np.exp(1j * TWO_PI * np.arange(N) / N)
        vals = np.zeros(N, dtype=complex)
        for c in self.taylor[::-1]:
            vals = vals * z + c
        return vals


# ---------------------------------------------------------------------------


def _adaptive_analysis(sample_fn, start_N: int, meta: str) -> WeightFunction:
    """Analyze samples of an analytic function, doubling the grid until the
    top-octave tail falls below 1e-13 relative."""
    N = min(_next_pow2(max(256, start_N)), _PULLBACK_GRID_CAP)
    while True:
        vals = sample_fn(N)
        spec = np.fft.fft(vals) / N
        mags = np.abs(spec)
        tail = float(mags[N // 4 : 3 * N // 4 + 1].max())
        if tail <= _TAIL_TOL * max(float(mags.max()), 1e-300) or N >= _PULLBACK_GRID_CAP:
            if N >= _PULLBACK_GRID_CAP and tail > _TAIL_TOL * float(mags.max()):
                warnings.warn(f"analysis tail {tail:.2e} at grid cap {N}", stacklevel=2)
            break
        N *= 2
    out = from_samples(GridSampling(vals.astype(complex)), meta=meta)
    sym = 0.5 * (out.coeffs + np.conj(out.coeffs[::-1]))
    return trim(WeightFunction(sym, meta=meta), 1e-14)


def moebius_pullback(a: WeightFunction, m: MoebiusMap) -> WeightFunction:
    """Pull a weight back along a disk automorphism: b = (a o psi) / |psi'|.

    Computed from the closed-form boundary speed of the automorphism, so no
    numerical differentiation enters.  Preserves the boundary length.
    """
    require_positive(a)

    def sampler(N):
        theta = TWO_PI * np.arange(N) / N
        avals = a.eval_at_points(m.boundary_points(theta))
        scale = 1.0 + float(np.max(np.abs(avals.real)))
        if float(np.max(np.abs(avals.imag))) > 1e-10 * scale:
            raise ValueError("pullback of a non-real weight is not supported")
        vals = avals.real / m.boundary_speed(theta)
        if vals.min() <= 0.0:
            raise NonPositiveWeight("pullback produced nonpositive samples")
        return vals

    meta = f"pullback(w={m.w:.6g}, alpha={m.alpha:.6g}, {m.orientation}; {a.meta or 'weight'})"
    return _adaptive_analysis(sampler, 8 * (a.M + 1), meta)


def weight_from_map(d: DomainMap) -> WeightFunction:
    """Boundary weight 1/|Phi'| of a planar domain given by its map derivative."""
    start = 8 * d.taylor.size
    length = None

    def sampler_with_length(N):
        nonlocal length
        mods = np.abs(d.boundary_values(N))
        if mods.min() <= 1e-12:
            raise VanishingDerivative("map derivative vanishes on the refined boundary grid")
        length = TWO_PI * float(np.mean(mods))
        return 1.0 / mods

    out = _adaptive_analysis(sampler_with_length, start, meta="")
    meta = f"domain({d.name or 'map'}; boundary_length={length:.12g})"
    return WeightFunction(out.coeffs, meta=meta)


# ---------------------------------------------------------------------------
# gallery

GALLERY_DOC = {
    "disk": "constant weight 1 (round disk)",
    "cosine(c,m)": "a = 1 + c*cos(m*theta), |c| < 1",
    "moebius(w,alpha)": "pullback of the disk weight along the automorphism with real w",
    "perturbed_disk(eps,m)": "boundary weight of z + eps*z^m",
}

_CALL_RE = re.compile(r"^\s*([a-zA-Z_]+)\s*(?:\(([^)]*)\))?\s*$")


def gallery(name: str, params: tuple = ()) -> WeightFunction:
    """Named example weights; ``name`` may embed arguments, e.g. ``cosine(0.5,2)``."""
    m = _CALL_RE.match(name)
    if not m:
        raise UnknownGallery(f"cannot parse gallery label {name!r}")
    label = m.group(1)
    if m.group(2) is not None:
        args = tuple(float(x) for x in m.group(2).split(",") if x.strip())
    else:
        args = tuple(float(x) for x in params)

    if label == "disk":
        return WeightFunction.constant(1.0, meta="disk")
    if label == "cosine":
        if len(args) != 2:
            raise UnknownGallery("cosine needs (c, m)")
        c, mm = args[0], int(round(args[1]))
        w = WeightFunction.from_modes({0: 1.0, mm: c / 2.0, -mm: c / 2.0},
                                      meta=f"cosine({c:g},{mm})")
        require_positive(w)
        return w
    if label == "moebius":
        if len(args) != 2:
            raise UnknownGallery("moebius needs (w, alpha)")
        return moebius_pullback(WeightFunction.constant(1.0, meta="disk"),
                                MoebiusMap(complex(args[0]), args[1]))
    if label == "perturbed_disk":
        if len(args) != 2:
            raise UnknownGallery("perturbed_disk needs (eps, m)")
        eps, mm = args[0], int(round(args[1]))
        if mm < 1:
            raise UnknownGallery("perturbed_disk order must be >= 1")
        taylor = np.zeros(mm, dtype=complex)
        taylor[0] = 1.0
        taylor[mm - 1] += eps * mm
        return weight_from_map(DomainMap(taylor, name=f"perturbed_disk({eps:g},{mm})"))
    raise UnknownGallery(f"no gallery entry named {label!r}")
