"""Shared numerical substrate.

Adaptive 1-D quadrature (Gauss-Kronrod 7/15 with interval bisection),
semi-infinite integrals via rational substitution, Gaussian cdf/pdf,
uniform sphere sampling, and counter-based random streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "QuadratureSpec",
    "Estimate",
    "RngStream",
    "DivergentIntegralError",
    "integrate_1d",
    "integrate_semi_infinite",
    "gauss_cdf",
    "gauss_pdf",
    "sphere_sample",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)


class DivergentIntegralError(ArithmeticError):
    """Raised when a semi-infinite integral shows growing partial sums."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Target tolerances for the adaptive quadrature engine."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 48
    truncation_radius: float = 1e8

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be nonnegative")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be positive")


@dataclass(frozen=True)
class Estimate:
    """A numeric value with an uncertainty descriptor and provenance."""

    value: float
    err: float
    kind: str  # "monte_carlo" | "quadrature" | "closed_form"
    converged: bool = True

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("err must be nonnegative")
        if self.kind not in ("monte_carlo", "quadrature", "closed_form"):
            raise ValueError(f"unknown estimate kind {self.kind!r}")
        if self.kind == "closed_form" and self.err != 0:
            raise ValueError("closed_form estimates carry zero error")


# Stream descriptors are immutable; a fresh numpy Generator is built per use so
# draw position never leaks between callers.  Philox is counter-based, which is
# what makes (seed, stream_id) splitting safe.

_GOLDEN64 = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class RngStream:
    seed: int = 0
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        """Derive a statistically independent substream."""
        mixed = (self.stream_id * _GOLDEN64 + index + 1) & 0xFFFFFFFFFFFFFFFF
        return RngStream(self.seed, mixed)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1].  The embedded Gauss-7 rule
# provides the error estimate for each interval.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 ascending nodes
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights aligned with the 15-node layout (zero at Kronrod-only nodes)
_WG15 = np.zeros(15)
_WG15[1:-1:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    y = np.asarray([f(float(xi)) for xi in x], dtype=float)
    if np.any(np.isnan(y)):
        bad = x[int(np.argmax(np.isnan(y)))]
        raise ValueError(f"integrand returned NaN at x={bad}")
    k = half * float(np.dot(_WK, y))
    g = half * float(np.dot(_WG15, y))
    # standard QUADPACK-style rescaled error estimate
    resabs = half * float(np.dot(_WK, np.abs(y)))
    err = abs(k - g)
    if resabs > 0 and err > 0:
        err = resabs * min(1.0, (200.0 * err / resabs) ** 1.5)
    return k, err


def integrate_1d(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """Adaptive quadrature of f over the finite interval [a, b]."""
    if not a < b:
        raise ValueError("require a < b")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integrate_1d needs finite endpoints")

    val, err = _gk15(f, a, b)
    intervals = [(a, b, val, err, 0)]
    total = val
    total_err = err
    for _ in range(20000):
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol:
            break
        # split the interval with the worst error
        worst = max(range(len(intervals)), key=lambda i: intervals[i][3])
        ia, ib, ival, ierr, depth = intervals.pop(worst)
        if depth >= spec.max_depth:
            intervals.append((ia, ib, ival, ierr, depth))
            return Estimate(total, max(total_err, 0.0), "quadrature",
                            converged=False)
        im = 0.5 * (ia + ib)
        lv, le = _gk15(f, ia, im)
        rv, re = _gk15(f, im, ib)
        total += lv + rv - ival
        total_err = max(total_err + le + re - ierr, 0.0)
        intervals.append((ia, im, lv, le, depth + 1))
        intervals.append((im, ib, rv, re, depth + 1))
    tol = max(spec.abs_tol, spec.rel_tol * abs(total))
    return Estimate(total, total_err, "quadrature", converged=total_err <= tol)


def integrate_semi_infinite(f, a: float = 0.0, spec: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """Integrate f over [a, inf).

    Uses the substitution s = a + t/(1-t) on (0, 1), evaluated decade by
    decade out to ``truncation_radius`` so the tail contribution is visible.
    Growing partial sums raise :class:`DivergentIntegralError`.
    """

    def g(t):
        s = a + t / (1.0 - t)
        return f(s) / (1.0 - t) ** 2

    # segment boundaries at s - a = 0, 1, 10, 100, ... mapped into t-space
    radii = [0.0, 1.0]
    while radii[-1] < spec.truncation_radius:
        radii.append(min(radii[-1] * 10.0, spec.truncation_radius))
    seg_spec = replace(spec, abs_tol=max(spec.abs_tol / len(radii), 1e-15))

    total = 0.0
    total_err = 0.0
    seg_values = []
    converged = True
    for lo, hi in zip(radii[:-1], radii[1:]):
        t_lo = lo / (1.0 + lo)
        t_hi = hi / (1.0 + hi)
        est = integrate_1d(g, t_lo, t_hi, seg_spec)
        seg_values.append(est.value)
        total += est.value
        total_err += est.err
        converged = converged and est.converged
        if abs(est.value) < 0.1 * spec.abs_tol and len(seg_values) >= 3:
            break

    # divergence: segment magnitudes not decaying while the running sum grows
    if len(seg_values) >= 4:
        tail = [abs(v) for v in seg_values[-3:]]
        if tail[2] >= tail[0] > 10.0 * spec.abs_tol and abs(total) > abs(seg_values[0]):
            raise DivergentIntegralError("partial sums keep growing on [a, inf)")
    # truncation-tail allowance from the last segment magnitude
    if seg_values:
        total_err += abs(seg_values[-1])
    tol = max(spec.abs_tol, spec.rel_tol * abs(total))
    return Estimate(total, total_err, "quadrature", converged=converged and total_err <= max(tol, 10 * spec.abs_tol))


def gauss_cdf(x: float) -> float:
    """Standard normal distribution function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def gauss_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / SQRT_2PI


def sphere_sample(d: int, count: int, rng: RngStream) -> np.ndarray:
    """Uniform draws on the unit sphere S^{d-1}, shape (count, d)."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if count < 1:
        raise ValueError("count must be at least 1")
    gen = rng.generator()
    z = gen.standard_normal((count, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    # a zero vector has probability zero; resample defensively anyway
    bad = norms[:, 0] == 0.0
    while np.any(bad):
        z[bad] = gen.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        bad = norms[:, 0] == 0.0
    return z / norms
