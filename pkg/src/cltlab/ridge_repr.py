"""Integral representations over half-space-level-set functions.

ReLU/ridge reconstruction from Fourier data, the general-activation
variant, window activations built from bounded sigmoids, and the
expectation-gap bound assembled from univariate ReLU deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .numerics import Estimate, QuadratureSpec, RngStream, integrate_1d
from .dist_zoo import MultivariateModel, UnivariateModel, project
from .edgeworth import BoundResult

__all__ = [
    "FourierFunction",
    "ActivationModel",
    "RidgeDeltaBound",
    "gaussian_fourier_function",
    "mixture_fourier_function",
    "relu_complex_identity",
    "barron_condition",
    "reconstruct_ridge",
    "reconstruct_activation",
    "delta_bound_ridge",
    "funahashi_window",
    "make_activation",
]


@dataclass(frozen=True)
class GaussianProposal:
    """Importance-sampling proposal proportional to a Gaussian |f_check|."""

    dimension: int
    inv_width: float  # |f_check| proportional to exp(-inv_width^2 |w|^2 / 2)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        return gen.standard_normal((size, self.dimension)) / self.inv_width


@dataclass(frozen=True)
class FourierFunction:
    """A target f with analytic Fourier magnitude and phase.

    Convention: f(x) = integral of e^{i<w,x>} f_check(w) dw, with
    f_check(w) = fourier_magnitude(w) e^{i phase(w)}.
    """

    name: str
    dimension: int
    f: Callable[[np.ndarray], np.ndarray]
    fourier_magnitude: Callable[[np.ndarray], np.ndarray]
    phase: Callable[[np.ndarray], np.ndarray]
    f0: float
    grad0: np.ndarray
    barron_weight: Optional[GaussianProposal] = None
    fourier_mass: float = math.nan  # integral of |f_check|
    omega_radius: float = 12.0  # |f_check| negligible beyond this box


@dataclass(frozen=True)
class ActivationModel:
    """An integrable activation h with one usable frequency a."""

    h: Callable[[np.ndarray], np.ndarray]
    h_fourier: Callable[[float], complex]
    a: float
    c_h: float
    u_radius: float = 40.0

    @property
    def h_fourier_mag_a(self) -> float:
        return abs(self.h_fourier(self.a))


@dataclass(frozen=True)
class RidgeDeltaBound:
    value: float
    flagged_directions: tuple = ()

    @property
    def vacuous(self) -> bool:
        return len(self.flagged_directions) > 0


# ---------------------------------------------------------------------------
# test-function library (analytic Fourier data keeps phase exact)

def gaussian_fourier_function(d: int, width: float = 1.0,
                              amplitude: float = 1.0) -> FourierFunction:
    """f(x) = amplitude * exp(-|x|^2 / (2 width^2))."""
    if d < 1 or width <= 0:
        raise ValueError("need d >= 1 and positive width")
    s = width
    coef = amplitude * s ** d / (2.0 * math.pi) ** (d / 2.0)

    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return amplitude * np.exp(-0.5 * np.sum(x * x, axis=-1) / s ** 2)

    def mag(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return abs(coef) * np.exp(-0.5 * s ** 2 * np.sum(w * w, axis=-1))

    ph = 0.0 if amplitude >= 0 else math.pi

    return FourierFunction(
        name=f"gauss_bump:d={d},s={s:g},A={amplitude:g}",
        dimension=d,
        f=f,
        fourier_magnitude=mag,
        phase=lambda w: np.full(np.atleast_2d(w).shape[0], ph),
        f0=amplitude,
        grad0=np.zeros(d),
        barron_weight=GaussianProposal(d, s),
        fourier_mass=abs(amplitude),
        omega_radius=max(12.0, 12.0 / s),
    )


def mixture_fourier_function(parts: Sequence[tuple]) -> FourierFunction:
    """Finite signed mixture sum w_i f_i of library functions with real
    Fourier transforms (phase 0 or pi), combined pointwise."""
    parts = [(float(w), ff) for w, ff in parts]
    if not parts:
        raise ValueError("mixture needs at least one component")
    d = parts[0][1].dimension
    if any(ff.dimension != d for _, ff in parts):
        raise ValueError("mixture components must share a dimension")

    def transform(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        out = np.zeros(w.shape[0])
        for wt, ff in parts:
            out += wt * ff.fourier_magnitude(w) * np.cos(ff.phase(w))
        return out

    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return sum(wt * ff.f(x) for wt, ff in parts)

    heaviest = max(parts, key=lambda p: abs(p[0]) * p[1].fourier_mass)
    return FourierFunction(
        name="mixture(" + ",".join(f"{w:g}*{ff.name}" for w, ff in parts) + ")",
        dimension=d,
        f=f,
        fourier_magnitude=lambda w: np.abs(transform(w)),
        phase=lambda w: np.where(transform(w) >= 0.0, 0.0, math.pi),
        f0=float(sum(wt * ff.f0 for wt, ff in parts)),
        grad0=sum(wt * ff.grad0 for wt, ff in parts),
        barron_weight=heaviest[1].barron_weight,
        fourier_mass=float(sum(abs(wt) * ff.fourier_mass for wt, ff in parts)),
        omega_radius=max(ff.omega_radius for _, ff in parts),
    )


# ---------------------------------------------------------------------------
# operations

def relu_complex_identity(z: float, spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """-int_0^inf [(z-u)_+ e^{iu} + (-z-u)_+ e^{-iu}] du, by quadrature.

    Contract: equals e^{iz} - iz - 1.  The integrand is supported on
    [0, |z|], so a finite quadrature suffices.
    """
    if z == 0.0:
        return 0.0 + 0.0j
    hi = abs(z)
    if z > 0:
        re = integrate_1d(lambda u: (z - u) * math.cos(u), 0.0, hi, spec).value
        im = integrate_1d(lambda u: (z - u) * math.sin(u), 0.0, hi, spec).value
    else:
        re = integrate_1d(lambda u: (-z - u) * math.cos(u), 0.0, hi, spec).value
        im = -integrate_1d(lambda u: (-z - u) * math.sin(u), 0.0, hi, spec).value
    return complex(-re, -im)


def _tensor_grid(d: int, radius: float, nodes_per_dim: int):
    x, w = leggauss(nodes_per_dim)
    x = x * radius
    w = w * radius
    if d == 1:
        return x[:, None], w
    grids = np.meshgrid(*([x] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.ones(1)
    for _ in range(d):
        wts = np.outer(wts, w).ravel()
    return pts, wts


def _min_weight(z: np.ndarray) -> np.ndarray:
    az = np.abs(z)
    return np.minimum(2.0 * az, 0.5 * az * az)


def barron_condition(fm: FourierFunction, x: np.ndarray,
                     spec: QuadratureSpec = QuadratureSpec(),
                     rng: RngStream = RngStream(0, 901)) -> Estimate:
    """The Fourier-weighted integral of min{2|<w,x>|, <w,x>^2/2}.

    Tensor quadrature for d <= 3, self-normalized importance sampling for
    higher dimension.  Divergence across refinement levels raises.
    """
    x = np.asarray(x, dtype=float)
    d = fm.dimension
    if d <= 3:
        vals = []
        for nn in (48, 96):
            pts, wts = _tensor_grid(d, fm.omega_radius, nn)
            z = pts @ x
            vals.append(float(np.dot(wts, _min_weight(z) * fm.fourier_magnitude(pts))))
        err = abs(vals[1] - vals[0])
        if abs(vals[1]) > 1.0 and err > 0.5 * abs(vals[1]):
            raise ValueError(f"representation hypothesis fails at x={x}")
        return Estimate(vals[1], err, "quadrature")
    if fm.barron_weight is None:
        raise ValueError("no importance proposal available for d > 3")
    gen = rng.generator()
    w = fm.barron_weight.sample(gen, 200_000)
    # proposal density proportional to |f_check| makes the ratio flat
    ratio = _min_weight(w @ x)
    val = float(np.mean(ratio)) * fm.fourier_mass
    se = float(np.std(ratio, ddof=1)) / math.sqrt(len(ratio)) * fm.fourier_mass
    if not math.isfinite(val):
        raise ValueError(f"representation hypothesis fails at x={x}")
    return Estimate(val, se, "monte_carlo")


def _relu_u_integral(z: np.ndarray, b: np.ndarray, n_nodes: int = 48):
    """sum over eps in {-1,1} of int_0^inf (eps z - u)_+ cos(u + eps b) du.

    The sum (not the average) is what the complex identity produces once
    the omega integral runs over all of R^d.
    """
    xg, wg = leggauss(n_nodes)
    t01 = 0.5 * (xg + 1.0)  # (n_nodes,)
    w01 = 0.5 * wg

    az = np.abs(z)  # support length for each sign branch
    u = az[:, None] * t01[None, :]
    du = az  # scale of the weights
    # eps = +1 branch: nonzero for z > 0
    pos = np.clip(z, 0.0, None)
    ipos = np.where(
        z[:, None] > 0,
        (pos[:, None] - u) * np.cos(u + b[:, None]),
        0.0,
    ) @ w01 * du
    # eps = -1 branch: nonzero for z < 0
    neg = np.clip(-z, 0.0, None)
    ineg = np.where(
        z[:, None] < 0,
        (neg[:, None] - u) * np.cos(u - b[:, None]),
        0.0,
    ) @ w01 * du
    return ipos + ineg


def reconstruct_ridge(fm: FourierFunction, x: np.ndarray,
                      spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Evaluate f(x) from its Fourier data through the ReLU representation."""
    x = np.asarray(x, dtype=float)
    d = fm.dimension
    if x.shape != (d,):
        raise ValueError("x dimension mismatch")
    if d > 3:
        raise ValueError("tensor quadrature limited to d <= 3")
    nn = 200 if d == 1 else (110 if d == 2 else 48)
    pts, wts = _tensor_grid(d, fm.omega_radius, nn)
    z = pts @ x
    b = fm.phase(pts)
    mag = fm.fourier_magnitude(pts)
    # oscillation in u grows with |z|; bump the node count when needed
    n_nodes = int(max(48, 1.6 * float(np.max(np.abs(z))) if len(z) else 48))
    inner = _relu_u_integral(z, b, n_nodes=min(n_nodes, 220))
    integral = float(np.dot(wts, mag * inner))
    return fm.f0 + float(fm.grad0 @ x) - integral


def reconstruct_activation(fm: FourierFunction, act: ActivationModel,
                           x: np.ndarray,
                           spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Evaluate f(x) through the integrable-activation representation."""
    x = np.asarray(x, dtype=float)
    d = fm.dimension
    if x.shape != (d,):
        raise ValueError("x dimension mismatch")
    if d > 3:
        raise ValueError("tensor quadrature limited to d <= 3")
    mag_a = act.h_fourier_mag_a
    if mag_a < 1e-8:
        raise ValueError("ill-conditioned frequency: |h_fourier(a)| below 1e-8")

    nn = 200 if d == 1 else (96 if d == 2 else 40)
    pts, wts = _tensor_grid(d, fm.omega_radius, nn)
    z = pts @ x
    b = fm.phase(pts)
    mag = fm.fourier_magnitude(pts)

    centers = -z / act.a
    radius = act.u_radius
    span = float(np.max(np.abs(centers))) + radius if len(centers) else radius
    n_u = int(min(1400, max(256, 1.8 * abs(act.a) * radius + 1.2 * abs(act.a) * span)))
    xg, wg = leggauss(n_u)

    total = 0.0
    chunk = max(1, 4_000_000 // n_u)
    for start in range(0, len(z), chunk):
        zs = slice(start, start + chunk)
        u = centers[zs, None] + radius * xg[None, :]
        hv = act.h(z[zs, None] / act.a + u)
        cosv = np.cos(act.a * u + act.c_h - b[zs, None])
        inner = (hv * cosv) @ wg * radius
        total += float(np.dot(wts[zs], mag[zs] * inner))
    return total / (2.0 * math.pi * mag_a)


def delta_bound_ridge(fm: FourierFunction,
                      univariate_delta: Callable,
                      model: MultivariateModel,
                      n: int,
                      spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-8),
                      rng: RngStream = RngStream(0, 313),
                      n_omega: int = 64) -> RidgeDeltaBound:
    """Assemble a bound on Delta_f from a per-direction univariate ReLU bound.

    Omega is importance-sampled proportional to |f_check|; for each sampled
    frequency the supplied bound (model, n, t) -> bound-on-|Delta_ReLU(t)| is
    integrated over t >= 0 for both signs of the projection and scaled back
    to the u variable.
    """
    if fm.dimension != model.dimension:
        raise ValueError("dimension mismatch between f and the model")
    if fm.barron_weight is None:
        raise ValueError("no importance proposal on the Fourier side")
    gen = rng.generator()
    omegas = fm.barron_weight.sample(gen, n_omega)
    flagged = []
    acc = 0.0
    for j, w in enumerate(omegas):
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            continue
        a = w / nw
        um = project(model, a)
        um_neg = um.negated()
        s_a = um.moments.sigma
        scale = nw * s_a

        def per_t(t):
            vals = []
            for mdl in (um, um_neg):
                v = univariate_delta(mdl, n, t)
                if isinstance(v, BoundResult):
                    if v.vacuous and j not in flagged:
                        flagged.append(j)
                    v = v.value
                vals.append(v)
            return sum(vals)

        # bound callbacks decay like kappa(t) ~ t^-3; a modest grid suffices
        t_grid = np.linspace(0.0, 40.0, 401)
        vals = np.array([per_t(float(t)) for t in t_grid])
        integral = float(np.trapezoid(vals, t_grid))
        # polynomial tail allowance beyond the grid
        integral += vals[-1] * 40.0 / 2.0
        acc += scale ** 2 * integral
    value = fm.fourier_mass * acc / n_omega
    return RidgeDeltaBound(value=value, flagged_directions=tuple(flagged))


def make_activation(h: Callable, a: float, u_radius: float = 40.0,
                    spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-12)) -> ActivationModel:
    """Wrap an integrable h, computing its Fourier transform by quadrature."""

    def h_scalar(t: float) -> float:
        return float(np.asarray(h(np.asarray([t], dtype=float)))[0])

    # numeric integrability check
    t_cut = _support_radius(h_scalar)
    total = integrate_1d(lambda t: abs(h_scalar(t)), -t_cut, t_cut, spec)
    if not math.isfinite(total.value):
        raise ValueError("activation is not integrable")

    def h_fourier(freq: float) -> complex:
        re = integrate_1d(lambda t: h_scalar(t) * math.cos(freq * t),
                          -t_cut, t_cut, spec).value
        im = integrate_1d(lambda t: -h_scalar(t) * math.sin(freq * t),
                          -t_cut, t_cut, spec).value
        return complex(re, im) / (2.0 * math.pi)

    c_h = float(np.angle(h_fourier(a)))
    return ActivationModel(h=h, h_fourier=h_fourier, a=a, c_h=c_h,
                           u_radius=min(u_radius, t_cut + 10.0))


def _support_radius(h_scalar, start: float = 25.0, cap: float = 3200.0) -> float:
    t = start
    while t < cap:
        probes = [abs(h_scalar(s)) for s in (t, t * 1.07, t * 1.31, -t, -t * 1.07)]
        if max(probes) < 1e-13:
            return t
        t *= 2.0
    return cap


def funahashi_window(sigmoid: Callable[[float], float], alpha: float,
                     probe_a: float) -> ActivationModel:
    """Difference window h(t) = sigmoid(t + alpha) - sigmoid(t - alpha).

    A bounded monotone sigmoid makes h integrable; the returned activation
    carries a frequency a with h_fourier(a) != 0, scanning if the probe
    frequency lands on a zero.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def h(t):
        t = np.asarray(t, dtype=float)
        sig = np.vectorize(sigmoid, otypes=[float])
        return sig(t + alpha) - sig(t - alpha)

    act = make_activation(h, probe_a)
    if act.h_fourier_mag_a > 1e-8:
        return act
    for a in np.arange(0.05, 5.0, 0.05):
        if abs(act.h_fourier(float(a))) > 1e-8:
            return ActivationModel(h=act.h, h_fourier=act.h_fourier, a=float(a),
                                   c_h=float(np.angle(act.h_fourier(float(a)))),
                                   u_radius=act.u_radius)
    raise ValueError("no frequency with |h_fourier| > 1e-8 found in (0, 5)")
