"""Catalog of univariate and multivariate laws.

Every model carries exact moments where analytic, a vectorized sampler,
a characteristic function, and (for multivariate laws) covariance access
plus directional projection down to a univariate model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .numerics import RngStream, integrate_1d, QuadratureSpec

__all__ = [
    "MomentSet",
    "UnivariateModel",
    "MultivariateModel",
    "get_model",
    "get_multivariate_model",
    "list_models",
    "moments",
    "char_fn",
    "sample_sum",
    "sample_sums",
    "project",
    "l4_l2_constant",
]


@dataclass(frozen=True)
class MomentSet:
    """sigma2 = E[W^2], mu3 = E[W^3], beta3 = E|W|^3, beta4 = E|W|^4.

    beta4 is None when the fourth moment does not exist; bound paths that
    need it must refuse.
    """

    sigma2: float
    mu3: float
    beta3: float
    beta4: Optional[float]

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.beta3 < self.sigma2 ** 1.5 - 1e-12:
            raise ValueError("Lyapunov violated: beta3 < sigma^3")
        if self.beta4 is not None and self.beta4 < self.sigma2 ** 2 - 1e-12:
            raise ValueError("beta4 < sigma^4 impossible")
        if abs(self.mu3) > self.beta3 + 1e-12:
            raise ValueError("|mu3| cannot exceed beta3")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class UnivariateModel:
    """A mean-zero scalar law with sampler, characteristic function, moments."""

    name: str
    moments: MomentSet
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    char_fn: Callable[[float], complex]
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support: tuple = (-math.inf, math.inf)
    lattice: bool = False
    # optional exact sampler for the *raw* sum of n copies (before scaling)
    sum_sampler: Optional[Callable[[np.random.Generator, int, int], np.ndarray]] = None

    def negated(self) -> "UnivariateModel":
        """The law of -W (flips the third moment, conjugates v)."""
        m = self.moments
        return UnivariateModel(
            name=f"neg({self.name})",
            moments=MomentSet(m.sigma2, -m.mu3, m.beta3, m.beta4),
            sampler=lambda gen, size: -self.sampler(gen, size),
            char_fn=lambda b: np.conj(self.char_fn(b)),
            density=(None if self.density is None
                     else (lambda x: self.density(-np.asarray(x)))),
            support=(-self.support[1], -self.support[0]),
            lattice=self.lattice,
            sum_sampler=(None if self.sum_sampler is None
                         else (lambda gen, n, size: -self.sum_sampler(gen, n, size))),
        )


@dataclass(frozen=True)
class MultivariateModel:
    """A d-dimensional mean-zero law with covariance access."""

    name: str
    dimension: int
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    covariance: np.ndarray
    beta3_norm: float  # E ||X||_2^3
    coord_models: Optional[Sequence[UnivariateModel]] = None  # independent coords
    transform: Optional[np.ndarray] = None  # X = transform @ U for coord models

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (self.dimension, self.dimension):
            raise ValueError("covariance shape mismatch")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")

    @property
    def eigenvalues(self) -> np.ndarray:
        vals = np.linalg.eigvalsh(self.covariance)[::-1]
        if vals[-1] <= 0:
            raise ValueError("covariance must be positive definite")
        return vals

    @property
    def trace_sigma2(self) -> float:
        return float(np.trace(self.covariance))


# ---------------------------------------------------------------------------
# univariate catalog

def _gauss_model() -> UnivariateModel:
    m = MomentSet(1.0, 0.0, 2.0 * math.sqrt(2.0 / math.pi), 3.0)
    return UnivariateModel(
        name="gauss",
        moments=m,
        sampler=lambda gen, size: gen.standard_normal(size),
        char_fn=lambda b: complex(math.exp(-0.5 * b * b), 0.0),
        density=lambda x: np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2 * math.pi),
        sum_sampler=lambda gen, n, size: math.sqrt(n) * gen.standard_normal(size),
    )


def _exp_centered_model() -> UnivariateModel:
    # X = E - 1 with E ~ Exp(1): sigma2=1, mu3=2, beta3=12/e-2, beta4=9
    m = MomentSet(1.0, 2.0, 12.0 / math.e - 2.0, 9.0)

    def density(x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= -1.0, np.exp(-np.clip(x + 1.0, 0.0, None)), 0.0)
        return out

    return UnivariateModel(
        name="exp_centered",
        moments=m,
        sampler=lambda gen, size: gen.standard_exponential(size) - 1.0,
        char_fn=lambda b: np.exp(-1j * b) / (1.0 - 1j * b),
        density=density,
        support=(-1.0, math.inf),
        # sum of n iid Exp(1) is Gamma(n, 1)
        sum_sampler=lambda gen, n, size: gen.standard_gamma(float(n), size) - n,
    )


def _uniform_sym_model() -> UnivariateModel:
    # U[-sqrt3, sqrt3]: sigma2=1, beta3=9/(4 sqrt3), beta4=9/5
    s3 = math.sqrt(3.0)
    m = MomentSet(1.0, 0.0, 9.0 / (4.0 * s3), 9.0 / 5.0)

    def cf(b):
        z = s3 * b
        if abs(z) < 1e-8:
            return complex(1.0 - z * z / 6.0, 0.0)
        return complex(math.sin(z) / z, 0.0)

    return UnivariateModel(
        name="uniform_sym",
        moments=m,
        sampler=lambda gen, size: gen.uniform(-s3, s3, size),
        char_fn=cf,
        density=lambda x: np.where(np.abs(np.asarray(x)) <= s3, 1.0 / (2 * s3), 0.0),
        support=(-s3, s3),
    )


def _bernoulli_model(p: float) -> UnivariateModel:
    if not 0.0 < p < 1.0:
        raise ValueError("bernoulli p must lie in (0, 1)")
    q = 1.0 - p
    s2 = p * q
    # central moments of Bernoulli(p): mu3 = pq(q - p), E|X|^3 = pq(q^2 + p^2),
    # E X^4 = pq(p^3 + q^3)
    m = MomentSet(s2, p * q * (q - p), p * q * (q * q + p * p), p * q * (p ** 3 + q ** 3))

    return UnivariateModel(
        name=f"bernoulli:p={p:g}",
        moments=m,
        sampler=lambda gen, size: (gen.random(size) < p).astype(float) - p,
        char_fn=lambda b: q * np.exp(-1j * b * p) + p * np.exp(1j * b * q),
        support=(-p, q),
        lattice=True,
        sum_sampler=lambda gen, n, size: gen.binomial(n, p, size).astype(float) - n * p,
    )


# ---------------------------------------------------------------------------
# multivariate catalog

def _mc_beta3_norm(sampler, d: int, draws: int = 1_000_000) -> float:
    gen = RngStream(987654321, 17).generator()
    x = sampler(gen, draws)
    return float(np.mean(np.linalg.norm(x, axis=1) ** 3))


def _gauss_iso_model(d: int) -> MultivariateModel:
    if d < 1:
        raise ValueError("dimension must be positive")
    # E||Z||^3 = 2^{3/2} Gamma((d+3)/2) / Gamma(d/2)
    b3 = 2.0 ** 1.5 * math.exp(math.lgamma((d + 3) / 2.0) - math.lgamma(d / 2.0))
    return MultivariateModel(
        name=f"gauss_iso:d={d}",
        dimension=d,
        sampler=lambda gen, size: gen.standard_normal((size, d)),
        covariance=np.eye(d),
        beta3_norm=b3,
        coord_models=[_gauss_model()] * d,
        transform=np.eye(d),
    )


def _exp_prod_model(d: int) -> MultivariateModel:
    if d < 1:
        raise ValueError("dimension must be positive")

    def sampler(gen, size):
        return gen.standard_exponential((size, d)) - 1.0

    return MultivariateModel(
        name=f"exp_prod:d={d}",
        dimension=d,
        sampler=sampler,
        covariance=np.eye(d),
        beta3_norm=_mc_beta3_norm(sampler, d),
        coord_models=[_exp_centered_model()] * d,
        transform=np.eye(d),
    )


def _box_aniso_model(d: int) -> MultivariateModel:
    """Uniform on a symmetric box, diagonally scaled: log-concave, anisotropic."""
    if d < 1:
        raise ValueError("dimension must be positive")
    scales = 1.0 / np.sqrt(np.arange(1, d + 1, dtype=float))
    s3 = math.sqrt(3.0)

    def sampler(gen, size):
        return gen.uniform(-s3, s3, (size, d)) * scales

    return MultivariateModel(
        name=f"box_aniso:d={d}",
        dimension=d,
        sampler=sampler,
        covariance=np.diag(scales ** 2),
        beta3_norm=_mc_beta3_norm(sampler, d),
        coord_models=[_uniform_sym_model()] * d,
        transform=np.diag(scales),
    )


_UNIVARIATE = {
    "gauss": _gauss_model,
    "exp_centered": _exp_centered_model,
    "uniform_sym": _uniform_sym_model,
}
_MULTIVARIATE = {
    "gauss_iso": _gauss_iso_model,
    "exp_prod": _exp_prod_model,
    "box_aniso": _box_aniso_model,
}


def list_models() -> list:
    names = sorted(_UNIVARIATE) + ["bernoulli:p=<p>"]
    names += [f"{k}:d=<d>" for k in sorted(_MULTIVARIATE)]
    return names


def _parse_params(spec: str) -> dict:
    out = {}
    for part in spec.split(","):
        if "=" not in part:
            raise KeyError(f"malformed model parameter {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def get_model(name: str) -> UnivariateModel:
    """Look up a univariate model by CLI-style name, e.g. 'bernoulli:p=0.3'."""
    base, _, params = name.partition(":")
    if base == "bernoulli":
        p = float(_parse_params(params)["p"]) if params else 0.5
        return _bernoulli_model(p)
    if base in _UNIVARIATE:
        return _UNIVARIATE[base]()
    raise KeyError(f"unknown univariate model {name!r}")


def get_multivariate_model(name: str) -> MultivariateModel:
    """Look up a multivariate model, e.g. 'gauss_iso:d=5'."""
    base, _, params = name.partition(":")
    if base in _MULTIVARIATE:
        d = int(_parse_params(params)["d"]) if params else 2
        return _MULTIVARIATE[base](d)
    raise KeyError(f"unknown multivariate model {name!r}")


# ---------------------------------------------------------------------------
# operations

def moments(model: UnivariateModel) -> MomentSet:
    return model.moments


def char_fn(model: UnivariateModel, b: float) -> complex:
    return complex(model.char_fn(b))


def sample_sums(model: UnivariateModel, n: int, reps: int, rng: RngStream) -> np.ndarray:
    """reps realizations of the standardized sum (n sigma^2)^{-1/2} sum W_i."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    gen = rng.generator()
    scale = 1.0 / math.sqrt(n * model.moments.sigma2)
    if model.sum_sampler is not None:
        return scale * model.sum_sampler(gen, n, reps)
    # chunked summation keeps memory bounded for large n * reps
    out = np.zeros(reps)
    chunk = max(1, int(2e7) // n)
    for start in range(0, reps, chunk):
        stop = min(reps, start + chunk)
        draws = model.sampler(gen, (stop - start) * n).reshape(stop - start, n)
        out[start:stop] = draws.sum(axis=1)
    return scale * out


def sample_sum(model: UnivariateModel, n: int, rng: RngStream) -> float:
    """One realization of the standardized sum."""
    return float(sample_sums(model, n, 1, rng)[0])


def _projected_beta3_mc(mv: MultivariateModel, a: np.ndarray, draws: int = 400_000) -> float:
    gen = RngStream(192837465, 29).generator()
    x = mv.sampler(gen, draws) @ a
    return float(np.mean(np.abs(x) ** 3))


def project(mv: MultivariateModel, a: np.ndarray) -> UnivariateModel:
    """The law of <a, X> for a unit vector a.

    Variance is exact (a' Sigma a); third and fourth moments are analytic for
    independent-coordinate models and MC-backed otherwise.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (mv.dimension,):
        raise ValueError("direction dimension mismatch")
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise ValueError("direction must be a unit vector")

    sigma2 = float(a @ mv.covariance @ a)
    if sigma2 <= 0:
        raise ValueError("degenerate direction: zero variance")

    if mv.coord_models is not None and mv.transform is not None:
        # X = T u with independent coordinates u_i: <a, X> = sum_i c_i u_i
        c = mv.transform.T @ a
        coords = mv.coord_models
        mu3 = float(sum(ci ** 3 * cm.moments.mu3 for ci, cm in zip(c, coords)))
        var = float(sum(ci ** 2 * cm.moments.sigma2 for ci, cm in zip(c, coords)))
        # fourth cumulant adds across independent summands
        if all(cm.moments.beta4 is not None for cm in coords):
            k4 = float(sum(ci ** 4 * (cm.moments.beta4 - 3 * cm.moments.sigma2 ** 2)
                           for ci, cm in zip(c, coords)))
            beta4 = k4 + 3.0 * var ** 2
        else:
            beta4 = None
        lattice = all(cm.lattice for cm in coords)

        def cf(b):
            out = complex(1.0, 0.0)
            for ci, cm in zip(c, coords):
                out *= complex(cm.char_fn(ci * b))
            return out
    else:
        mu3 = None
        beta4 = None
        lattice = False
        cf = None

    def sampler(gen, size):
        # chunked matvec projection
        if np.isscalar(size):
            return mv.sampler(gen, size) @ a
        raise ValueError("projection sampler takes a scalar size")

    beta3 = _projected_beta3_mc(mv, a)
    if mu3 is None:
        gen = RngStream(192837465, 31).generator()
        x = mv.sampler(gen, 400_000) @ a
        mu3 = float(np.mean(x ** 3))
        beta4 = float(np.mean(x ** 4))

    mset = MomentSet(sigma2, float(np.clip(mu3, -beta3, beta3)), max(beta3, sigma2 ** 1.5), beta4)
    if cf is None:
        cf = lambda b: complex(np.exp(-0.5 * sigma2 * b * b))  # placeholder, unused

    return UnivariateModel(
        name=f"{mv.name}|proj",
        moments=mset,
        sampler=sampler,
        char_fn=cf,
        lattice=lattice,
    )


def l4_l2_constant(mv: MultivariateModel, directions: Sequence[np.ndarray]) -> float:
    """max over directions of E<a,X>^4 / (E<a,X>^2)^2."""
    directions = list(directions)
    if not directions:
        raise ValueError("need at least one direction")
    best = 0.0
    for a in directions:
        um = project(mv, np.asarray(a, dtype=float))
        m = um.moments
        if m.beta4 is None:
            raise ValueError("fourth moment absent along a direction")
        best = max(best, m.beta4 / m.sigma2 ** 2)
    return best
