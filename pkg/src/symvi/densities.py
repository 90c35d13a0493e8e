"""Target densities and location families.

A location family is a standardized, even-symmetric base density ``q0`` moved
by a location ``nu`` and a fixed positive definite scale matrix ``S``::

    q_nu(x) = q0(S^{-1/2} (x - nu)) |S|^{-1/2}

Constructors take the distribution's own parameter (Gaussian variance,
Laplace scale ``b``, Student-t / Cauchy scale) and record it next to ``S``,
so ``gaussian_family(4.0)`` and ``laplace_family(4.0)`` mean N(nu, var=4)
and Laplace(nu, b=4) respectively.

Targets are even symmetric about a known mean. The shipped ones are
piecewise-uniform mixtures on ``R`` (with an exact interval description of the
support), Gaussians, and a symmetric Gaussian mixture in the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .errors import DimensionMismatch

__all__ = [
    "BaseDensity",
    "Kind",
    "LocationFamily",
    "LogConcavity",
    "ScaleMatrix",
    "SupportSpec",
    "TargetDensity",
    "UniformMixture",
    "GaussianTarget",
    "GaussianMixtureTarget",
    "cauchy_family",
    "family_pdf",
    "gaussian_family",
    "gaussian_target",
    "is_even_symmetric",
    "laplace_family",
    "make_bimodal_2d",
    "make_target_p1",
    "make_target_p2",
    "student_t_family",
    "uniform_target",
]

LOG_2PI = math.log(2.0 * math.pi)


# --------------------------------------------------------------------------- base densities


class Kind(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    STUDENT_T = "student_t"
    CAUCHY = "cauchy"


@dataclass(frozen=True)
class BaseDensity:
    """Standardized base density ``q0`` on ``R^dim``, even symmetric about 0.

    In more than one dimension the Gaussian and Student-t/Cauchy kinds are the
    spherical multivariate versions; the Laplace kind is the product of
    independent unit Laplace marginals.
    """

    kind: Kind
    df: float | None = None
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.STUDENT_T:
            if self.df is None or not self.df > 0:
                raise ValueError("Student-t base needs positive degrees of freedom")
        elif self.kind is Kind.CAUCHY:
            object.__setattr__(self, "df", 1.0)
        elif self.df is not None:
            raise ValueError(f"{self.kind.value} base takes no degrees of freedom")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @classmethod
    def gaussian(cls, dim: int = 1) -> "BaseDensity":
        return cls(Kind.GAUSSIAN, dim=dim)

    @classmethod
    def laplace(cls, dim: int = 1) -> "BaseDensity":
        return cls(Kind.LAPLACE, dim=dim)

    @classmethod
    def student_t(cls, df: float, dim: int = 1) -> "BaseDensity":
        return cls(Kind.STUDENT_T, df=float(df), dim=dim)

    @classmethod
    def cauchy(cls, dim: int = 1) -> "BaseDensity":
        return cls(Kind.CAUCHY, dim=dim)

    @property
    def heavy_tailed(self) -> bool:
        return self.kind in (Kind.STUDENT_T, Kind.CAUCHY)

    @property
    def label(self) -> str:
        if self.kind is Kind.STUDENT_T:
            return f"student_t(df={self.df:g})"
        return self.kind.value

    def _sq_norm(self, z):
        z = np.asarray(z, dtype=float)
        if self.dim == 1:
            return z * z
        return np.sum(z * z, axis=-1)

    def logpdf(self, z) -> np.ndarray:
        """Log density at ``z`` (shape ``(...,)`` if dim == 1, else ``(..., dim)``)."""
        d = self.dim
        if self.kind is Kind.GAUSSIAN:
            return -0.5 * self._sq_norm(z) - 0.5 * d * LOG_2PI
        if self.kind is Kind.LAPLACE:
            z = np.asarray(z, dtype=float)
            l1 = np.abs(z) if d == 1 else np.sum(np.abs(z), axis=-1)
            return -l1 - d * math.log(2.0)
        nu = float(self.df)
        const = (
            math.lgamma(0.5 * (nu + d))
            - math.lgamma(0.5 * nu)
            - 0.5 * d * math.log(nu * math.pi)
        )
        return const - 0.5 * (nu + d) * np.log1p(self._sq_norm(z) / nu)

    def pdf(self, z) -> np.ndarray:
        return np.exp(self.logpdf(z))


# --------------------------------------------------------------------------- scale matrices


@dataclass(frozen=True, eq=False)
class ScaleMatrix:
    """Symmetric positive definite scale matrix with its derived roots.

    Attributes
    ----------
    matrix : ndarray, shape (d, d)
    inv_sqrt : ndarray
        ``S^{-1/2}``, the symmetric inverse square root.
    inv : ndarray
        ``S^{-1}``.
    det_inv_sqrt : float
        ``|S|^{-1/2}``.
    """

    matrix: np.ndarray
    inv_sqrt: np.ndarray = field(init=False, repr=False)
    inv: np.ndarray = field(init=False, repr=False)
    det_inv_sqrt: float = field(init=False, repr=False)

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("scale matrix must be square")
        if not np.allclose(S, S.T, rtol=0, atol=1e-14 * max(1.0, np.abs(S).max())):
            raise ValueError("scale matrix must be symmetric")
        S = 0.5 * (S + S.T)
        lam, V = np.linalg.eigh(S)
        if not np.all(lam > 0):
            raise ValueError(f"scale matrix must be positive definite (eigenvalues {lam})")
        S.setflags(write=False)
        inv_sqrt = (V / np.sqrt(lam)) @ V.T
        inv = (V / lam) @ V.T
        inv_sqrt.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "matrix", S)
        object.__setattr__(self, "inv_sqrt", inv_sqrt)
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "det_inv_sqrt", float(np.prod(lam) ** -0.5))

    @classmethod
    def isotropic(cls, c2: float, dim: int = 1) -> "ScaleMatrix":
        """``S = c2 * I``."""
        return cls(float(c2) * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def whiten(self, v) -> np.ndarray:
        """Apply ``S^{-1/2}`` to ``v`` (scalar array in 1-D, trailing axis otherwise)."""
        v = np.asarray(v, dtype=float)
        if self.dim == 1:
            return v * self.inv_sqrt[0, 0]
        return v @ self.inv_sqrt.T

    def to_list(self) -> list:
        return self.matrix.tolist()


# --------------------------------------------------------------------------- families


@dataclass(frozen=True, eq=False)
class LocationFamily:
    """Members ``q_nu`` of a location family with fixed scale ``S``.

    ``canonical`` records the user-facing parameter the family was built from,
    e.g. ``("variance", 4.0)`` or ``("scale", 4.0)``.
    """

    base: BaseDensity
    scale: ScaleMatrix
    canonical: tuple[str, float] | None = None

    def __post_init__(self):
        if self.base.dim != self.scale.dim:
            raise DimensionMismatch(
                f"base density is {self.base.dim}-D but scale matrix is {self.scale.dim}-D"
            )

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def label(self) -> str:
        if self.canonical is not None:
            name, value = self.canonical
            return f"{self.base.label}[{name}={value:g}]"
        return f"{self.base.label}[S={self.scale.to_list()}]"

    def to_dict(self) -> dict:
        out = {"kind": self.base.kind.value, "dim": self.dim, "S": self.scale.to_list()}
        if self.base.df is not None and self.base.kind is Kind.STUDENT_T:
            out["df"] = self.base.df
        if self.canonical is not None:
            out[self.canonical[0]] = self.canonical[1]
        return out

    def standardize(self, nu, x) -> np.ndarray:
        """``S^{-1/2} (x - nu)``."""
        return self.scale.whiten(np.asarray(x, dtype=float) - np.asarray(nu, dtype=float))

    def logpdf(self, nu, x) -> np.ndarray:
        return self.base.logpdf(self.standardize(nu, x)) + math.log(self.scale.det_inv_sqrt)

    def pdf(self, nu, x) -> np.ndarray:
        return self.base.pdf(self.standardize(nu, x)) * self.scale.det_inv_sqrt


def gaussian_family(variance: float = 1.0, dim: int = 1) -> LocationFamily:
    return LocationFamily(
        BaseDensity.gaussian(dim), ScaleMatrix.isotropic(variance, dim), ("variance", float(variance))
    )


def laplace_family(scale: float = 1.0, dim: int = 1) -> LocationFamily:
    return LocationFamily(
        BaseDensity.laplace(dim), ScaleMatrix.isotropic(scale**2, dim), ("scale", float(scale))
    )


def student_t_family(df: float, scale: float = 1.0, dim: int = 1) -> LocationFamily:
    return LocationFamily(
        BaseDensity.student_t(df, dim), ScaleMatrix.isotropic(scale**2, dim), ("scale", float(scale))
    )


def cauchy_family(scale: float = 1.0, dim: int = 1) -> LocationFamily:
    return LocationFamily(
        BaseDensity.cauchy(dim), ScaleMatrix.isotropic(scale**2, dim), ("scale", float(scale))
    )


def _check_point(dim: int, v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if dim == 1:
        if v.ndim > 1 or v.size != 1:
            raise DimensionMismatch(f"{what} must be a scalar for a 1-D family, got shape {v.shape}")
        return v.reshape(())
    if v.shape != (dim,):
        raise DimensionMismatch(f"{what} must have shape ({dim},), got {v.shape}")
    return v


def family_pdf(fam: LocationFamily, nu, x) -> float:
    """Density of the family member at location ``nu``, evaluated at a single point ``x``."""
    nu = _check_point(fam.dim, nu, "nu")
    x = _check_point(fam.dim, x, "x")
    return float(fam.pdf(nu, x))


# --------------------------------------------------------------------------- supports


@dataclass(frozen=True)
class SupportSpec:
    """Either the whole space, or (1-D only) a union of disjoint closed intervals.

    Interval endpoints are stored as exact rationals so that support questions
    (is the mean covered? how long is the overlap?) are answered exactly.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...] | None = None
    allow_degenerate: bool = False

    def __post_init__(self):
        if self.intervals is None:
            return
        ivs = tuple(sorted((_frac(a), _frac(b)) for a, b in self.intervals))
        for a, b in ivs:
            if b < a or (b == a and not self.allow_degenerate):
                raise ValueError(f"interval [{a}, {b}] has non-positive length")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if a1 <= b0:
                raise ValueError("support intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def full(cls) -> "SupportSpec":
        return cls(None)

    @classmethod
    def union(cls, intervals) -> "SupportSpec":
        """Union of possibly overlapping closed intervals, merged into disjoint pieces."""
        ivs = sorted((_frac(a), _frac(b)) for a, b in intervals)
        merged: list[list[Fraction]] = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @property
    def is_full_space(self) -> bool:
        return self.intervals is None

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_full_space:
            return np.ones(x.shape, dtype=bool)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x >= float(a)) & (x <= float(b))
        return out

    def overlap_length(self, lo, hi) -> Fraction:
        """Exact length of ``[lo, hi]`` intersected with the support."""
        lo, hi = _frac(lo), _frac(hi)
        if self.is_full_space:
            return max(hi - lo, Fraction(0))
        total = Fraction(0)
        for a, b in self.intervals:
            total += max(min(b, hi) - max(a, lo), Fraction(0))
        return total

    def to_list(self):
        if self.is_full_space:
            return "full"
        return [[float(a), float(b)] for a, b in self.intervals]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        # decimal reading, so 0.3 means 3/10 rather than its binary neighbour
        return Fraction(repr(v))
    return Fraction(v)


# --------------------------------------------------------------------------- targets


class LogConcavity(str, Enum):
    """Declared log-concavity of a target (never estimated numerically)."""

    NONE = "not_log_concave"
    LOG_CONCAVE = "log_concave"
    SOMEWHERE_STRICT = "somewhere_strictly_log_concave"


class TargetDensity:
    """Interface for even-symmetric targets with a known mean.

    Subclasses provide ``dim``, ``mean``, ``support``, ``log_concavity``,
    ``name``, ``logpdf``, and a box for symmetry sampling (and 2-D
    integration).
    """

    dim: int
    mean: np.ndarray
    support: SupportSpec
    log_concavity: LogConcavity
    name: str
    symmetric: bool = True  # declared symmetry certificate

    def logpdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    @property
    def mean_scalar(self) -> float:
        if self.dim != 1:
            raise DimensionMismatch("mean_scalar is only defined for 1-D targets")
        return float(self.mean[0])

    def halfwidth(self) -> float:
        """Radius around the mean containing all (or all but ~1e-16) of the mass."""
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the pdf is discontinuous (1-D)."""
        return ()

    def integration_box(self):
        """Axis-aligned box carrying all but a negligible part of the mass."""
        r = self.halfwidth()
        return tuple((float(m - r), float(m + r)) for m in self.mean)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "mean": self.mean.tolist(),
            "support": self.support.to_list(),
            "log_concavity": self.log_concavity.value,
        }


class UniformMixture(TargetDensity):
    """Finite mixture of uniforms on closed intervals of the real line."""

    dim = 1

    def __init__(
        self,
        intervals: Sequence[tuple[float, float]],
        weights: Sequence[float],
        *,
        mean: float | None = None,
        name: str = "uniform_mixture",
        log_concavity: LogConcavity | None = None,
        symmetric: bool | None = None,
    ):
        if len(intervals) != len(weights) or not intervals:
            raise ValueError("need one weight per interval")
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0) or not math.isclose(w.sum(), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError("mixture weights must be positive and sum to 1")
        self.components = tuple((float(a), float(b)) for a, b in intervals)
        for a, b in self.components:
            if not b > a:
                raise ValueError(f"degenerate uniform component [{a}, {b}]")
        self.weights = tuple(float(x) for x in w)
        self.support = SupportSpec.union(intervals)
        natural_mean = sum(wi * 0.5 * (a + b) for wi, (a, b) in zip(self.weights, self.components))
        self.mean = np.array([natural_mean if mean is None else float(mean)])
        self.name = name
        if log_concavity is None:
            # a single uniform is log-concave; a mixture with gaps or steps is not
            log_concavity = LogConcavity.LOG_CONCAVE if len(self.components) == 1 else LogConcavity.NONE
        self.log_concavity = LogConcavity(log_concavity)
        self.symmetric = bool(symmetric) if symmetric is not None else False

    def __repr__(self):
        return f"UniformMixture({self.name}, {list(zip(self.weights, self.components))})"

    def __reduce__(self):
        return (
            _rebuild_uniform_mixture,
            (self.components, self.weights, float(self.mean[0]), self.name, self.log_concavity, self.symmetric),
        )

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for wi, (a, b) in zip(self.weights, self.components):
            out = out + np.where((x >= a) & (x <= b), wi / (b - a), 0.0)
        return out

    def logpdf(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({e for c in self.components for e in c}))

    def halfwidth(self) -> float:
        m = float(self.mean[0])
        return max(abs(e - m) for c in self.components for e in c)

    def describe(self) -> dict:
        out = super().describe()
        out["components"] = [
            {"weight": w, "interval": list(c)} for w, c in zip(self.weights, self.components)
        ]
        return out


def _rebuild_uniform_mixture(components, weights, mean, name, lc, symmetric):
    return UniformMixture(components, weights, mean=mean, name=name, log_concavity=lc, symmetric=symmetric)


class GaussianTarget(TargetDensity):
    """Gaussian target ``N(mean, cov)``; strictly log-concave everywhere."""

    def __init__(self, mean, cov, *, name: str | None = None):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.dim = self.mean.size
        self.cov = ScaleMatrix(np.atleast_2d(np.asarray(cov, dtype=float)))
        if self.cov.dim != self.dim:
            raise DimensionMismatch("mean and covariance dimensions differ")
        self.support = SupportSpec.full()
        self.log_concavity = LogConcavity.SOMEWHERE_STRICT
        self.symmetric = True
        self.name = name or f"gaussian(mean={self.mean.tolist()}, cov={self.cov.to_list()})"

    def __repr__(self):
        return f"GaussianTarget({self.name})"

    def logpdf(self, x) -> np.ndarray:
        z = self.cov.whiten(np.asarray(x, dtype=float) - (self.mean[0] if self.dim == 1 else self.mean))
        sq = z * z if self.dim == 1 else np.sum(z * z, axis=-1)
        return -0.5 * sq - 0.5 * self.dim * LOG_2PI + math.log(self.cov.det_inv_sqrt)

    def halfwidth(self) -> float:
        sd = float(np.sqrt(np.max(np.linalg.eigvalsh(self.cov.matrix))))
        return 12.0 * sd  # tail mass beyond 12 sd is below 1e-32


class GaussianMixtureTarget(TargetDensity):
    """Equal-covariance Gaussian mixture, even symmetric about ``mean``.

    Components come in mirrored pairs ``mean +/- offset``; each pair shares a
    weight so the mixture is symmetric by construction.
    """

    def __init__(self, mean, offsets, cov, *, weights=None, name: str = "gaussian_mixture"):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.dim = self.mean.size
        self.offsets = np.atleast_2d(np.asarray(offsets, dtype=float)).reshape(-1, self.dim)
        k = self.offsets.shape[0]
        self.pair_weights = (
            np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
        )
        if not math.isclose(self.pair_weights.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("pair weights must sum to 1")
        self.cov = ScaleMatrix(np.atleast_2d(np.asarray(cov, dtype=float)))
        self.support = SupportSpec.full()
        self.log_concavity = LogConcavity.NONE
        self.symmetric = True
        self.name = name

    def __repr__(self):
        return f"GaussianMixtureTarget({self.name})"

    def _component(self, diff):
        z = self.cov.whiten(diff)
        sq = z * z if self.dim == 1 else np.sum(z * z, axis=-1)
        return np.exp(-0.5 * sq - 0.5 * self.dim * LOG_2PI) * self.cov.det_inv_sqrt

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c = self.mean[0] if self.dim == 1 else self.mean
        tau = x - c
        out = 0.0
        for w, off in zip(self.pair_weights, self.offsets):
            o = off[0] if self.dim == 1 else off
            # written as a sum over +/- so that tau -> -tau swaps the terms exactly
            out = out + 0.5 * w * (self._component(tau - o) + self._component(-tau - o))
        return out

    def logpdf(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def halfwidth(self) -> float:
        sd = float(np.sqrt(np.max(np.linalg.eigvalsh(self.cov.matrix))))
        return float(np.max(np.linalg.norm(self.offsets, axis=1))) + 12.0 * sd

    def describe(self) -> dict:
        out = super().describe()
        out["offsets"] = self.offsets.tolist()
        out["cov"] = self.cov.to_list()
        return out


# --------------------------------------------------------------------------- built-in targets


def make_target_p1() -> UniformMixture:
    """``0.5 Unif[-9, -3] + 0.5 Unif[3, 9]``: symmetric about 0, mean outside the support."""
    return UniformMixture(
        [(-9.0, -3.0), (3.0, 9.0)], [0.5, 0.5], mean=0.0, name="p1", symmetric=True
    )


def make_target_p2() -> UniformMixture:
    """``0.99 p1 + 0.01 Unif[-0.3, 0.3]``: same outer modes, support now covers the mean."""
    return UniformMixture(
        [(-9.0, -3.0), (3.0, 9.0), (-0.3, 0.3)],
        [0.495, 0.495, 0.01],
        mean=0.0,
        name="p2",
        symmetric=True,
    )


def uniform_target(a: float, b: float, *, mean: float | None = None, name: str | None = None) -> UniformMixture:
    """Single uniform on ``[a, b]``; ``mean`` may be declared off-centre for negative controls."""
    symmetric = mean is None or math.isclose(mean, 0.5 * (a + b))
    return UniformMixture(
        [(a, b)], [1.0], mean=mean, name=name or f"uniform[{a:g},{b:g}]", symmetric=symmetric
    )


def gaussian_target(mean=0.0, variance=1.0, *, name: str | None = None) -> GaussianTarget:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.asarray(variance, dtype=float)
    if cov.ndim == 0:
        cov = float(cov) * np.eye(mean.size)
    return GaussianTarget(mean, cov, name=name)


def make_bimodal_2d() -> GaussianMixtureTarget:
    """Bimodal planar target, even symmetric about ``(2, 1)``."""
    return GaussianMixtureTarget(
        mean=[2.0, 1.0],
        offsets=[[1.8, 1.2]],
        cov=0.5 * np.eye(2),
        name="bimodal_2d",
    )


# --------------------------------------------------------------------------- symmetry check


def is_even_symmetric(p: TargetDensity, n_samples: int = 1024, tol: float = 1e-12) -> bool:
    """Check ``p(mu + x) == p(mu - x)`` on a deterministic Halton sample.

    The sample fills the box ``[-R, R]^d`` with ``R`` slightly larger than the
    target's half-width, so both sides of every support edge are probed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    R = 1.25 * p.halfwidth() + 1.0
    u = qmc.Halton(d=p.dim, scramble=False).random(n_samples + 1)[1:]
    x = (2.0 * u - 1.0) * R
    if p.dim == 1:
        x = x[:, 0]
        mu = float(p.mean[0])
    else:
        mu = p.mean
    diff = np.abs(p.pdf(mu + x) - p.pdf(mu - x))
    return bool(np.all(diff <= tol))
