"""Halfspace partition behind the unique-minimizer argument for convex, radially
increasing weights.

For a shift ``nu_prime != 0`` and residual ``tau = x - mu`` define
``a = S^{-1} nu_prime`` and ``t = ||S^{-1/2} nu_prime||^2 / 2``. Then

* ``H2 = {tau . a > t}``: moving the location by ``nu_prime`` lowers the weight,
* ``H3 = {tau . a < -t}``: the mirror image of ``H2``,
* ``H4 = {-t <= tau . a <= t}``: the slab between them, which contains 0.

``H1 = H3 | H4`` is where the weight does not decrease. Points exactly on a
slab face belong to ``H4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import qmc

from .densities import LocationFamily, ScaleMatrix, TargetDensity
from .divergences import (
    DivergenceKind,
    DivergenceSpec,
    WeightFunction,
    integrand_weight,
    objective_simplified,
    weight_function,
)
from .errors import DimensionMismatch, UnsupportedSpec
from .quadrature import QuadratureConfig, integrate_1d, integrate_2d

__all__ = [
    "Decomposition",
    "HalfspacePartition",
    "Region",
    "classify_point",
    "classify_points",
    "delta_objective_decomposition",
    "delta_w",
    "mirror_pairing_check",
    "partition_grid",
]


class Region(str, Enum):
    H2 = "H2"
    H3 = "H3"
    H4 = "H4"


@dataclass(frozen=True, eq=False)
class HalfspacePartition:
    nu_prime: np.ndarray
    scale: ScaleMatrix

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.nu_prime, dtype=float))
        if v.shape != (self.scale.dim,):
            raise DimensionMismatch(f"nu_prime must have shape ({self.scale.dim},)")
        if not np.any(v != 0):
            raise ValueError("nu_prime must be nonzero")
        object.__setattr__(self, "nu_prime", v)

    @property
    def dim(self) -> int:
        return self.scale.dim

    @property
    def normal(self) -> np.ndarray:
        """``S^{-1} nu_prime``, the common normal of both slab faces."""
        return self.scale.inv @ self.nu_prime

    @property
    def threshold(self) -> float:
        """``||S^{-1/2} nu_prime||^2 / 2``."""
        v = self.scale.inv_sqrt @ self.nu_prime
        return 0.5 * float(v @ v)

    def projections(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        if self.dim == 1 and (tau.ndim == 0 or tau.shape[-1] != 1):
            return tau * self.normal[0]
        return tau @ self.normal


def classify_points(part: HalfspacePartition, tau) -> np.ndarray:
    """Vectorized region labels (``Region`` values as strings)."""
    s = part.projections(tau)
    t = part.threshold
    return np.where(s > t, Region.H2.value, np.where(s < -t, Region.H3.value, Region.H4.value))


def classify_point(part: HalfspacePartition, tau) -> Region:
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if tau.shape != (part.dim,):
        raise DimensionMismatch(f"tau must have shape ({part.dim},)")
    s = float(tau @ part.normal)
    t = part.threshold
    if s > t:
        return Region.H2
    if s < -t:
        return Region.H3
    return Region.H4


def delta_w(w: WeightFunction, S: ScaleMatrix, nu_prime, tau):
    """``w(S^{-1/2}(tau - nu_prime)) - w(S^{-1/2} tau)`` (vectorized over ``tau``)."""
    tau = np.asarray(tau, dtype=float)
    nu_prime = np.asarray(nu_prime, dtype=float)
    if S.dim == 1:
        nu_prime = nu_prime.reshape(())
    return w(S.whiten(tau - nu_prime)) - w(S.whiten(tau))


@dataclass
class Decomposition:
    total: float
    on_H2: float
    on_H3: float
    on_H4: float

    @property
    def closure(self) -> float:
        """``on_H2 + on_H3 + on_H4 - total``; zero up to quadrature error."""
        return self.on_H2 + self.on_H3 + self.on_H4 - self.total

    def to_dict(self) -> dict:
        return {"total": self.total, "on_H2": self.on_H2, "on_H3": self.on_H3, "on_H4": self.on_H4}


def _region_intervals_1d(part: HalfspacePartition) -> dict[Region, tuple[float, float]]:
    """Residual intervals of the three regions on the line."""
    a = float(part.normal[0])
    edge = part.threshold / abs(a)  # = |nu_prime| / 2
    hi_side, lo_side = (Region.H2, Region.H3) if a > 0 else (Region.H3, Region.H2)
    return {hi_side: (edge, math.inf), lo_side: (-math.inf, -edge), Region.H4: (-edge, edge)}


def delta_objective_decomposition(
    spec: DivergenceSpec,
    p: TargetDensity,
    fam: LocationFamily,
    nu_prime,
    cfg: QuadratureConfig | None = None,
) -> Decomposition:
    """Split ``obj(mu + nu_prime) - obj(mu)`` over ``H2``, ``H3`` and ``H4``.

    ``total`` is computed independently as the difference of two simplified
    objectives, so :attr:`Decomposition.closure` is a genuine consistency
    check on the region integrals.
    """
    if spec.kind is DivergenceKind.RKL:
        raise UnsupportedSpec("the decomposition needs a weight function (FKL or alpha)")
    part = HalfspacePartition(nu_prime, fam.scale)
    w = weight_function(spec, fam.base)
    mu = p.mean if p.dim > 1 else p.mean[0]
    nu_p = part.nu_prime if p.dim > 1 else part.nu_prime[0]
    S = fam.scale

    if spec.kind is DivergenceKind.FKL:
        I = integrand_weight(spec, p)

        def weighted_delta(tau):
            ix = I(mu + tau)
            return np.where(ix > 0, delta_w(w, S, nu_p, tau) * ix, 0.0)

    else:
        a = spec.alpha

        def weighted_delta(tau):
            # log domain, as in the simplified objective
            lp = a * p.logpdf(mu + tau)
            hi = np.exp(w.log_abs(S.whiten(tau - nu_p)) + lp)
            lo = np.exp(w.log_abs(S.whiten(tau)) + lp)
            return w.sign * (hi - lo)

    total = float(objective_simplified(spec, p, fam, mu + nu_p, cfg)) - float(
        objective_simplified(spec, p, fam, mu, cfg)
    )

    if p.dim == 1:
        def f(x):
            return weighted_delta(x - mu)

        pieces = {}
        points = list(p.breakpoints()) + [mu, mu + nu_p]
        for region, (lo, hi) in _region_intervals_1d(part).items():
            lo_x, hi_x = mu + lo, mu + hi
            if p.support.is_full_space:
                domain = [(lo_x, hi_x)]
            else:
                domain = [
                    (max(float(a), lo_x), min(float(b), hi_x))
                    for a, b in p.support.intervals
                    if min(float(b), hi_x) > max(float(a), lo_x)
                ]
            if not domain:
                pieces[region] = 0.0
                continue
            pieces[region] = float(
                integrate_1d(f, domain, cfg, points=points, center=mu, scale=max(p.halfwidth() / 12.0, 1e-3))
            )
    elif p.dim == 2:
        # rotate so the slab faces are lines of constant first coordinate
        normal = part.normal
        u = normal / np.linalg.norm(normal)
        perp = np.array([-u[1], u[0]])
        edge = part.threshold / float(np.linalg.norm(normal))
        R = p.halfwidth() + float(np.linalg.norm(nu_p))

        def f(sr):
            return weighted_delta(sr[:, :1] * u + sr[:, 1:] * perp)

        bounds = {Region.H3: (-R, -edge), Region.H4: (-edge, edge), Region.H2: (edge, R)}
        pieces = {
            region: float(integrate_2d(f, ((lo, hi), (-R, R)), cfg)) if hi > lo else 0.0
            for region, (lo, hi) in bounds.items()
        }
    else:
        raise DimensionMismatch("only 1-D and 2-D targets are supported")
    return Decomposition(total, pieces[Region.H2], pieces[Region.H3], pieces[Region.H4])


def mirror_pairing_check(part: HalfspacePartition, p: TargetDensity, n: int = 100, tol: float = 1e-12) -> bool:
    """Every sampled ``eta`` in ``H3`` mirrors into ``H2`` with equal target density."""
    if p.dim != part.dim:
        raise DimensionMismatch("partition and target dimensions differ")
    R = p.halfwidth() + 2.0 * float(np.linalg.norm(part.nu_prime))
    sampler = qmc.Halton(d=part.dim, scramble=False)
    sampler.fast_forward(1)
    found = 0
    mu = p.mean if p.dim > 1 else p.mean[0]
    for _ in range(64):
        eta = (2.0 * sampler.random(4 * n) - 1.0) * R
        if part.dim == 1:
            eta = eta[:, 0]
        labels = classify_points(part, eta)
        eta = eta[labels == Region.H3.value]
        if eta.size == 0:
            continue
        if not np.all(classify_points(part, -eta) == Region.H2.value):
            return False
        if not np.all(np.abs(p.pdf(mu + eta) - p.pdf(mu - eta)) <= tol):
            return False
        found += eta.shape[0]
        if found >= n:
            return True
    raise RuntimeError(f"found only {found} of {n} points in H3")


def partition_grid(part: HalfspacePartition, p: TargetDensity, n: int = 200, lim: float = 6.0):
    """Rows ``(x, y, region, target_pdf)`` on an ``n x n`` grid of residuals
    over ``[-lim, lim]^2``, where ``target_pdf = p(mu + (x, y))``."""
    if part.dim != 2 or p.dim != 2:
        raise DimensionMismatch("partition_grid is defined for 2-D targets")
    g = np.linspace(-lim, lim, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    tau = np.stack([X.ravel(), Y.ravel()], axis=-1)
    regions = classify_points(part, tau)
    dens = p.pdf(p.mean + tau)
    return [(float(x), float(y), str(r), float(d)) for (x, y), r, d in zip(tau, regions, dens)]
