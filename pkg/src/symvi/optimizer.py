"""Plain gradient descent on the location parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .densities import LocationFamily, TargetDensity
from .divergences import DivergenceSpec, objective_simplified
from .errors import Diverged, NonFiniteIntegrand
from .quadrature import QuadratureConfig

__all__ = ["OptimizerConfig", "Record", "Termination", "Trajectory", "finite_difference_gradient", "optimize_location"]


@dataclass(frozen=True)
class OptimizerConfig:
    """Gradient-descent settings.

    Parameters
    ----------
    nu0 : float
        Starting location.
    lr : float
        Learning rate.
    max_iter : int
        Iteration budget; iteration 0 is the starting point.
    h : float
        Central-difference step for the gradient.
    tol : float
        Stop once ``|gradient| <= tol``.
    bound : float
        Raise :class:`Diverged` once ``|nu|`` exceeds this.
    flat_tol : float
        Relative change of the objective over ``+-flat_radius`` below which
        the neighbourhood is reported as flat.
    """

    nu0: float = 0.0
    lr: float = 0.1
    max_iter: int = 1000
    h: float = 1e-4
    tol: float = 1e-8
    bound: float = 15.0
    flat_radius: float = 0.1
    flat_tol: float = 1e-9

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol >= 0:
            raise ValueError("tol must be non-negative")
        if not self.bound > 0:
            raise ValueError("bound must be positive")


class Termination(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class Record:
    iteration: int
    nu: float
    divergence: float
    gradient: float


@dataclass
class Trajectory:
    records: list[Record]
    reason: Termination
    warnings: list[str] = field(default_factory=list)

    @property
    def final(self) -> Record:
        return self.records[-1]

    def nu(self) -> np.ndarray:
        return np.array([r.nu for r in self.records])

    def values(self) -> np.ndarray:
        return np.array([r.divergence for r in self.records])


def finite_difference_gradient(spec, p, fam, nu: float, h: float, cfg=None) -> float:
    up = float(objective_simplified(spec, p, fam, nu + h, cfg))
    down = float(objective_simplified(spec, p, fam, nu - h, cfg))
    return (up - down) / (2.0 * h)


def _flat_warning(spec, p, fam, nu, value, cfg, opt: OptimizerConfig) -> str | None:
    left = float(objective_simplified(spec, p, fam, nu - opt.flat_radius, cfg))
    right = float(objective_simplified(spec, p, fam, nu + opt.flat_radius, cfg))
    spread = max(abs(left - value), abs(right - value))
    if spread <= opt.flat_tol * max(1.0, abs(value)):
        return (
            f"objective is flat within {opt.flat_tol:g} on [{nu - opt.flat_radius:.4g}, {nu + opt.flat_radius:.4g}]: "
            "the landscape has a plateau, so the stopping point is not unique"
        )
    return None


def optimize_location(
    spec: DivergenceSpec,
    p: TargetDensity,
    fam: LocationFamily,
    cfg: OptimizerConfig | None = None,
    quad: QuadratureConfig | None = None,
) -> Trajectory:
    """Minimize the objective over ``nu`` by gradient descent.

    Recorded values are of the simplified objective, which shares its
    minimizers with the divergence. Raises :class:`Diverged` when ``|nu|``
    leaves ``cfg.bound``; the partial trajectory is attached as ``exc.trajectory``.
    """
    cfg = cfg or OptimizerConfig()
    if p.dim != 1:
        raise NotImplementedError("the optimizer works on 1-D locations")
    nu = float(cfg.nu0)
    records: list[Record] = []
    for it in range(cfg.max_iter):
        value = float(objective_simplified(spec, p, fam, nu, quad))
        if not math.isfinite(value):
            raise NonFiniteIntegrand(f"objective is not finite at nu={nu!r}")
        grad = finite_difference_gradient(spec, p, fam, nu, cfg.h, quad)
        records.append(Record(it, nu, value, grad))
        if abs(grad) <= cfg.tol:
            traj = Trajectory(records, Termination.CONVERGED)
            note = _flat_warning(spec, p, fam, nu, value, quad, cfg)
            if note:
                traj.warnings.append(note)
            return traj
        nu = nu - cfg.lr * grad
        if abs(nu) > cfg.bound:
            exc = Diverged(f"|nu| = {abs(nu):.6g} exceeds the bound {cfg.bound:g} at iteration {it + 1}")
            exc.trajectory = Trajectory(records, Termination.DIVERGED)
            raise exc
    return Trajectory(records, Termination.MAX_ITER)
