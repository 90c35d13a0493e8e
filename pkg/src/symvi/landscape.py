"""Divergence landscapes over the location parameter and the verdict at the mean."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import partial

import numpy as np

from .densities import LocationFamily, TargetDensity
from .divergences import DivergenceKind, DivergenceSpec, divergence_full, objective_simplified
from .errors import DimensionMismatch, NonConvergence, NonFiniteIntegrand
from .quadrature import QuadratureConfig

__all__ = [
    "StationaryClassification",
    "StationaryKind",
    "SweepConfig",
    "SweepResult",
    "classify_at_mean",
    "stationarity_residual",
    "sweep",
    "to_divergence",
]

WORKERS_ENV = "SYMVI_WORKERS"


@dataclass(frozen=True)
class SweepConfig:
    """Grid over the location parameter.

    The grid is ``c + (i - N/2) * step`` for ``i = 0..N`` with ``c`` the
    range midpoint and ``N = round((hi - lo) / step)``, so it is exactly
    symmetric about ``c``.
    """

    lo: float = -15.0
    hi: float = 15.0
    step: float = 0.01
    tol_eq: float = 1e-9
    radius: float = 0.05

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"need finite lo < hi, got [{self.lo}, {self.hi}]")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if (self.hi - self.lo) / self.step > 1e7:
            raise ValueError("more than 1e7 grid points")
        if not self.tol_eq > 0:
            raise ValueError("tol_eq must be positive")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")

    @property
    def n_intervals(self) -> int:
        return int(round((self.hi - self.lo) / self.step))

    def grid(self) -> np.ndarray:
        n = self.n_intervals
        c = 0.5 * (self.lo + self.hi)
        return c + (np.arange(n + 1) - 0.5 * n) * self.step


@dataclass
class SweepResult:
    nu: np.ndarray
    divergence: np.ndarray
    config: SweepConfig
    spec: DivergenceSpec
    family: str
    target: str
    mean: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.divergence)):
            raise NonFiniteIntegrand("sweep produced non-finite values")

    @property
    def scale(self) -> float:
        """``max D - min D`` over the sweep."""
        return float(np.max(self.divergence) - np.min(self.divergence))

    def symmetry_error(self) -> float:
        """``max |D(mu + d) - D(mu - d)|`` over grid points paired about the mean."""
        i = int(np.argmin(np.abs(self.nu - self.mean)))
        k = min(i, len(self.nu) - 1 - i)
        if k == 0:
            return 0.0
        left = self.divergence[i - k : i][::-1]
        right = self.divergence[i + 1 : i + 1 + k]
        return float(np.max(np.abs(left - right)))

    def rows(self):
        return zip(self.nu.tolist(), self.divergence.tolist())

    def meta(self) -> dict:
        return {
            **self.spec.to_dict(),
            "family": self.family,
            "target": self.target,
            "mean": self.mean,
            "sweep": asdict(self.config),
        }


def to_divergence(spec: DivergenceSpec, p: TargetDensity, fam: LocationFamily, cfg=None):
    """Return ``(a, b)`` with ``D(nu) = a * obj(nu) + b`` and ``a > 0``.

    For alpha the map is exact. For FKL ``a = 1`` and ``b`` is the constant
    ``D - obj``, fixed by one full evaluation at the mean.
    """
    if spec.kind is DivergenceKind.ALPHA:
        a = spec.alpha
        return fam.scale.det_inv_sqrt ** (1.0 - a), -1.0 / (a * (a - 1.0))
    mu = p.mean if p.dim > 1 else p.mean[0]
    d = float(divergence_full(spec, p, fam, mu, cfg))
    return 1.0, d - float(objective_simplified(spec, p, fam, mu, cfg))


def _objective_at(nu, spec, p, fam, cfg):
    try:
        return float(objective_simplified(spec, p, fam, nu, cfg))
    except NonConvergence as exc:
        raise NonConvergence(f"quadrature failed at nu={nu!r}: {exc}") from exc


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def sweep(
    spec: DivergenceSpec,
    p: TargetDensity,
    fam: LocationFamily,
    cfg: SweepConfig | None = None,
    quad: QuadratureConfig | None = None,
    *,
    workers: int | None = None,
) -> SweepResult:
    """Evaluate the divergence on the grid of ``cfg``.

    The simplified objective is integrated at each grid point and mapped to
    the divergence by :func:`to_divergence`. Workers default to the
    ``SYMVI_WORKERS`` environment variable; output order never depends on it.
    """
    if p.dim != 1 or fam.dim != 1:
        raise DimensionMismatch("landscape sweeps are one-dimensional")
    cfg = cfg or SweepConfig()
    grid = cfg.grid()
    job = partial(_objective_at, spec=spec, p=p, fam=fam, cfg=quad)
    n_workers = _worker_count(workers)
    if n_workers == 1:
        obj = [job(nu) for nu in grid.tolist()]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            obj = list(pool.map(job, grid.tolist(), chunksize=max(1, len(grid) // (8 * n_workers))))
    a, b = to_divergence(spec, p, fam, quad)
    values = a * np.asarray(obj) + b
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteIntegrand(f"divergence is not finite at nu={grid[bad[0]]!r}")
    return SweepResult(grid, values, cfg, spec, fam.label, p.name, float(p.mean[0]))


# --------------------------------------------------------------------------- classification


class StationaryKind(str, Enum):
    UNIQUE_GLOBAL_MIN = "UniqueGlobalMin"
    PLATEAU = "Plateau"
    LOCAL_MAX = "LocalMax"
    OTHER = "Other"


@dataclass
class StationaryClassification:
    kind: StationaryKind
    at: float | None = None
    interval: tuple[float, float] | None = None
    gradient: float = math.nan
    details: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind is StationaryKind.PLATEAU:
            return f"Plateau([{self.interval[0]:.2f}, {self.interval[1]:.2f}])"
        if self.at is not None:
            return f"{self.kind.value}({self.at:.2f})"
        return self.kind.value

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "at": self.at,
            "interval": list(self.interval) if self.interval else None,
            "gradient_at_mean": self.gradient,
            "label": str(self),
            **self.details,
        }


def classify_at_mean(res: SweepResult, mu: float | None = None, tol_eq: float | None = None) -> StationaryClassification:
    """Classify the landscape around the mean.

    Values count as equal within ``thr = tol_eq * min(scale, max(|min D|, 1))``
    where ``scale = max D - min D``. The cap keeps the threshold tied to the
    size of ``D`` near its minimum when the sweep range reaches far tails in
    which ``D`` grows by many orders of magnitude:

    * ``Plateau``: the maximal run of grid points within ``thr`` of the
      minimum, grown from the argmin, is wider than the neighbourhood radius.
    * ``UniqueGlobalMin``: every grid point farther than the radius from the
      argmin exceeds the minimum by more than ``thr``.
    * ``LocalMax``: ``D(mu)`` beats both grid neighbours and the global minimum
      lies more than one step away.
    * ``Other`` otherwise.
    """
    mu = res.mean if mu is None else float(mu)
    tol_eq = res.config.tol_eq if tol_eq is None else float(tol_eq)
    nu, d = res.nu, res.divergence
    step = res.config.step
    if not nu[0] <= mu <= nu[-1]:
        raise ValueError(f"mu={mu} lies outside the sweep range")

    im = int(np.argmin(np.abs(nu - mu)))
    if 0 < im < len(nu) - 1:
        grad = float((d[im + 1] - d[im - 1]) / (2.0 * step))
    else:
        grad = math.nan
    scale = res.scale
    dmin = float(np.min(d))
    thr = tol_eq * min(scale, max(abs(dmin), 1.0))
    details = {"scale": scale, "threshold": thr}

    imin = int(np.argmin(d))
    near = d <= dmin + thr
    lo = imin
    while lo > 0 and near[lo - 1]:
        lo -= 1
    hi = imin
    while hi < len(d) - 1 and near[hi + 1]:
        hi += 1
    if nu[hi] - nu[lo] > res.config.radius:
        return StationaryClassification(
            StationaryKind.PLATEAU, interval=(float(nu[lo]), float(nu[hi])), gradient=grad, details=details
        )

    far = np.abs(nu - nu[imin]) > res.config.radius
    if not np.any(near & far):
        return StationaryClassification(StationaryKind.UNIQUE_GLOBAL_MIN, at=float(nu[imin]), gradient=grad, details=details)

    if 0 < im < len(d) - 1 and d[im] > max(d[im - 1], d[im + 1]) and abs(nu[imin] - mu) > step:
        return StationaryClassification(StationaryKind.LOCAL_MAX, at=float(nu[im]), gradient=grad, details=details)
    details["argmin"] = float(nu[imin])
    return StationaryClassification(StationaryKind.OTHER, gradient=grad, details=details)


def stationarity_residual(
    spec: DivergenceSpec,
    p: TargetDensity,
    fam: LocationFamily,
    mu=None,
    h: float = 1e-4,
    cfg: QuadratureConfig | None = None,
) -> float:
    """Central-difference gradient magnitude of the objective at ``mu``.

    In 1-D this is ``|obj(mu + h) - obj(mu - h)| / (2h)``; in 2-D the
    Euclidean norm of the coordinate-wise central differences.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    mu = np.asarray(p.mean if mu is None else mu, dtype=float)
    if p.dim == 1:
        m = float(mu.reshape(-1)[0])
        up = float(objective_simplified(spec, p, fam, m + h, cfg))
        down = float(objective_simplified(spec, p, fam, m - h, cfg))
        return abs(up - down) / (2.0 * h)
    g = np.empty(p.dim)
    for k in range(p.dim):
        e = np.zeros(p.dim)
        e[k] = h
        up = float(objective_simplified(spec, p, fam, mu + e, cfg))
        down = float(objective_simplified(spec, p, fam, mu - e, cfg))
        g[k] = (up - down) / (2.0 * h)
    return float(np.linalg.norm(g))
