"""Grid certificates for the sufficient conditions on weights and targets.

The convexity and monotonicity checks are numerical certificates on a finite
grid, not proofs. Every report records the grid so a verdict can be
reproduced.

Dispatch in :func:`verdict`:

==========  ===========================================================
FKL         T1 if ``-log q0`` strictly convex; T2 if convex, radially
            increasing, and the target has mass in every neighbourhood
            of its mean.
Alpha       T3 / T4, the same two tests on ``q0**(1-a) / (a (a-1))``.
RKL         unique minimizer if the target is (declared) somewhere
            strictly log-concave.
==========  ===========================================================

Anything else only has the stationary point at the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .densities import (
    BaseDensity,
    LocationFamily,
    LogConcavity,
    TargetDensity,
    is_even_symmetric,
)
from .divergences import DivergenceKind, DivergenceSpec, WeightFunction, weight_function

__all__ = [
    "Convexity",
    "ConvexityReport",
    "GuaranteeVerdict",
    "Theorem",
    "VerdictKind",
    "base_is_even",
    "check_convexity",
    "check_radially_increasing",
    "check_support_around_mean",
    "verdict",
]

DEFAULT_RANGE = (-12.0, 12.0)
DEFAULT_N = 2048
DEFAULT_STRICT_MARGIN = 1e-7
# normalized violations below this are treated as rounding noise
NEGATIVE_TOL = 1e-9
# switch to ratios of exponentials when |w| exceeds this
LOG_SWITCH = 1e30


class Convexity(str, Enum):
    STRICT = "StrictlyConvex"
    CONVEX = "ConvexNotStrict"
    NOT_CONVEX = "NotConvex"


@dataclass
class ConvexityReport:
    """Outcome of :func:`check_convexity`.

    ``witness`` is ``(a, b)`` with ``w((a+b)/2) > (w(a)+w(b))/2 + tol`` for
    NotConvex, or ``(a, b)`` spanning a segment with (numerically) zero
    curvature for ConvexNotStrict. ``min_curvature`` is the smallest
    normalized second difference ``d2w / (h^2 max|w|)`` on the grid.
    """

    verdict: Convexity
    witness: tuple[float, float] | None
    witness_tol: float | None
    min_curvature: float
    grid: tuple[float, float, int]
    strict_margin: float
    log_domain: bool
    tag: str = ""

    def to_dict(self) -> dict:
        return {
            "weight": self.tag,
            "verdict": self.verdict.value,
            "witness": list(self.witness) if self.witness is not None else None,
            "witness_tol": self.witness_tol,
            "min_normalized_curvature": self.min_curvature,
            "grid": {"lo": self.grid[0], "hi": self.grid[1], "n": self.grid[2]},
            "strict_margin": self.strict_margin,
            "log_domain": self.log_domain,
        }


def _scaled_values(w: WeightFunction, z: np.ndarray):
    """Return ``(values, log_domain)``.

    In the log domain ``values`` holds ``log|w|`` and the caller works with
    ratios; otherwise it holds ``w`` itself.
    """
    if w.log_abs is not None:
        la = np.asarray(w.log_abs(z), dtype=float)
        if np.nanmax(la) > math.log(LOG_SWITCH):
            return la, True
    return np.asarray(w(z), dtype=float), False


def _midpoint_excess(vals: np.ndarray, k: int, h: float, sign: float, log_domain: bool):
    """``((w(a)+w(b))/2 - w(mid)) / ((k h)^2 max|w|)`` for every grid triple at offset ``k``.

    Non-negative everywhere iff midpoint convexity holds at this offset.
    """
    left, mid, right = vals[: -2 * k], vals[k:-k], vals[2 * k :]
    if log_domain:
        top = np.maximum(np.maximum(left, mid), right)
        excess = sign * (0.5 * (np.exp(left - top) + np.exp(right - top)) - np.exp(mid - top))
        top = np.exp(top)
    else:
        top = np.maximum(np.maximum(np.abs(left), np.abs(mid)), np.abs(right))
        top = np.where(top > 0, top, 1e-300)
        excess = (0.5 * (left + right) - mid) / top
    return excess / (k * h) ** 2, top


def check_convexity(
    w: WeightFunction,
    range_: tuple[float, float] = DEFAULT_RANGE,
    n: int = DEFAULT_N,
    strict_margin: float = DEFAULT_STRICT_MARGIN,
) -> ConvexityReport:
    """Classify a 1-D weight as strictly convex, convex, or not convex on a grid.

    Midpoint convexity is tested for every grid pair whose midpoint is a grid
    point. Strictness is read off the second central differences: each must
    exceed ``strict_margin`` after normalizing by ``h^2 max|w|`` over its
    stencil. Weights with ``|w| > 1e30`` are handled through ``log|w|``.
    """
    if n < 16:
        raise ValueError("n must be >= 16")
    lo, hi = map(float, range_)
    if not (hi > lo and math.isclose(lo, -hi, abs_tol=1e-12)):
        raise ValueError("range must be symmetric about 0")
    z = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    vals, log_domain = _scaled_values(w, z)
    if not np.all(np.isfinite(vals)):
        raise ArithmeticError(f"weight {w.tag} is not finite on the grid")

    worst, witness = -np.inf, None
    for k in range(1, (n - 1) // 2 + 1):
        excess, top = _midpoint_excess(vals, k, h, w.sign, log_domain)
        if k == 1:
            curv = 2.0 * excess  # second difference / (h^2 max|w|)
        i = int(np.argmin(excess))
        if -excess[i] > worst:
            worst = float(-excess[i])
            witness = (i, k, float(top[i]))
    min_curv = float(curv.min())

    if worst > NEGATIVE_TOL:
        i, k, scale = witness
        a, b = float(z[i]), float(z[i + 2 * k])
        tol = NEGATIVE_TOL * (k * h) ** 2 * scale
        return ConvexityReport(Convexity.NOT_CONVEX, (a, b), tol, min_curv, (lo, hi, n), strict_margin, log_domain, w.tag)

    if min_curv >= strict_margin:
        return ConvexityReport(Convexity.STRICT, None, None, min_curv, (lo, hi, n), strict_margin, log_domain, w.tag)

    # longest run of (numerically) flat curvature as the witness segment
    flat = curv < strict_margin
    best, run_start = (0, 0), None
    for j, f in enumerate(flat):
        if f and run_start is None:
            run_start = j
        if (not f or j == flat.size - 1) and run_start is not None:
            end = j if f else j - 1
            if end - run_start >= best[1] - best[0]:
                best = (run_start, end)
            run_start = None
    a, b = float(z[best[0]]), float(z[best[1] + 2])
    return ConvexityReport(Convexity.CONVEX, (a, b), None, min_curv, (lo, hi, n), strict_margin, log_domain, w.tag)


def check_radially_increasing(w: WeightFunction, range_: float | tuple = 12.0, n: int = DEFAULT_N) -> bool:
    """Is ``w`` strictly increasing in ``|z|``?

    In 1-D both half-lines ``[0, R]`` and ``[-R, 0]`` are scanned; in 2-D, 16
    equally spaced rays from the origin.
    """
    if n < 16:
        raise ValueError("n must be >= 16")
    R = float(range_[1]) if isinstance(range_, tuple) else float(range_)
    r = np.linspace(0.0, R, n)
    if w.dim == 1:
        rays = [r, -r]
    else:
        angles = 2.0 * np.pi * np.arange(16) / 16
        rays = []
        for t in angles:
            u = np.zeros(w.dim)
            u[0], u[1] = math.cos(t), math.sin(t)
            rays.append(r[:, None] * u[None, :])
    for ray in rays:
        vals, log_domain = _scaled_values(w, ray)
        if log_domain:
            # log|w| increases with w when w > 0 and decreases when w < 0
            inc = np.diff(vals) * w.sign
        else:
            inc = np.diff(vals)
        if not np.all(inc > 0):
            return False
    return True


def check_support_around_mean(p: TargetDensity, eps: float = 0.1) -> bool:
    """Does the ``eps``-ball around the mean meet the support in positive measure?

    Exact for interval supports; always true for full-space supports.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if p.support.is_full_space:
        return True
    m = Fraction(repr(float(p.mean[0])))
    e = Fraction(repr(float(eps)))
    return p.support.overlap_length(m - e, m + e) > 0


def base_is_even(base: BaseDensity, n: int = 100) -> bool:
    z = np.linspace(-10.0, 10.0, n) + 0.123
    if base.dim > 1:
        z = np.stack([z] + [np.roll(z, k) for k in range(1, base.dim)], axis=-1)
    return bool(np.all(base.logpdf(z) == base.logpdf(-z)))


# --------------------------------------------------------------------------- verdicts


class Theorem(str, Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"
    RKL_LOG_CONCAVE = "RKLLogConcave"


class VerdictKind(str, Enum):
    UNIQUE = "UniqueMinimizer"
    STATIONARY = "StationaryOnly"
    NOT_APPLICABLE = "NotApplicable"


@dataclass
class GuaranteeVerdict:
    result: VerdictKind
    theorem: Theorem | None = None
    reason: str | None = None
    sub_reports: list[dict] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return self.result is VerdictKind.UNIQUE

    def to_dict(self) -> dict:
        return {
            "verdict": self.result.value,
            "theorem": self.theorem.value if self.theorem else None,
            "reason": self.reason,
            "sub_reports": self.sub_reports,
        }


SUPPORT_EPSILONS = (1e-3, 1e-2, 1e-1)


def _supported_around_mean(p: TargetDensity) -> tuple[bool, dict]:
    hits = {str(e): check_support_around_mean(p, e) for e in SUPPORT_EPSILONS}
    return any(hits.values()), {"check": "support_around_mean", "by_eps": hits, "passed": any(hits.values())}


def verdict(
    spec: DivergenceSpec,
    fam: LocationFamily,
    p: TargetDensity,
    *,
    range_: tuple[float, float] = DEFAULT_RANGE,
    n: int = DEFAULT_N,
    strict_margin: float = DEFAULT_STRICT_MARGIN,
) -> GuaranteeVerdict:
    """Which sufficient condition (if any) certifies a unique minimizer at the mean."""
    reports: list[dict] = []
    even_base = base_is_even(fam.base)
    even_target = is_even_symmetric(p)
    reports.append({"check": "base_even_symmetric", "passed": even_base})
    reports.append({"check": "target_even_symmetric", "passed": even_target})
    if not even_base:
        return GuaranteeVerdict(VerdictKind.NOT_APPLICABLE, reason="base density is not even symmetric", sub_reports=reports)
    if not even_target:
        return GuaranteeVerdict(
            VerdictKind.NOT_APPLICABLE, reason="target is not even symmetric about its mean", sub_reports=reports
        )

    if spec.kind is DivergenceKind.RKL:
        finite = p.support.is_full_space
        reports.append({"check": "divergence_finite", "passed": finite})
        if not finite:
            return GuaranteeVerdict(
                VerdictKind.NOT_APPLICABLE,
                reason="RKL is infinite: the family has full support but the target does not",
                sub_reports=reports,
            )
        strict = p.log_concavity is LogConcavity.SOMEWHERE_STRICT
        reports.append({"check": "somewhere_strictly_log_concave", "declared": p.log_concavity.value, "passed": strict})
        if strict:
            return GuaranteeVerdict(VerdictKind.UNIQUE, Theorem.RKL_LOG_CONCAVE, sub_reports=reports)
        return GuaranteeVerdict(VerdictKind.STATIONARY, reason="target not somewhere strictly log-concave", sub_reports=reports)

    strict_thm, relaxed_thm = (
        (Theorem.T1, Theorem.T2) if spec.kind is DivergenceKind.FKL else (Theorem.T3, Theorem.T4)
    )
    w = weight_function(spec, fam.base)
    if fam.dim == 1:
        conv = check_convexity(w, range_, n, strict_margin)
        reports.append({"check": "weight_convexity", **conv.to_dict()})
        convexity = conv.verdict
    else:
        convexity = _convexity_along_lines(w, range_, n, strict_margin, reports)
    radial = check_radially_increasing(w, range_, n)
    reports.append({"check": "weight_radially_increasing", "passed": radial})
    supported, sup_report = _supported_around_mean(p)
    reports.append(sup_report)

    if convexity is Convexity.STRICT:
        return GuaranteeVerdict(VerdictKind.UNIQUE, strict_thm, sub_reports=reports)
    if convexity is Convexity.CONVEX and radial and supported:
        return GuaranteeVerdict(VerdictKind.UNIQUE, relaxed_thm, sub_reports=reports)
    missing = []
    if convexity is Convexity.NOT_CONVEX:
        missing.append("weight not convex")
    else:
        missing.append("weight convex but not strictly")
        if not radial:
            missing.append("weight not strictly radially increasing")
        if not supported:
            missing.append("target has no mass around its mean")
    return GuaranteeVerdict(VerdictKind.STATIONARY, reason="; ".join(missing), sub_reports=reports)


def _convexity_along_lines(w, range_, n, strict_margin, reports) -> Convexity:
    """Multivariate weights: certify convexity along 16 lines through the origin
    and 16 offset parallels. Returns the weakest verdict found."""
    order = [Convexity.STRICT, Convexity.CONVEX, Convexity.NOT_CONVEX]
    worst = Convexity.STRICT
    for t in 2.0 * np.pi * np.arange(16) / 32:
        u = np.array([math.cos(t), math.sin(t)])
        perp = np.array([-u[1], u[0]])
        for off in (0.0, 1.5):
            line = WeightFunction(
                lambda s, u=u, off=off, perp=perp: w(s[..., None] * u + off * perp),
                tag=f"{w.tag}|line(theta={t:.3f},offset={off})",
                log_abs=None if w.log_abs is None else (lambda s, u=u, off=off, perp=perp: w.log_abs(s[..., None] * u + off * perp)),
                sign=w.sign,
            )
            rep = check_convexity(line, range_, n, strict_margin)
            if order.index(rep.verdict) > order.index(worst):
                worst = rep.verdict
                reports.append({"check": "weight_convexity_line", **rep.to_dict()})
    reports.append({"check": "weight_convexity", "verdict": worst.value})
    return worst
