"""Flat ``key = value`` experiment configs (a TOML subset without tables)."""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cases import get_case
from .densities import (
    LocationFamily,
    ScaleMatrix,
    TargetDensity,
    UniformMixture,
    cauchy_family,
    gaussian_family,
    gaussian_target,
    laplace_family,
    make_bimodal_2d,
    make_target_p1,
    make_target_p2,
    student_t_family,
)
from .divergences import DivergenceSpec
from .errors import ConfigError
from .landscape import SweepConfig
from .optimizer import OptimizerConfig

__all__ = ["ExperimentConfig", "dumps", "load", "loads"]

TARGETS = ("p1", "p2", "bimodal_2d", "uniform_mixture", "gaussian")
FAMILIES = ("gaussian", "laplace", "student_t", "cauchy")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one experiment.

    ``case`` names a built-in triple. Any explicitly set target, family or
    divergence key overrides the corresponding part of the case.
    ``family_scale`` is the canonical parameter: variance for the Gaussian,
    ``b`` for the Laplace and the scale ``s`` for Student-t and Cauchy.
    """

    case: str | None = None
    target: str | None = None
    target_intervals: list | None = None
    target_weights: list | None = None
    target_mean: float | None = None
    target_variance: float | None = None
    family: str | None = None
    family_scale: float | None = None
    family_df: float | None = None
    divergence: str | None = None
    alpha: float | None = None
    lo: float | None = None
    hi: float | None = None
    step: float | None = None
    tol_eq: float | None = None
    radius: float | None = None
    nu0: float | None = None
    lr: float | None = None
    max_iter: int | None = None
    h: float | None = None
    tol: float | None = None
    nu_prime: list | None = None
    scale_matrix: list | None = None
    grid_n: int | None = None
    grid_lim: float | None = None
    out: str | None = None

    # ------------------------------------------------------------------ building

    def divergence_spec(self) -> DivergenceSpec:
        if self.divergence is None and self.alpha is not None:
            kind = "alpha"
        elif self.divergence is not None:
            kind = self.divergence
        elif self.case is not None:
            return replace_alpha(get_case(self.case).spec, self.alpha)
        else:
            raise ConfigError("no divergence given (set 'divergence' or 'case')")
        if kind not in ("fkl", "rkl", "alpha"):
            raise ConfigError(f"divergence must be one of fkl, rkl, alpha; got {kind!r}")
        return DivergenceSpec(kind, self.alpha if kind == "alpha" else None)

    def target_density(self) -> TargetDensity:
        kind = self.target
        if kind is None:
            if self.case is None:
                raise ConfigError("no target given (set 'target' or 'case')")
            return get_case(self.case).make_target()
        if kind == "p1":
            return make_target_p1()
        if kind == "p2":
            return make_target_p2()
        if kind == "bimodal_2d":
            return make_bimodal_2d()
        if kind == "gaussian":
            return gaussian_target(0.0 if self.target_mean is None else self.target_mean, self.target_variance or 1.0)
        if kind == "uniform_mixture":
            if not self.target_intervals:
                raise ConfigError("uniform_mixture needs 'target_intervals'")
            n = len(self.target_intervals)
            weights = self.target_weights or [1.0 / n] * n
            return UniformMixture(
                [tuple(iv) for iv in self.target_intervals], weights, mean=self.target_mean, name="uniform_mixture"
            )
        raise ConfigError(f"target must be one of {', '.join(TARGETS)}; got {kind!r}")

    def location_family(self, dim: int = 1) -> LocationFamily:
        kind = self.family
        if kind is None:
            if self.case is None:
                raise ConfigError("no family given (set 'family' or 'case')")
            return get_case(self.case).make_family()
        s = 1.0 if self.family_scale is None else self.family_scale
        if kind == "gaussian":
            return gaussian_family(s, dim)
        if kind == "laplace":
            return laplace_family(s, dim)
        if kind == "student_t":
            if self.family_df is None:
                raise ConfigError("student_t family needs 'family_df'")
            return student_t_family(self.family_df, s, dim)
        if kind == "cauchy":
            return cauchy_family(s, dim)
        raise ConfigError(f"family must be one of {', '.join(FAMILIES)}; got {kind!r}")

    def build(self) -> tuple[DivergenceSpec, TargetDensity, LocationFamily]:
        spec = self.divergence_spec()
        p = self.target_density()
        return spec, p, self.location_family(p.dim)

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(**_present(self, ("lo", "hi", "step", "tol_eq", "radius")))

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(**_present(self, ("nu0", "lr", "max_iter", "h", "tol")))

    def partition_scale(self, dim: int) -> ScaleMatrix:
        if self.scale_matrix is None:
            return ScaleMatrix.isotropic(1.0, dim)
        return ScaleMatrix(np.asarray(self.scale_matrix, dtype=float).reshape(dim, dim))


def replace_alpha(spec: DivergenceSpec, alpha: float | None) -> DivergenceSpec:
    if alpha is None:
        return spec
    return DivergenceSpec("alpha", alpha)


def _present(cfg: ExperimentConfig, names) -> dict:
    return {k: getattr(cfg, k) for k in names if getattr(cfg, k) is not None}


# --------------------------------------------------------------------------- parsing

_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _line_of(text: str, key: str) -> int | None:
    k = re.escape(key)
    pat = re.compile(rf"^\s*(?:[\"']?{k}[\"']?\s*=|\[\[?\s*[\"']?{k}[\"']?\s*[\].])")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    return None


def _coerce(key: str, value, line):
    where = f"line {line}" if line else "config"
    kind = _TYPES[key]
    if "str" in kind:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: {key!r} must be a string")
        return value
    if "int" in kind:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: {key!r} must be an integer")
        return value
    if "float" in kind:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: {key!r} must be a number")
        return float(value)
    if not isinstance(value, list):
        raise ConfigError(f"{where}: {key!r} must be an array")
    return value


def loads(text: str) -> ExperimentConfig:
    """Parse config text. Unknown keys and tables are rejected with their line number."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    values = {}
    for key, value in raw.items():
        line = _line_of(text, key)
        if isinstance(value, dict):
            raise ConfigError(f"line {line or '?'}: tables are not supported ({key!r}); use flat keys")
        if key not in _TYPES:
            raise ConfigError(f"line {line or '?'}: unknown key {key!r}")
        values[key] = _coerce(key, value, line)
    return ExperimentConfig(**values)


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _fmt(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError("non-finite values cannot be serialized")
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {type(value).__name__}")


def dumps(cfg: ExperimentConfig) -> str:
    lines = [f"{f.name} = {_fmt(getattr(cfg, f.name))}" for f in fields(cfg) if getattr(cfg, f.name) is not None]
    return "\n".join(lines) + "\n"


def override(cfg: ExperimentConfig, **kwargs) -> ExperimentConfig:
    """Copy of ``cfg`` with the non-``None`` keyword values applied."""
    return replace(cfg, **{k: v for k, v in kwargs.items() if v is not None})
