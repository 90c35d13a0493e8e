"""Built-in experiment cases and figure grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .densities import (
    BaseDensity,
    LocationFamily,
    TargetDensity,
    gaussian_family,
    laplace_family,
    make_target_p1,
    make_target_p2,
    student_t_family,
)
from .divergences import DivergenceSpec

__all__ = ["CASES", "Case", "FIG5_ALPHAS", "FIG6_ALPHAS", "FIG6_BASES", "PARTITION_NU_PRIME", "fig5_cases", "get_case"]


@dataclass(frozen=True)
class Case:
    """A named ``(divergence, target, family)`` triple.

    Targets and families are built on demand so every caller gets fresh,
    independent objects.
    """

    name: str
    spec: DivergenceSpec
    make_target: Callable[[], TargetDensity]
    make_family: Callable[[], LocationFamily]

    def build(self) -> tuple[DivergenceSpec, TargetDensity, LocationFamily]:
        return self.spec, self.make_target(), self.make_family()


def _gauss4() -> LocationFamily:
    return gaussian_family(4.0)


def _laplace4() -> LocationFamily:
    return laplace_family(4.0)


def _t5() -> LocationFamily:
    return student_t_family(5.0, 1.0)


CASES: dict[str, Case] = {
    c.name: c
    for c in (
        Case("1.1", DivergenceSpec.fkl(), make_target_p1, _gauss4),
        Case("1.2", DivergenceSpec.fkl(), make_target_p1, _laplace4),
        Case("2.1", DivergenceSpec.fkl(), make_target_p2, _laplace4),
        Case("2.2", DivergenceSpec.fkl(), make_target_p2, _t5),
        Case("3.1", DivergenceSpec.alpha_div(1.1), make_target_p1, _gauss4),
        Case("3.2", DivergenceSpec.alpha_div(0.3), make_target_p1, _gauss4),
        Case("4.1", DivergenceSpec.alpha_div(1.1), make_target_p2, _laplace4),
        Case("4.2", DivergenceSpec.alpha_div(0.7), make_target_p2, _laplace4),
    )
}

FIG5_ALPHAS = {
    "3.1": (1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8),
    "3.2": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8),
}

FIG6_ALPHAS = (0.1, 0.5, 0.9, 1.1, 2.0)
FIG6_BASES = {
    "gaussian": BaseDensity.gaussian,
    "laplace": BaseDensity.laplace,
    "cauchy": BaseDensity.cauchy,
    "student_t5": lambda: BaseDensity.student_t(5.0),
}

PARTITION_NU_PRIME = (1.53, -0.94)


def get_case(name: str) -> Case:
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; choose from {', '.join(CASES)}") from None


def fig5_cases() -> list[Case]:
    """Case 3.1/3.2 setting (p1, Gaussian variance 4) at every extra alpha."""
    out = []
    for parent, alphas in FIG5_ALPHAS.items():
        base = CASES[parent]
        for a in alphas:
            out.append(Case(f"{parent}-alpha{a:g}", DivergenceSpec.alpha_div(a), base.make_target, base.make_family))
    return out
