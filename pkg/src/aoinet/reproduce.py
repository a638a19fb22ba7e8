"""Grid evaluations behind the tandem and two-class figures, plus their summaries.

All values come from :mod:`aoinet.analytic`; nothing here re-derives a formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import tandem_age, two_class_ages, two_class_boundary_age

TANDEM_LENGTHS = (1, 2, 5, 10)
GRID_STEPS = 100  # grid spacing 1/GRID_STEPS over (0, 1)
UNSTABLE = "unstable"


def unit_grid(steps: int = GRID_STEPS) -> list[float]:
    """Interior points k/steps of (0, 1), computed by division so they print cleanly."""
    return [k / steps for k in range(1, steps)]


def fig3_rows(mu: float = 1.0, lengths=TANDEM_LENGTHS) -> list[tuple[float, int, float]]:
    """(lambda, n, H) for n identical tandem queues, lambda over the grid times mu."""
    return [(rho * mu, n, tandem_age(n, rho * mu, mu)) for n in lengths for rho in unit_grid()]


@dataclass(frozen=True)
class TwoClassPoint:
    lambda_a: float
    lambda_b: float
    h_alpha: float | None  # None marks an unstable grid point
    h_beta: float | None


def fig5_points(mu1: float = 1.0, mu2: float = 1.0, mu3: float = 1.0) -> list[TwoClassPoint]:
    grid = unit_grid()
    out = []
    for la in grid:
        for lb in grid:
            if la < mu1 and lb < mu2 and la + lb < mu3:
                ha, hb = two_class_ages(la, lb, mu1, mu2, mu3)
                out.append(TwoClassPoint(la, lb, ha, hb))
            else:
                out.append(TwoClassPoint(la, lb, None, None))
    return out


def _argmin(pairs):
    best = min(pairs, key=lambda p: p[1])
    return best


def fig3_summary(mu: float = 1.0) -> dict[str, str]:
    out: dict[str, str] = {}
    for n in TANDEM_LENGTHS:
        rho, h = _argmin([(r, tandem_age(n, r * mu, mu)) for r in unit_grid()])
        out[f"fig3.argmin_rho.n{n}"] = fmt(rho)
        out[f"fig3.min_h.n{n}"] = fmt(h)
    rho = 0.99
    gap = tandem_age(10, rho * mu, mu) - tandem_age(1, rho * mu, mu)
    out["fig3.gap_rho0.99.n10_minus_n1"] = fmt(gap)
    return out


def fig5_summary(mu1: float = 1.0, mu2: float = 1.0, mu3: float = 1.0) -> dict[str, str]:
    out: dict[str, str] = {}
    # class-b rate at its boundary: the lambda_b -> 0+ limit
    la, h = _argmin([(x, two_class_boundary_age(x, mu1, mu3)) for x in unit_grid() if x < min(mu1, mu3)])
    out["fig5.min_h_alpha"] = fmt(h)
    out["fig5.min_h_alpha.lambda_a"] = fmt(la)
    out["fig5.min_h_alpha.rho_1"] = fmt(la / mu1)
    out["fig5.min_h_alpha.lambda_b"] = "0+"
    out["fig5.min_h_alpha.kind"] = "boundary"

    stable = [p for p in fig5_points(mu1, mu2, mu3) if p.h_alpha is not None]
    interior = min(stable, key=lambda p: p.h_alpha)
    out["fig5.min_h_alpha_interior"] = fmt(interior.h_alpha)
    out["fig5.min_h_alpha_interior.lambda_a"] = fmt(interior.lambda_a)
    out["fig5.min_h_alpha_interior.lambda_b"] = fmt(interior.lambda_b)

    best = min(stable, key=lambda p: p.h_alpha + p.h_beta)
    out["fig5.min_sum"] = fmt(best.h_alpha + best.h_beta)
    out["fig5.min_sum.lambda_a"] = fmt(best.lambda_a)
    out["fig5.min_sum.lambda_b"] = fmt(best.lambda_b)
    out["fig5.min_sum.rho_1"] = fmt(best.lambda_a / mu1)
    out["fig5.min_sum.rho_2"] = fmt(best.lambda_b / mu2)
    out["fig5.min_sum.h_alpha"] = fmt(best.h_alpha)
    out["fig5.min_sum.h_beta"] = fmt(best.h_beta)
    return out


def fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return UNSTABLE if x is None else str(x)
    return f"{x:.6g}"
