"""Tabular data behind the characteristic-function and detectability figures.

Every builder returns ``(columns, rows)`` with rows as dicts, one long
table per figure distinguished by a ``series`` column.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from qdisc import min_detect, neyman_pearson
from qdisc.core import DomainError

FIG6_R2 = 0.8
FIG6_KAPPA2 = 0.8
FIG7_WEIGHTS = (0.1, 0.2, 0.1, 0.6)
FIG7_LAMBDA = math.pi / 4

Table = tuple[list[str], list[dict]]


def fig4(points: int = 41) -> Table:
    """p11 over the (p10, alpha) plane for pure states, alpha = 1 - |kappa|^2."""
    grid = np.linspace(0.0, 1.0, points)
    rows = [
        {"series": "grid", "p10": x, "alpha": a, "p11": neyman_pearson.p11_pure(1.0 - a, x)}
        for x in grid
        for a in grid
    ]
    rows += [{"series": "boundary_unit", "p10": x, "alpha": 1.0 - x, "p11": 1.0} for x in grid]
    rows += [
        {"series": "boundary_half", "p10": x, "alpha": min_detect.absolute_alpha(x), "p11": 0.5}
        for x in grid
        if x <= 0.5
    ]
    return ["series", "p10", "alpha", "p11"], rows


def fig5(points: int = 41, delta: float = 4.0) -> Table:
    """Region where p11 >= delta p10 is reachable: alpha above the boundary, p10 <= 1/delta."""
    if not delta > 1:
        raise DomainError("delta must exceed 1")
    edge = 1.0 / delta
    rows = [{"series": "vertical", "p10": edge, "alpha": a} for a in np.linspace(0.0, 1.0, points)]
    rows += [
        {"series": "boundary", "p10": x, "alpha": min_detect.relative_alpha(x, delta)}
        for x in np.linspace(0.0, edge, points)
    ]
    return ["series", "p10", "alpha"], rows


def fig6(points: int = 201, r2: float = FIG6_R2, kappa2: float = FIG6_KAPPA2) -> Table:
    """Mixed-qubit characteristic function with its window breakpoints."""
    bp = neyman_pearson.mixed_breakpoints(r2, kappa2)
    xs = np.unique(np.r_[np.linspace(0.0, 1.0, points), bp["p10_gamma_plus"], bp["p10_gamma_minus"]])
    rows = [
        {
            "series": "characteristic",
            "gamma": math.nan,
            "p10": x,
            "p11": neyman_pearson.characteristic_mixed_kappa(r2, kappa2, x),
        }
        for x in xs
    ]
    for side in ("plus", "minus"):
        rows.append(
            {
                "series": f"breakpoint_gamma_{side}",
                "gamma": bp[f"gamma_{side}"],
                "p10": bp[f"p10_gamma_{side}"],
                "p11": bp[f"p11_gamma_{side}"],
            }
        )
    return ["series", "gamma", "p10", "p11"], rows


def fig7(points: int = 512, weights=FIG7_WEIGHTS, lam: float = FIG7_LAMBDA) -> Table:
    """Bell-diagonal characteristic function swept over the Lagrange multiplier."""
    crit = [
        g
        for pa, pb in ((weights[0], weights[1]), (weights[2], weights[3]))
        for g in neyman_pearson.xi_and_critical_gammas(pa, pb, lam)[1:3]
    ]
    rows = []
    for g in neyman_pearson.default_gamma_grid(points, critical=crit):
        pt = neyman_pearson.characteristic_bell_diagonal(weights, lam, float(g))
        rows.append(
            {
                "series": "characteristic",
                "gamma": float(g),
                "p10": pt.p10,
                "p11": pt.p11,
                "row": neyman_pearson.bell_diagonal_row(weights, lam, float(g)),
            }
        )
    rows.sort(key=lambda r: (r["p10"], r["p11"], r["gamma"]))
    return ["series", "gamma", "p10", "p11", "row"], rows


FIGURES: dict[str, Callable[..., Table]] = {"fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7}


def build(name: str, **kwargs) -> Table:
    try:
        maker = FIGURES[name]
    except KeyError:
        raise DomainError(f"unknown figure {name!r}; expected one of {sorted(FIGURES)}") from None
    return maker(**kwargs)
