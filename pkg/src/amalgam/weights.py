"""Positive weights and their Muckenhoupt-style diagnostics.

Weights keep their defining expression so they can be re-rendered on a
refined grid; characteristics are suprema over a region family, which is
how every continuum supremum is realized in this package.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, EmptyRegionWarning, PreconditionError
from .expressions import evaluate
from .grid import DiscreteFunction, Grid, RegionFamily

__all__ = [
    "Weight",
    "weight_from_expression",
    "power_weight",
    "constant_weight",
    "muckenhoupt_characteristic",
    "WeightProfile",
    "doubling_profile",
]


@dataclass(frozen=True)
class Weight:
    """A strictly positive function on a grid, usually expression-backed."""

    function: DiscreteFunction
    expression: Optional[str] = None

    def __post_init__(self):
        if not np.all(self.function.values > 0):
            raise ConfigurationError("weights must be strictly positive")

    @property
    def grid(self) -> Grid:
        return self.function.grid

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    def resample(self, grid: Grid) -> "Weight":
        if self.expression is None:
            raise ConfigurationError("weight has no expression to re-render")
        return weight_from_expression(self.expression, grid)


def weight_from_expression(expression: str, grid: Grid) -> Weight:
    vals = evaluate(expression, grid)
    if not np.all(vals > 0):
        raise ConfigurationError(
            f"weight expression {expression!r} is not strictly positive on the grid"
        )
    return Weight(DiscreteFunction(grid, vals), expression)


def power_weight(grid: Grid, a: float) -> Weight:
    """|x|^a with the distance clipped below at h/2, so the weight stays positive.

    In dimension one this lies in the p > 1 Muckenhoupt class exactly for
    -1 < a < p - 1, which makes it the standard probe weight.
    """
    return weight_from_expression(f"r**({float(a)!r})", grid)


def constant_weight(grid: Grid, c: float = 1.0) -> Weight:
    if not (c > 0):
        raise ConfigurationError("constant weight must be positive")
    return weight_from_expression(repr(float(c)), grid)


def muckenhoupt_characteristic(w: Weight, p: float, family: RegionFamily) -> float:
    """sup over the family of avg(w) * avg(w^{-1/(p-1)})^{p-1}, or the
    p = 1 variant avg(w) / min(w)."""
    if p < 1:
        raise ConfigurationError("muckenhoupt characteristic needs p >= 1")
    grid = w.grid
    vals = w.values
    best = 0.0
    seen = False
    for region in family:
        idx = region.node_indices(grid)
        if idx.size == 0:
            warnings.warn("skipping empty region", EmptyRegionWarning, stacklevel=2)
            continue
        seen = True
        wb = vals[idx]
        m1 = float(np.mean(wb))
        if p == 1.0:
            cand = m1 / float(np.min(wb))
        else:
            m2 = float(np.mean(wb ** (-1.0 / (p - 1.0))))
            cand = m1 * m2 ** (p - 1.0)
        if cand > best:
            best = cand
    if not seen:
        raise PreconditionError("every region in the family is empty")
    return best


@dataclass(frozen=True)
class WeightProfile:
    doubling_constant: float
    reverse_doubling_constant: float
    comparison_exponent: float
    comparison_constant: float
    n_regions: int


def doubling_profile(w: Weight, family: RegionFamily) -> WeightProfile:
    """Doubling and growth diagnostics of the measure w dx over a family.

    Doubling constants use the pairs (B, 2B) whose dilation still fits the
    box.  The comparison exponent is a least-squares slope of log-mass
    against log-size along concentric chains, with the constant sized so
    that mass(B_r)/mass(B_R) <= C (r/R)^delta holds on every observed pair.
    """
    grid = w.grid
    vals = w.values
    cell = grid.cell_volume

    def mass(region) -> float:
        idx = region.node_indices(grid)
        if idx.size == 0:
            return 0.0
        return cell * float(np.sum(vals[idx]))

    ratios = []
    for region in family:
        twice = region.dilate(2.0)
        if not twice.fits_box(grid):
            continue
        mB = mass(region)
        m2B = mass(twice)
        if mB > 0.0 and m2B > 0.0:
            ratios.append(m2B / mB)
    if not ratios:
        raise PreconditionError(
            "no region in the family keeps its doubling inside the box"
        )
    c_dbl = max(ratios)
    d_rev = min(ratios)

    # group log-mass observations by center; fit one shared slope
    groups = {}
    for region in family:
        if not region.fits_box(grid):
            continue
        m = mass(region)
        if m > 0.0:
            groups.setdefault(region.center, []).append((math.log(region.size), math.log(m)))
    chains = [pts for pts in groups.values() if len(pts) >= 2]
    if not chains:
        raise PreconditionError(
            "comparison fit needs a center carrying at least two region sizes"
        )
    num = 0.0
    den = 0.0
    for pts in chains:
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        xc = xs - xs.mean()
        yc = ys - ys.mean()
        num += float(np.dot(xc, yc))
        den += float(np.dot(xc, xc))
    if den == 0.0:
        raise PreconditionError("comparison fit needs at least two distinct sizes")
    delta = num / den

    worst = 0.0
    for pts in chains:
        pts = sorted(pts)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                (xr, yr), (xR, yR) = pts[i], pts[j]
                resid = (yr - yR) - delta * (xr - xR)
                if resid > worst:
                    worst = resid
    return WeightProfile(
        doubling_constant=c_dbl,
        reverse_doubling_constant=d_rev,
        comparison_exponent=delta,
        comparison_constant=math.exp(worst),
        n_regions=len(ratios),
    )
