"""Local norms, BMO, and weighted amalgam norms.

An amalgam norm scans a family of congruent regions: for each size it
takes a local norm on every region, weights it by a power of the region's
measure, aggregates over centers in an outer counting norm, then takes
the supremum over sizes.  Suitable parameter choices collapse this to
weighted Lebesgue or Morrey norms, which is how the implementation is
cross-checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, EmptyRegionWarning, PreconditionError
from .grid import DiscreteFunction, Region, RegionFamily, _weight_values
from .orlicz import YoungFunction, luxemburg_norm
from .weights import Weight

__all__ = [
    "SpaceParams",
    "AmalgamSpec",
    "AmalgamNormResult",
    "local_lp_norm",
    "local_weak_lp_norm",
    "region_mean",
    "bmo_norm",
    "amalgam_norm",
    "amalgam_norm_detail",
]


@dataclass(frozen=True)
class SpaceParams:
    """Exponent triple (p, alpha, q) with 1 <= p <= alpha < q <= inf."""

    p: float
    alpha: float
    q: float

    def __post_init__(self):
        if not (1.0 <= self.p <= self.alpha):
            raise ConfigurationError("need 1 <= p <= alpha")
        if not (self.alpha < self.q):
            raise ConfigurationError("need alpha < q")

    @property
    def p_prime(self) -> float:
        return math.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    @property
    def inv_q(self) -> float:
        return 0.0 if math.isinf(self.q) else 1.0 / self.q

    @property
    def strong_exponent(self) -> float:
        """Measure exponent 1/alpha - 1/p - 1/q for strong and weak norms."""
        return 1.0 / self.alpha - 1.0 / self.p - self.inv_q

    @property
    def llogl_exponent(self) -> float:
        """Measure exponent 1/alpha - 1/q for the averaged LlogL norm."""
        return 1.0 / self.alpha - self.inv_q


def _masses(f: DiscreteFunction, region: Optional[Region], weight):
    grid = f.grid
    w = _weight_values(weight, grid)
    if region is None:
        vals = f.values
        wts = np.ones_like(vals) if w is None else w
    else:
        idx = region.node_indices(grid)
        if idx.size == 0:
            return None, None
        vals = f.values[idx]
        wts = np.ones(idx.size) if w is None else w[idx]
    return vals, wts * grid.cell_volume


def local_lp_norm(
    f: DiscreteFunction,
    p: float,
    region: Optional[Region] = None,
    weight=None,
) -> float:
    """Unnormalized norm (integral form) of f in L^p with an optional weight."""
    if p < 1:
        raise ConfigurationError("local_lp_norm needs p >= 1")
    vals, masses = _masses(f, region, weight)
    if vals is None:
        warnings.warn("region contains no grid nodes", EmptyRegionWarning, stacklevel=2)
        return 0.0
    return float(np.sum(np.abs(vals) ** p * masses)) ** (1.0 / p)


def local_weak_lp_norm(
    f: DiscreteFunction,
    p: float,
    region: Optional[Region] = None,
    weight=None,
) -> float:
    """sup over lam of lam * mass(|f| > lam)^{1/p}, evaluated exactly.

    On a finite grid the supremum is attained just below each distinct
    value of |f|, so scanning descending-sorted values with cumulative
    masses gives the exact answer.
    """
    if p < 1:
        raise ConfigurationError("local_weak_lp_norm needs p >= 1")
    vals, masses = _masses(f, region, weight)
    if vals is None:
        warnings.warn("region contains no grid nodes", EmptyRegionWarning, stacklevel=2)
        return 0.0
    av = np.abs(vals)
    order = np.argsort(av)[::-1]
    sorted_vals = av[order]
    cum = np.cumsum(masses[order])
    cand = sorted_vals * cum ** (1.0 / p)
    return float(cand.max(initial=0.0))


def region_mean(
    f: DiscreteFunction,
    region: Optional[Region] = None,
    weight=None,
) -> float:
    """Mass-weighted average of f over a region."""
    vals, masses = _masses(f, region, weight)
    if vals is None:
        warnings.warn("region contains no grid nodes", EmptyRegionWarning, stacklevel=2)
        return 0.0
    total = float(np.sum(masses))
    if total <= 0.0:
        return 0.0
    return float(np.sum(vals * masses)) / total


def bmo_norm(b: DiscreteFunction, family: RegionFamily, weight=None) -> float:
    """sup over the family of avg_B |b - b_B|."""
    grid = b.grid
    w = _weight_values(weight, grid)
    best = 0.0
    seen = False
    for region in family:
        idx = region.node_indices(grid)
        if idx.size == 0:
            continue
        seen = True
        vals = b.values[idx]
        wts = np.ones(idx.size) if w is None else w[idx]
        total = float(np.sum(wts))
        if total <= 0.0:
            continue
        mean = float(np.sum(vals * wts)) / total
        osc = float(np.sum(np.abs(vals - mean) * wts)) / total
        if osc > best:
            best = osc
    if not seen:
        raise PreconditionError("every region in the family is empty")
    return best


@dataclass(frozen=True)
class AmalgamSpec:
    """Everything an amalgam norm needs besides the function itself.

    variant is one of "strong", "weak", "llogl".  inner_weight drives the
    local norms and the measure powers; outer_weight (optional) weights
    the counting measure over centers.  The llogl variant is an averaged
    Luxemburg norm and is defined for p = 1 only.
    """

    params: SpaceParams
    family: RegionFamily
    inner_weight: Optional[Weight] = None
    outer_weight: Optional[Weight] = None
    variant: str = "strong"

    def __post_init__(self):
        if self.variant not in ("strong", "weak", "llogl"):
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if self.variant == "llogl" and self.params.p != 1.0:
            raise ConfigurationError("the llogl variant requires p = 1")


@dataclass(frozen=True)
class AmalgamNormResult:
    value: float
    argmax_size: float
    argmax_center: tuple


def _inner_value(f, spec, region, grid) -> float:
    w = spec.inner_weight
    wvals = None if w is None else w.values
    idx = region.node_indices(grid)
    if idx.size == 0:
        return 0.0
    cell = grid.cell_volume
    u_mass = cell * (idx.size if wvals is None else float(np.sum(wvals[idx])))
    p = spec.params.p
    if spec.variant == "strong":
        inner = local_lp_norm(f, p, region, w)
        expo = spec.params.strong_exponent
    elif spec.variant == "weak":
        inner = local_weak_lp_norm(f, p, region, w)
        expo = spec.params.strong_exponent
    else:
        inner = luxemburg_norm(f, YoungFunction.llogl(1.0), region, w)
        expo = spec.params.llogl_exponent
    if inner == 0.0:
        return 0.0
    return u_mass**expo * inner


def amalgam_norm_detail(f: DiscreteFunction, spec: AmalgamSpec) -> AmalgamNormResult:
    grid = f.grid
    if spec.inner_weight is not None and spec.inner_weight.grid != grid:
        raise ConfigurationError("inner weight lives on a different grid")
    if spec.outer_weight is not None and spec.outer_weight.grid != grid:
        raise ConfigurationError("outer weight lives on a different grid")
    fam = spec.family
    q = spec.params.q
    cell = grid.cell_volume

    mu = None
    if spec.outer_weight is not None:
        mu = np.array(
            [spec.outer_weight.values[grid.node_index(c)] for c in fam.centers]
        )

    best = -math.inf
    best_size = fam.sizes[0]
    best_center = fam.centers[0]
    for size in fam.sizes:
        vals = np.array([_inner_value(f, spec, region, grid) for region in fam.at_size(size)])
        k = int(np.argmax(vals))
        if math.isinf(q):
            outer = float(vals[k])
        else:
            weights = cell if mu is None else mu * cell
            outer = float(np.sum(vals**q * weights)) ** (1.0 / q)
        if outer > best:
            best = outer
            best_size = size
            best_center = fam.centers[k]
    return AmalgamNormResult(best, best_size, best_center)


def amalgam_norm(f: DiscreteFunction, spec: AmalgamSpec) -> float:
    return amalgam_norm_detail(f, spec).value
