"""Kernels with modulus-controlled smoothness and their truncated operators.

A kernel K is admissible when |K(x, y)| <= C |x-y|^{-dim} and the
increment |K(x, y) - K(z, y)| is controlled by
theta(|x-z| / |x-y|) |x-y|^{-dim} for |x-z| < |x-y| / 2, where theta is a
nondecreasing modulus on (0, 1].  The operator itself is realized as the
eps-truncated singular sum on the grid, which is a discrete convolution.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.signal import fftconvolve

from .errors import ConfigurationError, PreconditionError
from .grid import DiscreteFunction, Grid, Region
from .orlicz import YoungFunction, luxemburg_norm

__all__ = [
    "ThetaModulus",
    "DiniIntegrals",
    "dini_integrals",
    "Kernel",
    "KernelConstants",
    "SamplePlan",
    "kernel_constants",
    "apply_operator",
    "maximal",
]


@dataclass(frozen=True)
class ThetaModulus:
    """Nondecreasing modulus on (0, 1] with theta(0+) = 0.

    power:   theta(t) = t^delta, 0 < delta <= 1
    log:     theta(t) = (1 + log(1/t))^{-beta}, beta > 0; its Dini integral
             diverges for beta <= 1, which makes it the standard
             counterexample probe
    zero:    theta identically zero (exact kernels with no smoothness error)
    """

    tag: str
    param: float = 1.0

    def __post_init__(self):
        if self.tag not in ("power", "log", "zero"):
            raise ConfigurationError(f"unknown modulus tag {self.tag!r}")
        if self.tag == "power" and not (0.0 < self.param <= 1.0):
            raise ConfigurationError("power modulus needs 0 < delta <= 1")
        if self.tag == "log" and not (self.param > 0.0):
            raise ConfigurationError("log modulus needs beta > 0")

    @classmethod
    def power(cls, delta: float) -> "ThetaModulus":
        return cls("power", float(delta))

    @classmethod
    def log(cls, beta: float) -> "ThetaModulus":
        return cls("log", float(beta))

    @classmethod
    def zero(cls) -> "ThetaModulus":
        return cls("zero", 0.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.tag == "zero":
            out = np.zeros_like(t)
        else:
            tc = np.clip(t, 0.0, 1.0)
            if self.tag == "power":
                out = tc**self.param
            else:
                with np.errstate(divide="ignore"):
                    logt = np.log(tc)
                # 1 - log(0) = inf and inf**(-beta) = 0, so t = 0 maps to 0
                out = np.where(tc > 0, (1.0 - logt) ** (-self.param), 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiniIntegrals:
    """Values of int_0^1 theta(t)/t dt and int_0^1 theta(t) |log t| / t dt.

    Divergent or effectively divergent integrals are reported as inf.
    """

    dini: float
    log_dini: float

    @property
    def converged(self) -> bool:
        return math.isfinite(self.dini) and math.isfinite(self.log_dini)


_GAUSS_NODES, _GAUSS_WEIGHTS = leggauss(32)


def _tail_estimate(piece: float, ratio: float, level: int) -> float:
    """Geometric or power-law extrapolation of the remaining dyadic pieces."""
    if piece <= 0.0:
        return 0.0
    if ratio >= 1.0:
        return math.inf
    if ratio < 0.95:
        return piece * ratio / (1.0 - ratio)
    # slow decay: model piece_k ~ k^{-a}
    a = level * (1.0 - ratio)
    if a <= 1.1:
        return math.inf
    return piece * level / (a - 1.0)


def dini_integrals(
    theta: ThetaModulus,
    rel_tol: float = 1e-6,
    blowup: float = 1e12,
    max_levels: int = 1008,
) -> DiniIntegrals:
    """Dyadic Gauss quadrature of the two Dini integrals of a modulus.

    The integrand is evaluated on [2^{-k-1}, 2^{-k}] until both pieces fall
    below rel_tol of their running totals, then the tail is extrapolated.
    Totals past the blowup cutoff, and tails that fail to decay summably,
    come back as inf.
    """
    # below level ~1008 the dyadic endpoints leave float64 range
    max_levels = min(max_levels, 1008)
    total1 = 0.0
    total2 = 0.0
    prev1 = prev2 = 0.0
    p1 = p2 = 0.0
    k = 0
    tiny = 1e-300
    for k in range(max_levels):
        b = 2.0**-k
        a = b / 2.0
        t = 0.5 * (a + b) + 0.5 * (b - a) * _GAUSS_NODES
        th = np.asarray(theta(t))
        scale = 0.5 * (b - a)
        prev1, prev2 = p1, p2
        with np.errstate(over="ignore"):
            p1 = scale * float(np.sum(th / t * _GAUSS_WEIGHTS))
            p2 = scale * float(np.sum(th * (-np.log(t)) / t * _GAUSS_WEIGHTS))
        total1 += p1
        total2 += p2
        if total1 > blowup or total2 > blowup:
            return DiniIntegrals(math.inf, math.inf)
        if k >= 8 and p1 <= rel_tol * max(total1, tiny) and p2 <= rel_tol * max(total2, tiny):
            break
    r1 = 0.0 if (prev1 <= 0.0 or p1 <= 0.0) else p1 / prev1
    r2 = 0.0 if (prev2 <= 0.0 or p2 <= 0.0) else p2 / prev2
    tail1 = _tail_estimate(p1, r1, k + 1)
    tail2 = _tail_estimate(p2, r2, k + 1)
    total1 = total1 + tail1
    total2 = total2 + tail2
    if total1 > blowup:
        total1 = math.inf
    if total2 > blowup:
        total2 = math.inf
    return DiniIntegrals(total1, total2)


@dataclass(frozen=True)
class Kernel:
    """A singular kernel on the box, with its declared modulus.

    hilbert:  K(x, y) = 1 / (pi (x - y)), dimension one
    riesz:    K(x, y) = (x - y)_component / |x - y|^{dim + 1}
    zero:     K identically zero
    """

    tag: str
    dim: int
    theta: ThetaModulus = ThetaModulus.power(1.0)
    component: int = 0

    def __post_init__(self):
        if self.tag not in ("hilbert", "riesz", "zero"):
            raise ConfigurationError(f"unknown kernel tag {self.tag!r}")
        if self.dim not in (1, 2):
            raise ConfigurationError("kernel dim must be 1 or 2")
        if self.tag == "hilbert" and self.dim != 1:
            raise ConfigurationError("the hilbert kernel is one dimensional")
        if not (0 <= self.component < self.dim):
            raise ConfigurationError("bad riesz component")

    def pointwise(self, diff: np.ndarray) -> np.ndarray:
        """Kernel value at displacement diff, shape (..., dim); zero at 0."""
        diff = np.asarray(diff, dtype=np.float64)
        if self.dim == 1:
            d = diff.reshape(-1)
            rho = np.abs(d)
        else:
            d = diff.reshape(-1, self.dim)
            rho = np.sqrt(np.sum(d * d, axis=-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.tag == "hilbert":
                out = 1.0 / (math.pi * d)
            elif self.tag == "riesz":
                num = d if self.dim == 1 else d[:, self.component]
                out = num / rho ** (self.dim + 1)
            else:
                out = np.zeros_like(rho)
        out = np.where(rho > 0, out, 0.0)
        return out


@functools.lru_cache(maxsize=64)
def _offset_table(kernel: Kernel, grid: Grid):
    """Kernel values and distances on the displacement lattice."""
    n = grid.points_per_axis
    h = grid.spacing
    m = np.arange(-(n - 1), n) * h
    if grid.dim == 1:
        rho = np.abs(m)
        vals = kernel.pointwise(m)
    else:
        dx, dy = np.meshgrid(m, m, indexing="ij")
        rho = np.sqrt(dx * dx + dy * dy)
        vals = kernel.pointwise(np.column_stack([dx.ravel(), dy.ravel()])).reshape(rho.shape)
    vals.flags.writeable = False
    rho.flags.writeable = False
    return vals, rho


@dataclass(frozen=True)
class KernelConstants:
    size_constant: float
    smoothness_constant: float


@dataclass(frozen=True)
class SamplePlan:
    n_samples: int = 4096
    seed: int = 0


def kernel_constants(kernel: Kernel, grid: Grid, plan: Optional[SamplePlan] = None) -> KernelConstants:
    """Empirical size and smoothness constants of a kernel.

    Random point pairs in the box estimate sup |K| |x-y|^dim; perturbed
    triples with |x-z| < |x-y| / 2 estimate the smoothness constant
    sup |K(x,y) - K(z,y)| |x-y|^dim / theta(|x-z| / |x-y|).
    """
    plan = plan or SamplePlan()
    rng = np.random.default_rng(plan.seed)
    n = plan.n_samples
    L = grid.half_width
    dim = grid.dim
    x = rng.uniform(-L, L, (n, dim))
    y = rng.uniform(-L, L, (n, dim))
    sep = np.sqrt(np.sum((x - y) ** 2, axis=1))
    keep = sep > 1e-3 * L
    x, y, sep = x[keep], y[keep], sep[keep]

    kx = kernel.pointwise(x - y)
    size_c = float(np.max(np.abs(kx) * sep**dim)) if sep.size else 0.0

    u = rng.uniform(0.05, 0.499, x.shape[0])
    if dim == 1:
        omega = rng.choice([-1.0, 1.0], x.shape[0])[:, None]
    else:
        ang = rng.uniform(0.0, 2.0 * math.pi, x.shape[0])
        omega = np.column_stack([np.cos(ang), np.sin(ang)])
    z = x + (u * sep)[:, None] * omega
    kz = kernel.pointwise(z - y)
    diff = np.abs(kx - kz) * sep**dim
    th = np.asarray(kernel.theta(u))
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(diff > 0, diff / th, 0.0)
    bound = bound[np.isfinite(th) & (th >= 0)]
    smooth_c = float(np.max(bound)) if bound.size else 0.0
    return KernelConstants(size_c, smooth_c)


def apply_operator(
    kernel: Kernel,
    f: DiscreteFunction,
    epsilon: float,
    b: Optional[DiscreteFunction] = None,
) -> DiscreteFunction:
    """Truncated singular integral, or its commutator with b when b is given.

    T f(x_i) = h^dim sum over |x_i - x_j| > eps of K(x_i - x_j) f(x_j).
    The truncation must keep at least the two nearest cells out, eps >= 2h,
    so the diagonal singularity never enters the sum.  With b the result is
    b (T f) - T (b f).
    """
    grid = f.grid
    if kernel.dim != grid.dim:
        raise ConfigurationError("kernel and grid dimensions do not match")
    h = grid.spacing
    if epsilon < 2.0 * h * (1.0 - 1e-12):
        raise ConfigurationError(f"truncation epsilon must be at least 2h = {2 * h!r}")
    vals, rho = _offset_table(kernel, grid)
    G = np.where(rho > epsilon * (1.0 + 1e-12), vals, 0.0)
    n = grid.points_per_axis

    def convolve(values: np.ndarray) -> np.ndarray:
        if grid.dim == 1:
            full = np.convolve(values, G)
            return grid.cell_volume * full[n - 1 : 2 * n - 1]
        F = values.reshape(n, n)
        full = fftconvolve(F, G, mode="full")
        return grid.cell_volume * full[n - 1 : 2 * n - 1, n - 1 : 2 * n - 1].ravel()

    if b is None:
        return DiscreteFunction(grid, convolve(f.values))
    if b.grid != grid:
        raise ConfigurationError("symbol b lives on a different grid")
    return DiscreteFunction(grid, b.values * convolve(f.values) - convolve(b.values * f.values))


def maximal(
    f: DiscreteFunction,
    kind: str,
    regions: Iterable[Region],
    delta: Optional[float] = None,
) -> DiscreteFunction:
    """Family-restricted maximal function of f.

    hl           sup of avg |f| over member regions containing the node
    sharp        sup of avg |f - avg f|
    hl_delta     [hl of |f|^delta]^{1/delta}
    sharp_delta  [sharp of |f|^delta]^{1/delta}
    llogl        sup of the averaged LlogL Luxemburg norm

    Every node must be covered by some region; append a covering cube to
    the family if needed.
    """
    if kind in ("hl_delta", "sharp_delta"):
        if delta is None or not (0.0 < delta <= 1.0):
            raise ConfigurationError("delta kinds need 0 < delta <= 1")
        powered = DiscreteFunction(f.grid, np.abs(f.values) ** delta)
        inner = maximal(powered, kind[: -len("_delta")], regions)
        return DiscreteFunction(f.grid, inner.values ** (1.0 / delta))
    if kind not in ("hl", "sharp", "llogl"):
        raise ConfigurationError(f"unknown maximal kind {kind!r}")

    grid = f.grid
    out = np.full(grid.n_nodes, -math.inf)
    avals = np.abs(f.values)
    phi = YoungFunction.llogl(1.0)
    for region in regions:
        idx = region.node_indices(grid)
        if idx.size == 0:
            continue
        if kind == "hl":
            val = float(np.mean(avals[idx]))
        elif kind == "sharp":
            seg = f.values[idx]
            val = float(np.mean(np.abs(seg - np.mean(seg))))
        else:
            val = luxemburg_norm(f, phi, region)
        # region indices are unique, so fancy assignment is safe and fast
        seg = out[idx]
        out[idx] = np.where(seg >= val, seg, val)
    if np.any(np.isinf(out)):
        raise PreconditionError(
            "maximal family leaves nodes uncovered; append a covering region"
        )
    return DiscreteFunction(grid, out)
