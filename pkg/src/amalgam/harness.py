"""Empirical verification harness for the operator norm inequalities.

Each supported estimate is realized as a ratio experiment: render a small
corpus of test functions, apply the truncated operator, evaluate both
sides of the inequality, and report the worst ratio together with the
hypothesis gates (weight class membership, modulus integrability, bump
conditions) and stability deltas under truncation halving and grid
refinement.  A bounded ratio that is stable under refinement is the
evidence the harness is after; hypothesis gates that fail mark the run as
outside the theory, not as a counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, HypothesisError, PreconditionError
from .grid import (
    DiscreteFunction,
    Grid,
    Region,
    RegionFamily,
    covering_region,
    region_family,
    sample,
)
from .operators import Kernel, ThetaModulus, apply_operator, dini_integrals, maximal
from .orlicz import YoungFunction, luxemburg_norm
from .spaces import (
    AmalgamSpec,
    SpaceParams,
    amalgam_norm,
    bmo_norm,
    local_lp_norm,
    local_weak_lp_norm,
    region_mean,
)
from .weights import Weight, doubling_profile, muckenhoupt_characteristic, weight_from_expression

__all__ = [
    "CorpusMember",
    "Corpus",
    "CaseResult",
    "HypothesisResult",
    "RatioReport",
    "BumpParams",
    "BumpResult",
    "bump_check",
    "TailBoundResult",
    "tail_bound_check",
    "BmoLemmaResult",
    "bmo_lemma_check",
    "SharpReport",
    "sharp_domination_check",
    "ExperimentSpec",
    "theorem_experiment",
    "THEOREMS",
]

THEOREMS = (
    "strong",
    "weak",
    "commutator",
    "endpoint",
    "two_weight_weak",
    "two_weight_endpoint",
    "two_weight_strong",
    "two_weight_commutator",
)

_COMMUTATOR_THEOREMS = ("commutator", "endpoint", "two_weight_endpoint", "two_weight_commutator")
_TWO_WEIGHT_THEOREMS = ("two_weight_weak", "two_weight_endpoint", "two_weight_strong", "two_weight_commutator")
_LEVEL_THEOREMS = ("endpoint", "two_weight_endpoint")


@dataclass(frozen=True)
class CorpusMember:
    label: str
    expression: str


@dataclass(frozen=True)
class Corpus:
    """A reproducible family of expression-backed test functions.

    Members stay symbolic so a refined grid re-renders the same corpus.
    The first two members are a smooth bump and a log-singular bump; the
    rest cycle through indicators, truncated gaussians, and random-sign
    step sums, with supports kept a margin away from the box edge.
    """

    members: Tuple[CorpusMember, ...]
    seed: int
    dim: int

    @classmethod
    def generate(
        cls,
        n: int,
        seed: int = 0,
        half_width: float = 4.0,
        margin: float = 1.0,
        dim: int = 1,
    ) -> "Corpus":
        if n < 1:
            raise ConfigurationError("corpus needs at least one member")
        if not (0 < margin < half_width):
            raise ConfigurationError("margin must lie strictly inside the box")
        rng = np.random.default_rng(seed)
        reach = half_width - margin
        members: List[CorpusMember] = []

        def draw_center(extent: float) -> float:
            room = reach - extent
            return float(rng.uniform(-room, room)) if room > 0 else 0.0

        for i in range(n):
            if i == 0:
                a = float(rng.uniform(0.5, 2.0))
                w = float(rng.uniform(0.4, 1.0))
                c = draw_center(w)
                members.append(CorpusMember(f"bump{i}", f"{a!r}*bump({c!r},{w!r})"))
                continue
            if i == 1:
                w = float(rng.uniform(0.5, 1.0))
                members.append(CorpusMember(f"logbump{i}", f"logabs*bump(0.0,{w!r})"))
                continue
            kind = (i - 2) % 3
            if kind == 0:
                a = float(rng.uniform(0.5, 2.0))
                width = float(rng.uniform(0.3, 1.5))
                lo = draw_center(width) - width / 2.0
                hi = lo + width
                if dim == 1:
                    expr = f"{a!r}*ind({lo!r},{hi!r})"
                else:
                    expr = f"{a!r}*ind2({lo!r},{hi!r},{lo!r},{hi!r})"
                members.append(CorpusMember(f"ind{i}", expr))
            elif kind == 1:
                a = float(rng.uniform(0.5, 2.0))
                s = float(rng.uniform(0.3, 0.8))
                c = draw_center(3.0 * s)
                if dim == 1:
                    cut = f"ind({c - 3 * s!r},{c + 3 * s!r})"
                else:
                    cut = f"ind2({c - 3 * s!r},{c + 3 * s!r},{c - 3 * s!r},{c + 3 * s!r})"
                members.append(CorpusMember(f"gauss{i}", f"{a!r}*gauss({c!r},{s!r})*{cut}"))
            else:
                parts = []
                for _ in range(3):
                    a = float(rng.uniform(0.3, 1.5)) * float(rng.choice([-1.0, 1.0]))
                    width = float(rng.uniform(0.2, 0.8))
                    lo = draw_center(width) - width / 2.0
                    hi = lo + width
                    if dim == 1:
                        parts.append(f"{a!r}*ind({lo!r},{hi!r})")
                    else:
                        parts.append(f"{a!r}*ind2({lo!r},{hi!r},{lo!r},{hi!r})")
                members.append(CorpusMember(f"steps{i}", " + ".join(parts)))
        return cls(tuple(members), seed, dim)

    def realize(self, grid: Grid) -> List[Tuple[str, DiscreteFunction]]:
        if grid.dim != self.dim:
            raise ConfigurationError("corpus and grid dimensions do not match")
        return [(m.label, sample(m.expression, grid)) for m in self.members]


@dataclass(frozen=True)
class CaseResult:
    label: str
    lhs: float
    rhs: float
    lam: Optional[float] = None

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs

    @property
    def violation(self) -> bool:
        """True when the bound side vanished but the estimated side did not."""
        return self.rhs == 0.0 and self.lhs > 1e-12


@dataclass(frozen=True)
class HypothesisResult:
    name: str
    passed: bool
    detail: str
    values: Tuple[float, ...] = ()


def _json_safe(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


@dataclass(frozen=True)
class RatioReport:
    experiment: str
    cases: Tuple[CaseResult, ...]
    hypotheses: Tuple[HypothesisResult, ...]
    metadata: dict
    stability: dict

    @property
    def max_ratio(self) -> float:
        finite = [c.ratio for c in self.cases if not c.violation]
        return max(finite) if finite else 0.0

    @property
    def argmax_label(self) -> str:
        best = None
        for c in self.cases:
            if not c.violation and (best is None or c.ratio > best.ratio):
                best = c
        return best.label if best else ""

    @property
    def violations(self) -> Tuple[str, ...]:
        return tuple(c.label for c in self.cases if c.violation)

    @property
    def hypotheses_ok(self) -> bool:
        return all(h.passed for h in self.hypotheses)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "metadata": _json_safe(self.metadata),
            "hypotheses": [
                {
                    "name": h.name,
                    "passed": h.passed,
                    "detail": h.detail,
                    "values": _json_safe(list(h.values)),
                }
                for h in self.hypotheses
            ],
            "cases": [
                {
                    "label": c.label,
                    "lhs": _json_safe(c.lhs),
                    "rhs": _json_safe(c.rhs),
                    "ratio": _json_safe(c.ratio),
                    "lam": _json_safe(c.lam),
                    "violation": c.violation,
                }
                for c in self.cases
            ],
            "max_ratio": _json_safe(self.max_ratio),
            "argmax_label": self.argmax_label,
            "stability": _json_safe(self.stability),
            "violations": list(self.violations),
            "hypotheses_ok": self.hypotheses_ok,
        }

    def csv_rows(self) -> List[List[str]]:
        rows = [["label", "lhs", "rhs", "ratio", "lam", "violation"]]
        for c in self.cases:
            rows.append(
                [
                    c.label,
                    repr(c.lhs),
                    repr(c.rhs),
                    repr(c.ratio),
                    "" if c.lam is None else repr(c.lam),
                    str(c.violation),
                ]
            )
        return rows


@dataclass(frozen=True)
class BumpParams:
    """Parameters of a two-weight bump condition."""

    p: float = 2.0
    r: float = 1.5
    mode: str = "orlicz"

    def __post_init__(self):
        if self.p <= 1.0:
            raise ConfigurationError("bump conditions need p > 1")
        if self.r < 1.0:
            raise ConfigurationError("bump conditions need r >= 1")
        if self.mode not in ("two", "power", "orlicz"):
            raise ConfigurationError(f"unknown bump mode {self.mode!r}")


@dataclass(frozen=True)
class BumpResult:
    value: float
    argmax_center: tuple
    argmax_size: float
    mode: str


def bump_check(u: Weight, v: Weight, params: BumpParams, family: RegionFamily) -> BumpResult:
    """Supremum of a two-weight bump quantity over a region family.

    two:     (avg u)^{1/p} (avg v^{1-p'})^{1/p'}
    power:   (avg u^r)^{1/(rp)} (avg v^{(1-p')r})^{1/(rp')}
    orlicz:  (avg u^r)^{1/(rp)} times the averaged Luxemburg norm of
             v^{-1/p} under t (1 + log+ t)^{p'}

    Every mode evaluates to exactly one when both weights are constant
    one, which anchors the scale.
    """
    if u.grid != v.grid:
        raise ConfigurationError("bump weights live on different grids")
    grid = u.grid
    p = params.p
    pp = p / (p - 1.0)
    r = params.r
    vfun = DiscreteFunction(grid, v.values ** (-1.0 / p))
    Y = YoungFunction.bump(pp)
    best: Optional[BumpResult] = None
    for region in family:
        idx = region.node_indices(grid)
        if idx.size == 0:
            continue
        uu = u.values[idx]
        vv = v.values[idx]
        if params.mode == "two":
            val = float(np.mean(uu)) ** (1.0 / p) * float(np.mean(vv ** (1.0 - pp))) ** (1.0 / pp)
        elif params.mode == "power":
            val = float(np.mean(uu**r)) ** (1.0 / (r * p)) * float(
                np.mean(vv ** ((1.0 - pp) * r))
            ) ** (1.0 / (r * pp))
        else:
            val = float(np.mean(uu**r)) ** (1.0 / (r * p)) * luxemburg_norm(vfun, Y, region)
        if best is None or val > best.value:
            best = BumpResult(val, region.center, region.size, params.mode)
    if best is None:
        raise PreconditionError("every region in the family is empty")
    return best


@dataclass(frozen=True)
class TailBoundResult:
    lhs: float
    rhs: float
    jmax: int
    terms: Tuple[float, ...]

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs


def tail_bound_check(
    kernel: Kernel,
    f: DiscreteFunction,
    region: Region,
    epsilon: float,
    b: Optional[DiscreteFunction] = None,
    bmo_family: Optional[RegionFamily] = None,
    jmax: Optional[int] = None,
) -> TailBoundResult:
    """Check the shell decay of the operator applied off the doubled region.

    lhs is the sup over the region of |T f2| with f2 = f outside 2B and
    zero on 2B.  rhs sums shell contributions (theta(2^{-j}) + 2^{-j})
    times the average of |f| on 2^{j+1}B; commutator runs pick up the
    extra factor (j + 1) and scale by the oscillation norm of b.
    """
    grid = f.grid
    idx = region.node_indices(grid)
    if idx.size == 0:
        raise PreconditionError("tail bound region contains no nodes")
    doubled = region.dilate(2.0)
    f2_vals = f.values.copy()
    f2_vals[doubled.node_indices(grid)] = 0.0
    f2 = DiscreteFunction(grid, f2_vals)
    image = apply_operator(kernel, f2, epsilon, b)
    lhs = float(np.max(np.abs(image.values[idx])))

    if jmax is None:
        span = 2.0 * grid.half_width
        jmax = max(1, int(math.ceil(math.log2(span / region.size))) + 1)
    theta = kernel.theta
    terms = []
    rhs = 0.0
    for j in range(1, jmax + 1):
        shell = region.dilate(2.0 ** (j + 1))
        avg = region_mean(f.abs(), shell)
        wgt = float(theta(2.0**-j)) + 2.0**-j
        if b is not None:
            wgt *= j + 1
        term = wgt * avg
        terms.append(term)
        rhs += term
    if b is not None and bmo_family is not None:
        rhs *= bmo_norm(b, bmo_family)
    return TailBoundResult(lhs, rhs, jmax, tuple(terms))


@dataclass(frozen=True)
class BmoLemmaResult:
    bmo: float
    diffs: Tuple[float, ...]
    growth_ratios: Tuple[float, ...]
    weighted_ratios: Optional[Tuple[float, ...]]


def bmo_lemma_check(
    b: DiscreteFunction,
    region: Region,
    bmo_family: RegionFamily,
    jmax: int = 4,
    p: Optional[float] = None,
    w: Optional[Weight] = None,
) -> BmoLemmaResult:
    """Growth of dilated means of an oscillating function.

    diffs[j-1] is the mean of b over 2^{j+1}B minus its mean over B;
    growth_ratios normalizes by (j + 1) times the oscillation norm.  With
    (p, w) given, weighted_ratios additionally checks the weighted local
    oscillation against the same budget.
    """
    grid = b.grid
    if jmax < 1:
        raise ConfigurationError("jmax must be at least 1")
    top = region.dilate(2.0 ** (jmax + 1))
    if not top.fits_box(grid):
        raise PreconditionError(
            f"dilate(2^{jmax + 1}) of the region spills out of the box"
        )
    norm = bmo_norm(b, bmo_family)
    if norm == 0.0:
        raise PreconditionError("b has zero oscillation; the lemma check is vacuous")
    base_mean = region_mean(b, region)
    diffs = []
    growth = []
    weighted = [] if (p is not None and w is not None) else None
    osc = (
        DiscreteFunction(grid, np.abs(b.values - base_mean) ** p)
        if weighted is not None
        else None
    )
    for j in range(1, jmax + 1):
        shell = region.dilate(2.0 ** (j + 1))
        mean_j = region_mean(b, shell)
        d = mean_j - base_mean
        diffs.append(d)
        growth.append(abs(d) / ((j + 1) * norm))
        if weighted is not None:
            avg = region_mean(osc, shell, w)
            weighted.append(avg ** (1.0 / p) / ((j + 1) * norm))
    return BmoLemmaResult(
        norm,
        tuple(diffs),
        tuple(growth),
        None if weighted is None else tuple(weighted),
    )


@dataclass(frozen=True)
class SharpReport:
    kind: str
    max_ratio: float
    violation: bool


def sharp_domination_check(
    kernel: Kernel,
    f: DiscreteFunction,
    family: RegionFamily,
    epsilon: float,
    delta: float = 0.5,
    b: Optional[DiscreteFunction] = None,
    eps_exponent: float = 0.75,
    bmo_family: Optional[RegionFamily] = None,
) -> SharpReport:
    """Pointwise domination of the sharp function of the operator image.

    Plain mode compares the delta-sharp function of T f against the
    maximal function of f.  Commutator mode compares the delta-sharp
    function of [b, T] f against the oscillation norm of b times the sum
    of the eps-power maximal function of T f and the LlogL maximal
    function of f.
    """
    if not (0.0 < delta < 1.0):
        raise ConfigurationError("sharp domination needs 0 < delta < 1")
    grid = f.grid
    regions = list(family) + [covering_region(grid)]
    Tf = apply_operator(kernel, f, epsilon)
    if b is None:
        lhs = maximal(Tf, "sharp_delta", regions, delta=delta)
        rhs_vals = maximal(f, "hl", regions).values
        kind = "operator"
    else:
        if not (delta < eps_exponent < 1.0):
            raise ConfigurationError("need delta < eps_exponent < 1")
        Cf = apply_operator(kernel, f, epsilon, b)
        lhs = maximal(Cf, "sharp_delta", regions, delta=delta)
        fam_for_bmo = bmo_family if bmo_family is not None else family
        scale = bmo_norm(b, fam_for_bmo)
        rhs_vals = scale * (
            maximal(Tf, "hl_delta", regions, delta=eps_exponent).values
            + maximal(f, "llogl", regions).values
        )
        kind = "commutator"
    lhs_vals = lhs.values
    mask = rhs_vals > 0
    violation = bool(np.any(~mask & (lhs_vals > 1e-12)))
    ratio = float(np.max(lhs_vals[mask] / rhs_vals[mask])) if np.any(mask) else 0.0
    return SharpReport(kind, ratio, violation)


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one ratio experiment.

    Weights and the corpus are kept as expressions so refinement re-renders
    everything on the finer grid.  eps_nodes fixes the truncation radius in
    grid cells (at least 2), which keeps the operator well defined on every
    grid in a refinement chain.
    """

    theorem: str
    dim: int = 1
    half_width: float = 4.0
    points: int = 4096
    kernel_tag: str = "hilbert"
    theta: ThetaModulus = ThetaModulus.power(1.0)
    riesz_component: int = 0
    eps_nodes: int = 4
    p: float = 2.0
    alpha: float = 2.5
    q: float = 8.0
    w_expr: str = "1.0"
    u_expr: str = "1.0"
    v_expr: str = "1.0"
    mu_expr: Optional[str] = None
    b_expr: str = "logabs"
    shape: str = "ball"
    sizes: Tuple[float, ...] = (0.25, 0.5, 1.0, 2.0)
    center_stride: int = 256
    corpus_n: int = 6
    corpus_margin: float = 1.0
    seed: int = 0
    lambda_factors: Tuple[float, ...] = tuple(2.0**k for k in range(-4, 5))
    bump: BumpParams = field(default_factory=BumpParams)

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ConfigurationError(
                f"unknown theorem {self.theorem!r}; expected one of {THEOREMS}"
            )
        if self.eps_nodes < 2:
            raise ConfigurationError("eps_nodes must be at least 2")
        if self.theorem in ("weak", "endpoint", "two_weight_endpoint") and self.p != 1.0:
            raise ConfigurationError(f"theorem {self.theorem!r} requires p = 1")
        if self.theorem in ("strong", "commutator") and self.p <= 1.0:
            raise ConfigurationError(f"theorem {self.theorem!r} requires p > 1")


class _Context:
    """Everything rendered on one concrete grid."""

    def __init__(self, spec: ExperimentSpec, grid: Grid):
        self.spec = spec
        self.grid = grid
        self.epsilon = spec.eps_nodes * grid.spacing
        self.kernel = Kernel(
            spec.kernel_tag, grid.dim, spec.theta, component=spec.riesz_component
        )
        self.family = region_family(
            grid, spec.sizes, shape=spec.shape, center_stride=spec.center_stride
        )
        self.w = weight_from_expression(spec.w_expr, grid)
        self.u = weight_from_expression(spec.u_expr, grid)
        self.v = weight_from_expression(spec.v_expr, grid)
        self.mu = None if spec.mu_expr is None else weight_from_expression(spec.mu_expr, grid)
        self.b = (
            sample(spec.b_expr, grid) if spec.theorem in _COMMUTATOR_THEOREMS else None
        )
        corpus = Corpus.generate(
            spec.corpus_n, spec.seed, spec.half_width, spec.corpus_margin, spec.dim
        )
        self.corpus = corpus.realize(grid)

    def space(self, variant: str, inner: Weight) -> AmalgamSpec:
        params = SpaceParams(self.spec.p, self.spec.alpha, self.spec.q)
        return AmalgamSpec(params, self.family, inner, self.mu, variant)


def _level_masses(ctx: _Context, image: DiscreteFunction, f: DiscreteFunction, lam: float,
                  wgt: Weight, vgt: Weight) -> Tuple[float, float]:
    """One lambda level of an endpoint estimate.

    lhs aggregates the wgt-mass of the exceedance set of the image over
    the family; rhs aggregates the vgt-weighted mass of Phi(|f| / lam)
    the same way.  Both sides share the measure exponent
    1/alpha - 1 - 1/q, so scaling f and lam together leaves them fixed.
    """
    spec = ctx.spec
    grid = ctx.grid
    cell = grid.cell_volume
    q = spec.q
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    expo = 1.0 / spec.alpha - 1.0 - inv_q
    phi = YoungFunction.phi()
    phi_f = phi(np.abs(f.values) / lam)
    exceed = np.abs(image.values) > lam
    wv = wgt.values
    vv = vgt.values

    best_l = best_r = 0.0
    for size in ctx.family.sizes:
        vals_l = []
        vals_r = []
        for region in ctx.family.at_size(size):
            idx = region.node_indices(grid)
            if idx.size == 0:
                vals_l.append(0.0)
                vals_r.append(0.0)
                continue
            wB = cell * float(np.sum(wv[idx]))
            scale = wB**expo
            m_l = cell * float(np.sum(wv[idx][exceed[idx]]))
            m_r = cell * float(np.sum(vv[idx] * phi_f[idx]))
            vals_l.append(scale * m_l if m_l > 0 else 0.0)
            vals_r.append(scale * m_r if m_r > 0 else 0.0)
        if math.isinf(q):
            out_l, out_r = max(vals_l), max(vals_r)
        else:
            arr_l = np.asarray(vals_l)
            arr_r = np.asarray(vals_r)
            mu = (
                np.ones(len(ctx.family.centers))
                if ctx.mu is None
                else np.array([ctx.mu.values[grid.node_index(c)] for c in ctx.family.centers])
            )
            out_l = float(np.sum(arr_l**q * mu * cell)) ** (1.0 / q)
            out_r = float(np.sum(arr_r**q * mu * cell)) ** (1.0 / q)
        best_l = max(best_l, out_l)
        best_r = max(best_r, out_r)
    return best_l, best_r


def _run_cases(ctx: _Context) -> List[CaseResult]:
    spec = ctx.spec
    theorem = spec.theorem
    cases: List[CaseResult] = []
    for label, f in ctx.corpus:
        if theorem == "strong":
            image = apply_operator(ctx.kernel, f, ctx.epsilon)
            space = ctx.space("strong", ctx.w)
            cases.append(CaseResult(label, amalgam_norm(image, space), amalgam_norm(f, space)))
        elif theorem == "weak":
            image = apply_operator(ctx.kernel, f, ctx.epsilon)
            lhs = amalgam_norm(image, ctx.space("weak", ctx.w))
            rhs = amalgam_norm(f, ctx.space("strong", ctx.w))
            cases.append(CaseResult(label, lhs, rhs))
        elif theorem == "commutator":
            image = apply_operator(ctx.kernel, f, ctx.epsilon, ctx.b)
            space = ctx.space("strong", ctx.w)
            scale = bmo_norm(ctx.b, ctx.family)
            cases.append(
                CaseResult(label, amalgam_norm(image, space), scale * amalgam_norm(f, space))
            )
        elif theorem == "endpoint":
            image = apply_operator(ctx.kernel, f, ctx.epsilon, ctx.b)
            vmax = float(np.max(np.abs(f.values)))
            if vmax == 0.0:
                continue
            for factor in spec.lambda_factors:
                lam = factor * vmax
                lhs, rhs = _level_masses(ctx, image, f, lam, ctx.w, ctx.w)
                cases.append(CaseResult(f"{label}@x{factor!r}", lhs, rhs, lam=lam))
        elif theorem == "two_weight_weak":
            image = apply_operator(ctx.kernel, f, ctx.epsilon)
            lhs = local_weak_lp_norm(image, spec.p, None, ctx.u)
            rhs = local_lp_norm(f, spec.p, None, ctx.v)
            cases.append(CaseResult(label, lhs, rhs))
        elif theorem == "two_weight_endpoint":
            image = apply_operator(ctx.kernel, f, ctx.epsilon, ctx.b)
            vmax = float(np.max(np.abs(f.values)))
            if vmax == 0.0:
                continue
            phi = YoungFunction.phi()
            cell = ctx.grid.cell_volume
            for factor in spec.lambda_factors:
                lam = factor * vmax
                exceed = np.abs(image.values) > lam
                lhs = cell * float(np.sum(ctx.u.values[exceed]))
                rhs = cell * float(np.sum(phi(np.abs(f.values) / lam) * ctx.v.values))
                cases.append(CaseResult(f"{label}@x{factor!r}", lhs, rhs, lam=lam))
        elif theorem == "two_weight_strong":
            image = apply_operator(ctx.kernel, f, ctx.epsilon)
            lhs = amalgam_norm(image, ctx.space("strong", ctx.u))
            rhs = amalgam_norm(f, ctx.space("strong", ctx.v))
            cases.append(CaseResult(label, lhs, rhs))
        else:  # two_weight_commutator
            image = apply_operator(ctx.kernel, f, ctx.epsilon, ctx.b)
            scale = bmo_norm(ctx.b, ctx.family)
            lhs = amalgam_norm(image, ctx.space("strong", ctx.u))
            rhs = scale * amalgam_norm(f, ctx.space("strong", ctx.v))
            cases.append(CaseResult(label, lhs, rhs))
    return cases


def _characteristic_on(spec: ExperimentSpec, points: int) -> float:
    grid = Grid(spec.dim, spec.half_width, points)
    w = weight_from_expression(spec.w_expr, grid)
    family = region_family(grid, spec.sizes, shape=spec.shape, center_stride=spec.center_stride)
    return muckenhoupt_characteristic(w, spec.p, family)


def _bump_on(spec: ExperimentSpec, points: int) -> float:
    grid = Grid(spec.dim, spec.half_width, points)
    u = weight_from_expression(spec.u_expr, grid)
    v = weight_from_expression(spec.v_expr, grid)
    family = region_family(grid, spec.sizes, shape=spec.shape, center_stride=spec.center_stride)
    return bump_check(u, v, spec.bump, family).value


def _plateau_gate(name: str, values: Tuple[float, float, float], tol: float = 0.10) -> HypothesisResult:
    lo, mid, hi = values
    d1 = abs(mid - lo) / lo if lo > 0 else math.inf
    d2 = abs(hi - mid) / mid if mid > 0 else math.inf
    growth = hi / lo if lo > 0 else math.inf
    passed = d1 < tol and d2 < tol
    detail = (
        f"refinement drift {d1:.3%}, {d2:.3%}; total growth x{growth:.3f}"
        + ("" if passed else "; the supremum is not settling, treat as divergent")
    )
    return HypothesisResult(name, passed, detail, values + (growth,))


def _gates(spec: ExperimentSpec, ctx: _Context) -> List[HypothesisResult]:
    gates: List[HypothesisResult] = []
    needs_log = spec.theorem in _COMMUTATOR_THEOREMS
    di = dini_integrals(spec.theta)
    if needs_log:
        ok = di.converged
        detail = f"dini={di.dini!r}, log_dini={di.log_dini!r}"
    else:
        ok = math.isfinite(di.dini)
        detail = f"dini={di.dini!r}"
    gates.append(
        HypothesisResult(
            "dini_modulus",
            ok,
            detail,
            (di.dini, di.log_dini),
        )
    )
    if spec.theorem in ("strong", "weak", "commutator", "endpoint"):
        pts = spec.points
        chars = (
            _characteristic_on(spec, pts // 2),
            _characteristic_on(spec, pts),
            _characteristic_on(spec, pts * 2),
        )
        gates.append(_plateau_gate("weight_class_plateau", chars))
    if spec.theorem in _TWO_WEIGHT_THEOREMS:
        pts = spec.points
        bumps = (
            _bump_on(spec, pts // 2),
            _bump_on(spec, pts),
            _bump_on(spec, pts * 2),
        )
        gates.append(_plateau_gate("bump_plateau", bumps))
    if spec.mu_expr is not None:
        profile = doubling_profile(ctx.mu, ctx.family)
        ok = profile.doubling_constant < 1e6 and profile.reverse_doubling_constant > 1.01
        gates.append(
            HypothesisResult(
                "measure_doubling",
                ok,
                f"doubling={profile.doubling_constant:.4g}, "
                f"reverse={profile.reverse_doubling_constant:.4g}",
                (profile.doubling_constant, profile.reverse_doubling_constant),
            )
        )
    if ctx.b is not None:
        norm = bmo_norm(ctx.b, ctx.family)
        gates.append(
            HypothesisResult(
                "symbol_oscillation",
                norm > 0.0 and math.isfinite(norm),
                f"oscillation norm {norm!r}",
                (norm,),
            )
        )
    return gates


def _max_rel_drift(base: List[CaseResult], other: List[CaseResult]) -> float:
    by_label = {c.label: c for c in other}
    worst = 0.0
    for c in base:
        o = by_label.get(c.label)
        if o is None:
            continue
        r0, r1 = c.ratio, o.ratio
        if not (math.isfinite(r0) and math.isfinite(r1)):
            worst = math.inf
            continue
        if r0 == 0.0 and r1 == 0.0:
            continue
        worst = max(worst, abs(r1 - r0) / max(abs(r0), 1e-300))
    return worst


def theorem_experiment(
    spec: ExperimentSpec,
    refinements: int = 1,
    eps_stability: bool = True,
    strict: bool = False,
) -> RatioReport:
    """Run one ratio experiment end to end.

    Gates are computed first; with strict=True a failing gate raises
    HypothesisError, otherwise the report carries the failure and the
    cases are still evaluated so divergence studies can see the numbers.
    Stability deltas re-run the cases with the truncation halved and on a
    once-refined grid.
    """
    grid = Grid(spec.dim, spec.half_width, spec.points)
    ctx = _Context(spec, grid)
    gates = _gates(spec, ctx)
    if strict:
        for g in gates:
            if not g.passed:
                raise HypothesisError(g.name, g.detail)
    cases = _run_cases(ctx)

    stability: dict = {}
    if eps_stability and spec.eps_nodes > 2:
        half_spec = replace(spec, eps_nodes=max(2, spec.eps_nodes // 2))
        half_cases = _run_cases(_Context(half_spec, grid))
        stability["epsilon_halving"] = _max_rel_drift(cases, half_cases)
    if refinements >= 1:
        # double eps_nodes with the point count so the physical truncation
        # radius stays fixed and the delta isolates discretization error
        fine_spec = replace(spec, points=spec.points * 2, eps_nodes=spec.eps_nodes * 2)
        fine_cases = _run_cases(_Context(fine_spec, grid.refined()))
        stability["grid_refinement"] = _max_rel_drift(cases, fine_cases)

    metadata = {
        "dim": spec.dim,
        "half_width": spec.half_width,
        "points": spec.points,
        "kernel": spec.kernel_tag,
        "theta": {"tag": spec.theta.tag, "param": spec.theta.param},
        "eps_nodes": spec.eps_nodes,
        "epsilon": ctx.epsilon,
        "p": spec.p,
        "alpha": spec.alpha,
        "q": spec.q,
        "weights": {"w": spec.w_expr, "u": spec.u_expr, "v": spec.v_expr, "mu": spec.mu_expr},
        "symbol": spec.b_expr if ctx.b is not None else None,
        "shape": spec.shape,
        "sizes": list(spec.sizes),
        "center_stride": spec.center_stride,
        "corpus": [m.label for m in Corpus.generate(
            spec.corpus_n, spec.seed, spec.half_width, spec.corpus_margin, spec.dim
        ).members],
        "seed": spec.seed,
    }
    return RatioReport(
        experiment=spec.theorem,
        cases=tuple(cases),
        hypotheses=tuple(gates),
        metadata=metadata,
        stability=stability,
    )
