import json
import math
from dataclasses import replace

import numpy as np
import pytest

from amalgam import (
    BumpParams,
    CaseResult,
    ConfigurationError,
    Corpus,
    ExperimentSpec,
    HypothesisError,
    Kernel,
    PreconditionError,
    Region,
    ThetaModulus,
    bmo_lemma_check,
    bump_check,
    constant_weight,
    make_grid,
    power_weight,
    region_family,
    sample,
    sharp_domination_check,
    tail_bound_check,
    theorem_experiment,
)

TINY = dict(points=512, center_stride=128, corpus_n=3, sizes=(0.5, 1.0))


def tiny_spec(theorem, **kw):
    args = dict(TINY)
    args.update(kw)
    return ExperimentSpec(theorem, **args)


def test_corpus_deterministic():
    a = Corpus.generate(8, seed=3)
    b = Corpus.generate(8, seed=3)
    assert [m.expression for m in a.members] == [m.expression for m in b.members]
    c = Corpus.generate(8, seed=4)
    assert [m.expression for m in a.members] != [m.expression for m in c.members]


def test_corpus_labels_unique():
    corpus = Corpus.generate(20, seed=0)
    labels = [m.label for m in corpus.members]
    assert len(set(labels)) == 20


def test_corpus_respects_margin(small_grid):
    corpus = Corpus.generate(12, seed=0, half_width=4.0, margin=1.0)
    for label, f in corpus.realize(small_grid):
        outside = np.abs(small_grid.axis) > 3.0 + 1e-9
        assert np.all(f.values[outside] == 0.0), label
        assert np.any(f.values != 0.0), label


def test_case_result_edges():
    ok = CaseResult("a", 1.0, 2.0)
    assert ok.ratio == 0.5
    assert not ok.violation
    zero = CaseResult("b", 0.0, 0.0)
    assert zero.ratio == 0.0
    assert not zero.violation
    bad = CaseResult("c", 1.0, 0.0)
    assert math.isinf(bad.ratio)
    assert bad.violation


def test_bump_check_unit_weights_exact(small_grid):
    fam = region_family(small_grid, sizes=(0.5, 1.0), center_stride=64)
    one = constant_weight(small_grid, 1.0)
    for mode in ("two", "power", "orlicz"):
        res = bump_check(one, one, BumpParams(2.0, 1.5, mode), fam)
        assert res.value == 1.0, mode


def test_bump_check_power_dominates_two(small_grid):
    # r > 1 power means are larger than plain means by Jensen
    fam = region_family(small_grid, sizes=(0.5, 1.0), center_stride=64)
    u = power_weight(small_grid, 0.5)
    two = bump_check(u, u, BumpParams(2.0, 1.0, "two"), fam).value
    power = bump_check(u, u, BumpParams(2.0, 1.5, "power"), fam).value
    assert power >= two * (1 - 1e-12)


def test_bump_params_validation():
    with pytest.raises(ConfigurationError):
        BumpParams(1.0, 1.5, "two")
    with pytest.raises(ConfigurationError):
        BumpParams(2.0, 0.5, "two")
    with pytest.raises(ConfigurationError):
        BumpParams(2.0, 1.5, "median")


def test_tail_bound_zero_inside(desk_grid):
    # f supported inside 2B contributes nothing to the tail
    f = sample("ind(-0.5, 0.5)", desk_grid)
    reg = Region("ball", (0.0,), 0.5)
    res = tail_bound_check(Kernel("hilbert", 1), f, reg, 4 * desk_grid.spacing)
    assert res.lhs == 0.0
    assert res.rhs > 0.0
    assert res.ratio == 0.0


def test_tail_bound_controls_far_mass(desk_grid):
    f = sample("ind(1.0, 3.0)", desk_grid)
    reg = Region("ball", (0.0,), 0.25)
    res = tail_bound_check(Kernel("hilbert", 1), f, reg, 4 * desk_grid.spacing)
    assert res.lhs > 0.0
    assert math.isfinite(res.ratio)
    assert res.ratio < 10.0
    assert len(res.terms) == res.jmax


def test_tail_bound_commutator_scales(desk_grid):
    f = sample("ind(1.0, 3.0)", desk_grid)
    b = sample("logabs", desk_grid)
    fam = region_family(desk_grid, sizes=(0.5, 1.0), center_stride=256)
    reg = Region("ball", (0.0,), 0.25)
    res = tail_bound_check(
        Kernel("hilbert", 1), f, reg, 4 * desk_grid.spacing, b=b, bmo_family=fam
    )
    assert res.lhs > 0.0
    assert math.isfinite(res.ratio)


def test_bmo_lemma_log_growth(desk_grid):
    b = sample("logabs", desk_grid)
    fam = region_family(desk_grid, sizes=(0.125, 0.25, 0.5), centers=[(0.0,)])
    reg = Region("ball", (0.0,), 0.125)
    res = bmo_lemma_check(b, reg, fam, jmax=4)
    assert res.bmo > 0.0
    # means of log over dilated centered balls step by log 2 per doubling
    for j, d in enumerate(res.diffs, start=1):
        assert d == pytest.approx((j + 1) * math.log(2.0), abs=2e-3)
    for g in res.growth_ratios:
        assert 0.0 < g < 1.5
    assert res.weighted_ratios is None


def test_bmo_lemma_weighted(desk_grid):
    b = sample("logabs", desk_grid)
    fam = region_family(desk_grid, sizes=(0.125, 0.25), centers=[(0.0,)])
    reg = Region("ball", (0.0,), 0.125)
    w = power_weight(desk_grid, 0.5)
    res = bmo_lemma_check(b, reg, fam, jmax=3, p=2.0, w=w)
    assert res.weighted_ratios is not None
    assert all(math.isfinite(v) and v > 0 for v in res.weighted_ratios)


def test_bmo_lemma_preconditions(desk_grid):
    b = sample("logabs", desk_grid)
    fam = region_family(desk_grid, sizes=(0.125,), centers=[(0.0,)])
    with pytest.raises(PreconditionError):
        bmo_lemma_check(b, Region("ball", (0.0,), 1.0), fam, jmax=4)  # spills
    const = sample("1.0", desk_grid)
    with pytest.raises(PreconditionError):
        bmo_lemma_check(const, Region("ball", (0.0,), 0.125), fam, jmax=1)


def test_sharp_domination_plain(desk_grid):
    f = sample("ind(-1.0, 1.0)", desk_grid)
    fam = region_family(desk_grid, sizes=(0.5, 1.0), center_stride=512)
    rep = sharp_domination_check(
        Kernel("hilbert", 1), f, fam, 4 * desk_grid.spacing, delta=0.5
    )
    assert rep.kind == "operator"
    assert not rep.violation
    assert 0.0 < rep.max_ratio < 50.0


def test_sharp_domination_commutator(desk_grid):
    f = sample("gauss(0.5, 0.5)", desk_grid)
    b = sample("logabs", desk_grid)
    fam = region_family(desk_grid, sizes=(0.5, 1.0), center_stride=512)
    rep = sharp_domination_check(
        Kernel("hilbert", 1), f, fam, 4 * desk_grid.spacing, delta=0.5, b=b
    )
    assert rep.kind == "commutator"
    assert not rep.violation
    assert math.isfinite(rep.max_ratio)


def test_sharp_domination_validation(desk_grid):
    f = sample("1.0", desk_grid)
    fam = region_family(desk_grid, sizes=(0.5,), center_stride=512)
    with pytest.raises(ConfigurationError):
        sharp_domination_check(Kernel("hilbert", 1), f, fam, 0.01, delta=1.0)
    b = sample("logabs", desk_grid)
    with pytest.raises(ConfigurationError):
        sharp_domination_check(
            Kernel("hilbert", 1), f, fam, 0.01, delta=0.5, b=b, eps_exponent=0.4
        )


def test_experiment_spec_validation():
    with pytest.raises(ConfigurationError):
        ExperimentSpec("nope")
    with pytest.raises(ConfigurationError):
        ExperimentSpec("weak", p=2.0)
    with pytest.raises(ConfigurationError):
        ExperimentSpec("strong", p=1.0)
    with pytest.raises(ConfigurationError):
        ExperimentSpec("strong", eps_nodes=1)


def test_strong_experiment_report():
    spec = tiny_spec("strong")
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    assert report.experiment == "strong"
    assert len(report.cases) == 3
    assert report.violations == ()
    assert report.hypotheses_ok
    assert math.isfinite(report.max_ratio)
    assert report.argmax_label
    gate_names = [h.name for h in report.hypotheses]
    assert "dini_modulus" in gate_names
    assert "weight_class_plateau" in gate_names


def test_experiment_stability_fields():
    spec = tiny_spec("strong")
    report = theorem_experiment(spec, refinements=1, eps_stability=True)
    assert "epsilon_halving" in report.stability
    assert "grid_refinement" in report.stability
    assert report.stability["grid_refinement"] < 0.5


def test_endpoint_lambda_labels():
    spec = tiny_spec("endpoint", p=1.0, alpha=1.0, q=4.0, lambda_factors=(0.5, 2.0))
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    labels = [c.label for c in report.cases]
    assert len(labels) == 6
    assert all("@x" in lab for lab in labels)
    assert all(c.lam is not None for c in report.cases)


def test_commutator_gates_include_symbol():
    spec = tiny_spec("commutator")
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    names = [h.name for h in report.hypotheses]
    assert "symbol_oscillation" in names


def test_two_weight_gates_include_bump():
    spec = tiny_spec("two_weight_strong", u_expr="r**0.5", v_expr="r**0.5")
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    names = [h.name for h in report.hypotheses]
    assert "bump_plateau" in names
    assert report.violations == ()


def test_measure_gate_runs_when_mu_given():
    spec = tiny_spec("strong", mu_expr="1.0")
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    names = [h.name for h in report.hypotheses]
    assert "measure_doubling" in names


def test_strict_mode_raises_on_divergent_weight():
    # |x|^2 sits outside every p = 2 class, so the plateau gate trips
    spec = tiny_spec("strong", w_expr="r**2.0")
    with pytest.raises(HypothesisError):
        theorem_experiment(spec, refinements=0, eps_stability=False, strict=True)
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    assert not report.hypotheses_ok


def test_report_serialization_roundtrip():
    spec = tiny_spec("weak", p=1.0, alpha=1.0, q=4.0)
    report = theorem_experiment(spec, refinements=0, eps_stability=False)
    blob = json.dumps(report.to_dict(), sort_keys=True)
    parsed = json.loads(blob)
    assert parsed["experiment"] == "weak"
    assert len(parsed["cases"]) == 3
    rows = report.csv_rows()
    assert rows[0] == ["label", "lhs", "rhs", "ratio", "lam", "violation"]
    assert len(rows) == 1 + len(report.cases)


def test_report_handles_infinite_ratio():
    rep_cases = (CaseResult("x", 1.0, 0.0),)
    from amalgam import RatioReport

    report = RatioReport("strong", rep_cases, (), {}, {})
    blob = json.dumps(report.to_dict())
    assert "inf" in blob
    assert report.violations == ("x",)
