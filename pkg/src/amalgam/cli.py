"""Command line interface.

Every command reads a JSON config describing the grid, weights, and task
parameters, runs the corresponding computation, and prints a JSON result.
The verify command additionally writes report.json and cases.csv when an
output directory is given.

Exit codes: 0 on success, 1 on configuration or precondition problems,
2 when a hypothesis gate fails or a verification run records violations.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Optional

from .errors import (
    AmalgamError,
    ConfigurationError,
    ExpressionError,
    HypothesisError,
    PreconditionError,
)
from .expressions import EXPRESSION_LANGUAGE
from .grid import Grid, Region, region_family, sample, write_function_csv
from .harness import (
    THEOREMS,
    BumpParams,
    ExperimentSpec,
    bmo_lemma_check,
    bump_check,
    theorem_experiment,
)
from .operators import Kernel, ThetaModulus, apply_operator, dini_integrals
from .orlicz import YoungFunction, holder_check, luxemburg_norm
from .spaces import AmalgamSpec, SpaceParams, amalgam_norm_detail, bmo_norm
from .weights import doubling_profile, muckenhoupt_characteristic, weight_from_expression

__all__ = ["main"]


def _check_keys(block: dict, allowed: set, path: str) -> None:
    if not isinstance(block, dict):
        raise ConfigurationError(f"{path}: expected an object")
    for key in block:
        if key not in allowed:
            raise ConfigurationError(f"{path}: unknown field {key!r}")


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError("config root must be a JSON object")
    return cfg


def _build_grid(cfg: dict) -> Grid:
    block = cfg.get("grid", {})
    _check_keys(block, {"dim", "half_width", "points_per_axis"}, "grid")
    return Grid(
        int(block.get("dim", 1)),
        float(block.get("half_width", 4.0)),
        int(block.get("points_per_axis", 4096)),
    )


def _build_family(cfg: dict, grid: Grid):
    block = cfg.get("family", {})
    _check_keys(block, {"shape", "sizes", "center_stride"}, "family")
    return region_family(
        grid,
        tuple(float(s) for s in block.get("sizes", (0.25, 0.5, 1.0, 2.0))),
        shape=block.get("shape", "ball"),
        center_stride=int(block.get("center_stride", max(1, grid.points_per_axis // 16))),
    )


def _parse_exponent(value) -> float:
    if value in ("inf", None):
        return math.inf
    return float(value)


def _build_theta(block) -> ThetaModulus:
    if block is None:
        return ThetaModulus.power(1.0)
    _check_keys(block, {"tag", "param"}, "theta")
    return ThetaModulus(block.get("tag", "power"), float(block.get("param", 1.0)))


def _print(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")


def _cmd_language(_args) -> int:
    sys.stdout.write(EXPRESSION_LANGUAGE)
    return 0


def _cmd_norm(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"grid", "family", "weights", "function", "space"}, "config")
    grid = _build_grid(cfg)
    family = _build_family(cfg, grid)
    if "function" not in cfg:
        raise ConfigurationError("norm needs a 'function' expression")
    f = sample(cfg["function"], grid)
    wblock = cfg.get("weights", {})
    _check_keys(wblock, {"inner", "outer"}, "weights")
    inner = wblock.get("inner")
    outer = wblock.get("outer")
    sblock = cfg.get("space", {})
    _check_keys(sblock, {"p", "alpha", "q", "variant"}, "space")
    params = SpaceParams(
        float(sblock.get("p", 1.0)),
        float(sblock.get("alpha", 2.0)),
        _parse_exponent(sblock.get("q", "inf")),
    )
    spec = AmalgamSpec(
        params,
        family,
        None if inner is None else weight_from_expression(inner, grid),
        None if outer is None else weight_from_expression(outer, grid),
        sblock.get("variant", "strong"),
    )
    detail = amalgam_norm_detail(f, spec)
    _print(
        {
            "value": detail.value,
            "argmax_size": detail.argmax_size,
            "argmax_center": list(detail.argmax_center),
        }
    )
    return 0


def _cmd_weights(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"grid", "family", "weight", "p"}, "config")
    grid = _build_grid(cfg)
    family = _build_family(cfg, grid)
    if "weight" not in cfg:
        raise ConfigurationError("weights needs a 'weight' expression")
    w = weight_from_expression(cfg["weight"], grid)
    p = float(cfg.get("p", 2.0))
    profile = doubling_profile(w, family)
    _print(
        {
            "characteristic": muckenhoupt_characteristic(w, p, family),
            "p": p,
            "doubling_constant": profile.doubling_constant,
            "reverse_doubling_constant": profile.reverse_doubling_constant,
            "comparison_exponent": profile.comparison_exponent,
            "comparison_constant": profile.comparison_constant,
        }
    )
    return 0


def _cmd_operator(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"grid", "function", "symbol", "operator"}, "config")
    grid = _build_grid(cfg)
    if "function" not in cfg:
        raise ConfigurationError("operator needs a 'function' expression")
    f = sample(cfg["function"], grid)
    block = cfg.get("operator", {})
    _check_keys(block, {"kernel", "theta", "eps_nodes", "component"}, "operator")
    kernel = Kernel(
        block.get("kernel", "hilbert"),
        grid.dim,
        _build_theta(block.get("theta")),
        component=int(block.get("component", 0)),
    )
    eps = int(block.get("eps_nodes", 4)) * grid.spacing
    b = sample(cfg["symbol"], grid) if "symbol" in cfg else None
    image = apply_operator(kernel, f, eps, b)
    di = dini_integrals(kernel.theta)
    summary = {
        "epsilon": eps,
        "kernel": kernel.tag,
        "dini": di.dini,
        "log_dini": di.log_dini,
        "max_abs": float(max(abs(v) for v in image.values)),
    }
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "image.csv")
        write_function_csv(image, path)
        summary["image_csv"] = path
    _print(summary)
    return 0


def _cmd_holder(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"grid", "function", "function2", "weight", "pairing", "p"}, "config")
    grid = _build_grid(cfg)
    for key in ("function", "function2"):
        if key not in cfg:
            raise ConfigurationError(f"holder needs a {key!r} expression")
    f = sample(cfg["function"], grid)
    g = sample(cfg["function2"], grid)
    weight = None
    if "weight" in cfg:
        weight = weight_from_expression(cfg["weight"], grid)
    result = holder_check(
        f, g, pairing=cfg.get("pairing", "llogl_expl"), weight=weight, p=float(cfg.get("p", 2.0))
    )
    _print(
        {
            "pairing": result.pairing,
            "lhs": result.lhs,
            "rhs": result.rhs,
            "ratio": result.ratio,
            "holds": result.holds,
        }
    )
    return 0 if result.holds else 2


def _cmd_bump(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"grid", "family", "weights", "bump"}, "config")
    grid = _build_grid(cfg)
    family = _build_family(cfg, grid)
    wblock = cfg.get("weights", {})
    _check_keys(wblock, {"u", "v"}, "weights")
    u = weight_from_expression(wblock.get("u", "1.0"), grid)
    v = weight_from_expression(wblock.get("v", "1.0"), grid)
    block = cfg.get("bump", {})
    _check_keys(block, {"p", "r", "mode"}, "bump")
    params = BumpParams(
        float(block.get("p", 2.0)), float(block.get("r", 1.5)), block.get("mode", "orlicz")
    )
    result = bump_check(u, v, params, family)
    _print(
        {
            "value": result.value,
            "mode": result.mode,
            "argmax_center": list(result.argmax_center),
            "argmax_size": result.argmax_size,
        }
    )
    return 0


def _cmd_bmo(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"grid", "family", "symbol", "lemma"}, "config")
    grid = _build_grid(cfg)
    family = _build_family(cfg, grid)
    if "symbol" not in cfg:
        raise ConfigurationError("bmo needs a 'symbol' expression")
    b = sample(cfg["symbol"], grid)
    out = {"oscillation_norm": bmo_norm(b, family)}
    block = cfg.get("lemma")
    if block is not None:
        _check_keys(block, {"center", "size", "jmax", "p", "weight"}, "lemma")
        region = Region(
            "ball",
            tuple(float(c) for c in block.get("center", [0.0] * grid.dim)),
            float(block.get("size", grid.half_width / 32.0)),
        )
        w = None
        if "weight" in block:
            w = weight_from_expression(block["weight"], grid)
        result = bmo_lemma_check(
            b,
            region,
            family,
            jmax=int(block.get("jmax", 4)),
            p=float(block["p"]) if "p" in block else None,
            w=w,
        )
        out["lemma"] = {
            "diffs": list(result.diffs),
            "growth_ratios": list(result.growth_ratios),
            "weighted_ratios": None
            if result.weighted_ratios is None
            else list(result.weighted_ratios),
        }
    _print(out)
    return 0


_EXPERIMENT_KEYS = {
    "dim",
    "half_width",
    "points",
    "kernel",
    "theta",
    "component",
    "eps_nodes",
    "p",
    "alpha",
    "q",
    "weights",
    "symbol",
    "shape",
    "sizes",
    "center_stride",
    "corpus_n",
    "corpus_margin",
    "seed",
    "lambda_factors",
    "bump",
}


def _build_experiment(theorem: str, cfg: dict, seed: Optional[int]) -> ExperimentSpec:
    block = cfg.get("experiment", {})
    _check_keys(block, _EXPERIMENT_KEYS, "experiment")
    wblock = block.get("weights", {})
    _check_keys(wblock, {"w", "u", "v", "mu"}, "experiment.weights")
    bump_block = block.get("bump")
    if bump_block is not None:
        _check_keys(bump_block, {"p", "r", "mode"}, "experiment.bump")
    kwargs = dict(
        theorem=theorem,
        dim=int(block.get("dim", 1)),
        half_width=float(block.get("half_width", 4.0)),
        points=int(block.get("points", 4096)),
        kernel_tag=block.get("kernel", "hilbert"),
        theta=_build_theta(block.get("theta")),
        riesz_component=int(block.get("component", 0)),
        eps_nodes=int(block.get("eps_nodes", 4)),
        p=float(block.get("p", 1.0 if theorem in ("weak", "endpoint", "two_weight_endpoint") else 2.0)),
        alpha=float(block.get("alpha", 2.5)),
        q=_parse_exponent(block.get("q", 8.0)),
        w_expr=wblock.get("w", "1.0"),
        u_expr=wblock.get("u", "1.0"),
        v_expr=wblock.get("v", "1.0"),
        mu_expr=wblock.get("mu"),
        b_expr=block.get("symbol", "logabs"),
        shape=block.get("shape", "ball"),
        sizes=tuple(float(s) for s in block.get("sizes", (0.25, 0.5, 1.0, 2.0))),
        center_stride=int(block.get("center_stride", 256)),
        corpus_n=int(block.get("corpus_n", 6)),
        corpus_margin=float(block.get("corpus_margin", 1.0)),
        seed=int(block.get("seed", 0)),
    )
    if "lambda_factors" in block:
        kwargs["lambda_factors"] = tuple(float(x) for x in block["lambda_factors"])
    if bump_block is not None:
        kwargs["bump"] = BumpParams(
            float(bump_block.get("p", 2.0)),
            float(bump_block.get("r", 1.5)),
            bump_block.get("mode", "orlicz"),
        )
    if seed is not None:
        kwargs["seed"] = seed
    if kwargs["alpha"] < kwargs["p"]:
        kwargs["alpha"] = kwargs["p"]
    return ExperimentSpec(**kwargs)


def _cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"experiment"}, "config")
    spec = _build_experiment(args.theorem, cfg, args.seed)
    report = theorem_experiment(
        spec, refinements=args.refine, eps_stability=not args.no_eps_stability, strict=args.strict
    )
    payload = report.to_dict()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(args.out, "cases.csv"), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerows(report.csv_rows())
    for h in report.hypotheses:
        state = "ok" if h.passed else "FAILED"
        sys.stdout.write(f"hypothesis {h.name}: {state} ({h.detail})\n")
    sys.stdout.write(
        f"experiment {report.experiment}: max ratio {report.max_ratio!r} "
        f"at {report.argmax_label or 'n/a'}\n"
    )
    for key, value in sorted(report.stability.items()):
        sys.stdout.write(f"stability {key}: max ratio drift {value!r}\n")
    if report.violations:
        sys.stdout.write(f"violations: {', '.join(report.violations)}\n")
        return 2
    if not report.hypotheses_ok:
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amalgam",
        description="numerical toolkit for weighted amalgam space estimates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_lang = sub.add_parser("language", help="print the expression language reference")
    p_lang.set_defaults(func=_cmd_language)

    for name, fn, needs_out in (
        ("norm", _cmd_norm, False),
        ("weights", _cmd_weights, False),
        ("holder", _cmd_holder, False),
        ("bump", _cmd_bump, False),
        ("bmo", _cmd_bmo, False),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to a JSON config")
        sp.set_defaults(func=fn)

    p_op = sub.add_parser("operator", help="apply a truncated operator to a function")
    p_op.add_argument("--config", required=True)
    p_op.add_argument("--out", default=None, help="directory for the image CSV")
    p_op.set_defaults(func=_cmd_operator)

    p_ver = sub.add_parser("verify", help="run a ratio experiment for one estimate")
    p_ver.add_argument("theorem", choices=THEOREMS)
    p_ver.add_argument("--config", default=None)
    p_ver.add_argument("--out", default=None, help="directory for report.json and cases.csv")
    p_ver.add_argument("--refine", type=int, default=1, help="grid refinement passes")
    p_ver.add_argument("--seed", type=int, default=None, help="override the corpus seed")
    p_ver.add_argument("--strict", action="store_true", help="fail fast on hypothesis gates")
    p_ver.add_argument(
        "--no-eps-stability",
        action="store_true",
        help="skip the truncation halving pass",
    )
    p_ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HypothesisError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ConfigurationError, ExpressionError, PreconditionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except AmalgamError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
