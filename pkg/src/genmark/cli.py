"""Command-line entry point: ``genmark <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 computation failure (degenerate
distribution, grid cap, non-chain, certification), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

from . import domain as dm
from . import io
from . import kernel as kn
from . import market as mk
from . import preorder as po
from .errors import DegenerateDistribution, GenmarkError, ValidationError

log = logging.getLogger("genmark")

RELATION_TEXT = {
    po.Relation.EQUIVALENT: "equivalent",
    po.Relation.X_BELOW_Y: "strictly dominated",
    po.Relation.Y_BELOW_X: "strictly dominates",
    po.Relation.INCOMPARABLE: "incomparable",
}


def _emit(record: dict) -> None:
    json.dump(record, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _settings(args) -> dict:
    """Merge a config file (if any) with command-line flags; flags win."""
    cfg = io.read_config(args.config) if getattr(args, "config", None) else {}
    flag_map = {
        "market": "market", "domain": "domain.kind", "n": "domain.n", "grid": "domain.N",
        "samples": "domain.samples", "seed": "domain.seed", "center": "domain.center",
        "radius": "domain.radius", "preset": "preset", "epsilon": "epsilon", "ell": "sd.ell",
        "samples_per_interval": "sd.samples", "out": "output.frontier", "plot": "output.plot",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "objective", None):
        cfg["objective"] = list(args.objective)
    return cfg


def _market(cfg: dict) -> mk.ScenarioMarket:
    if "market" not in cfg:
        raise ValidationError("no market given (--market or 'market' in the config)")
    return io.read_market_csv(cfg["market"])


def _objective_config(cfg: dict) -> dm.ObjectiveConfig:
    preset = cfg.get("preset")
    objectives = cfg.get("objective")
    if preset is not None and objectives:
        raise ValidationError("give either a preset or explicit objectives, not both")
    if preset is None and not objectives:
        preset = "markowitz"
    ell = cfg.get("sd.ell")
    return dm.ObjectiveConfig(
        preset=preset,
        objectives=tuple(io.parse_objective(o) for o in objectives) if objectives else None,
        epsilon=float(cfg.get("epsilon", 1e-9)),
        sd_ell=int(ell) if ell is not None else None,
    )


def _domain(cfg: dict, market: mk.ScenarioMarket) -> dm.DomainSpec:
    n = int(cfg.get("domain.n", market.asset_count))
    if n != market.asset_count:
        raise ValidationError(f"domain has n={n} but the market has {market.asset_count} assets")
    kind = cfg.get("domain.kind", "simplex")
    center = cfg.get("domain.center")
    if isinstance(center, str):
        center = io.parse_weights(center)
    radius = cfg.get("domain.radius")
    samples = cfg.get("domain.samples")
    grid = cfg.get("domain.N")
    if samples is None and grid is None:
        grid = 10
    return dm.DomainSpec(
        kind=kind,
        n=n,
        center=center,
        radius=float(radius) if radius is not None else None,
        grid=int(grid) if grid is not None else None,
        samples=int(samples) if samples is not None else None,
        seed=int(cfg.get("domain.seed", 0)),
    )


def _portfolios(weight_args, market: mk.ScenarioMarket, count: Optional[int] = None) -> list[mk.Portfolio]:
    if not weight_args or (count is not None and len(weight_args) != count):
        raise ValidationError(f"expected {count or 'at least one'} --weights argument(s)")
    out = []
    for text in weight_args:
        x = mk.Portfolio(io.parse_weights(text))
        if len(x) != market.asset_count:
            raise ValidationError(f"weights {text!r} have {len(x)} entries, market has {market.asset_count} assets")
        out.append(x)
    return out


def cmd_analyze(args) -> int:
    cfg = _settings(args)
    market = _market(cfg)
    (x,) = _portfolios(args.weights, market, 1)
    dist = mk.return_distribution(market, x)
    record = {
        "weights": list(x.weights),
        "mean": mk.expected_return(market, x),
        "variance": mk.variance(market, x),
    }
    for name, fn in (("skewness", mk.dist_skewness), ("excess_kurtosis", mk.dist_excess_kurtosis)):
        try:
            record[name] = fn(dist)
        except DegenerateDistribution:
            record[name] = "undefined (zero variance)"
    record["distribution"] = [
        {"value": float(s), "mass": float(w)} for s, w in zip(dist.support, dist.masses)
    ]
    _emit(record)
    return 0


def _preorder_for(cfg: dict, market, portfolios):
    return dm.build_preorder(_objective_config(cfg), market, portfolios)


def cmd_relate(args) -> int:
    cfg = _settings(args)
    market = _market(cfg)
    x, y = _portfolios(args.weights, market, 2)
    preorder = _preorder_for(cfg, market, [x, y])
    verdict = po.relate(preorder, x, y)
    _emit({
        "x": list(x.weights),
        "y": list(y.weights),
        "relation": verdict.relation.value,
        "verdict": f"x {RELATION_TEXT[verdict.relation]}" + (" by y" if verdict.relation is po.Relation.X_BELOW_Y else ""),
        "witness": verdict.witness,
        "witness_objective": preorder.labels[verdict.witness] if verdict.witness is not None else None,
        "objectives": preorder.labels,
        "x_values": po.evaluate(preorder, x).tolist(),
        "y_values": po.evaluate(preorder, y).tolist(),
    })
    return 0


def _plot_columns(preorder: po.PreorderInstance, x_name, y_name) -> tuple[int, int]:
    labels = preorder.labels

    def find(name):
        if name not in labels:
            raise ValidationError(f"unknown plot column {name!r}; objectives are {labels}")
        return labels.index(name)

    nu = len(preorder.u_family)
    x_col = find(x_name) if x_name else (nu if preorder.v_family else 0)
    y_col = find(y_name) if y_name else 0
    return x_col, y_col


def cmd_frontier(args) -> int:
    cfg = _settings(args)
    market = _market(cfg)
    spec = _domain(cfg, market)
    cands = dm.candidates(spec)
    preorder = _preorder_for(cfg, market, cands)
    result = po.maximal_set(preorder, cands, workers=args.threads)
    out = cfg.get("output.frontier")
    io.write_frontier(out if out else sys.stdout, cands, result, spec.n)
    plot = cfg.get("output.plot")
    if plot:
        x_col, y_col = _plot_columns(preorder, args.plot_x, args.plot_y)
        io.write_plot(plot, result, x_col, y_col)
    if out:
        _emit({
            "candidates": len(cands),
            "maximal": len(result.maximal_indices),
            "objectives": preorder.labels,
            "frontier": out,
            "plot": plot,
        })
    return 0


def cmd_chain(args) -> int:
    cfg = _settings(args)
    market = _market(cfg)
    chain = _portfolios(args.weights, market)
    preorder = _preorder_for(cfg, market, chain)
    report = po.chain_report(preorder, chain)
    record = report.as_dict()
    record["objectives"] = preorder.labels
    record["upper_bound_weights"] = list(chain[report.upper_bound].weights)
    _emit(record)
    return 0


def cmd_sdom(args) -> int:
    cfg = _settings(args)
    market = _market(cfg)
    x, y = _portfolios(args.weights, market, 2)
    ell = int(cfg.get("sd.ell", 1))
    samples = int(cfg.get("sd.samples", 16))
    verdict = mk.sd_compare(mk.return_distribution(market, x), mk.return_distribution(market, y), ell, samples)
    _emit({"x": list(x.weights), "y": list(y.weights), "ell": ell, "verdict": verdict.value,
           "exact": ell <= 2})
    return 0


def cmd_kernel(args) -> int:
    inst = kn.KernelInstance(io.read_kernel_csv(args.matrix))
    eps = float(args.epsilon) if args.epsilon is not None else 1e-9
    cert = kn.kernel_maximal_certify(inst, eps)
    _emit({
        "size": inst.size,
        "maximal_indices": list(cert.maximal_indices),
        "certificates": [
            {"m": c.m, "p": c.p, "attained_max": c.attained_max, "attained_min": c.attained_min, "ok": c.ok}
            for c in cert.certificates
        ],
    })
    return 0


def cmd_gen(args) -> int:
    if args.out is None:
        raise ValidationError("gen needs --out")
    market = io.generate_market(args.n or 3, args.scenarios, args.seed or 0, args.low, args.high)
    io.write_market_csv(market, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genmark", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, weights=True, objectives=True):
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--market", help="scenario CSV")
        if weights:
            p.add_argument("--weights", action="append", help="comma-separated portfolio weights (repeatable)")
        if objectives:
            p.add_argument("--preset")
            p.add_argument("--objective", action="append",
                           help="'<maximize|minimize> <Kind> [ell=..] [t=..] [policy=..]' (repeatable)")
            p.add_argument("--epsilon", type=float)
            p.add_argument("--ell", type=int, help="order for sd presets")

    p = sub.add_parser("analyze", help="return statistics of one portfolio")
    common(p, objectives=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("relate", help="dominance verdict between two portfolios")
    common(p)
    p.set_defaults(func=cmd_relate)

    p = sub.add_parser("frontier", help="maximal set over a discretized domain")
    common(p, weights=False)
    p.add_argument("--domain", choices=["simplex", "ball"])
    p.add_argument("--n", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--center", help="comma-separated ball center")
    p.add_argument("--radius", type=float)
    p.add_argument("--out", help="frontier CSV (default stdout)")
    p.add_argument("--plot", help="plot-data TSV")
    p.add_argument("--plot-x", help="objective label for the plot x column")
    p.add_argument("--plot-y", help="objective label for the plot y column")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("chain", help="chain statistics and nesting checks")
    common(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("sdom", help="stochastic dominance between two portfolios")
    common(p, objectives=False)
    p.add_argument("--ell", type=int)
    p.add_argument("--samples-per-interval", type=int)
    p.set_defaults(func=cmd_sdom)

    p = sub.add_parser("kernel", help="maximal elements of a kernel preorder, with certificates")
    p.add_argument("--matrix", required=True, help="square CSV matrix, entry [x][p] = f(x, p)")
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("gen", help="write a seeded synthetic scenario CSV")
    p.add_argument("--n", type=int, default=3, help="assets")
    p.add_argument("--scenarios", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--low", type=float, default=-0.1)
    p.add_argument("--high", type=float, default=0.2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GenmarkError as exc:
        print(f"genmark: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"genmark: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"genmark: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
