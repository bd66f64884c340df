"""``psworkbench`` command line: orbit, delta, measure, classify.

Each verb reads a config (TOML, all keys optional), applies the global
flags on top, and writes its artifacts into ``--out``.  Outputs depend only
on the config, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .dynamics import conservativity_report
from .groups import BudgetExceeded, GroupPreset, InvalidGenerator, OrbitBall, annuli_counts
from .measures import (
    annulus_bound_audit,
    cocycle_audit,
    equivariance_audit,
    ps_histogram,
    shadow_lemma_audit,
    support_minimality_probe,
)
from .reports import (
    limitset_svg,
    write_annuli_csv,
    write_histogram_csv,
    write_json,
    write_orbit_csv,
    write_records_csv,
    write_svg,
)
from .series import InsufficientData, estimate_delta_counting, poincare_report

log = logging.getLogger("psworkbench")

EXIT_CONFIG = 2
EXIT_DATA = 3


def _ball(cfg: RunConfig) -> tuple[GroupPreset, OrbitBall]:
    group = cfg.group()
    ball = group.ball(cfg.radius_for(group), p=cfg.point_p(), q=cfg.point_q())
    return group, ball


def _s_value(cfg: RunConfig, ball: OrbitBall) -> tuple[float, float]:
    delta = estimate_delta_counting(annuli_counts(ball)).value
    s = delta + cfg.margin if cfg.s == "auto" else float(cfg.s)
    return s, delta


def cmd_orbit(cfg: RunConfig) -> list[Path]:
    _, ball = _ball(cfg)
    out = Path(cfg.out)
    return [write_orbit_csv(out / "orbit_ball.csv", ball), write_annuli_csv(out / "annuli.csv", ball)]


def cmd_delta(cfg: RunConfig) -> list[Path]:
    _, ball = _ball(cfg)
    rep = poincare_report(ball, eps_div=cfg.threshold_set().eps_div)
    return [write_json(Path(cfg.out) / "poincare_report.json", {"config": cfg.to_dict(), **rep.to_dict()})]


def cmd_measure(cfg: RunConfig) -> list[Path]:
    group, ball = _ball(cfg)
    out = Path(cfg.out)
    s, delta = _s_value(cfg, ball)
    p, q = cfg.point_p(), cfg.point_q()
    mu_p = ps_histogram(ball, s, p, cfg.bins)
    mu_q = ps_histogram(ball, s, q, cfg.bins)
    coc = cocycle_audit(mu_p, mu_q)
    eq = equivariance_audit(ball, s, p, group.generators[0], cfg.bins)
    shadow = shadow_lemma_audit(ball, mu_p, r=delta)
    annulus = annulus_bound_audit(ball, delta)
    minimal = support_minimality_probe(mu_p, ball)
    head = {"config": cfg.to_dict(), "s": s, "delta_hat": delta}
    return [
        write_histogram_csv(out / "ps_histogram.csv", mu_p),
        write_json(out / "cocycle_audit.json", {**head, **coc.to_dict(), "histogram": mu_p.summary()}),
        write_json(out / "equivariance_audit.json", {**head, "alpha": list(group.generators[0].entries),
                                                     **eq.to_dict()}),
        write_json(out / "shadow_audit.json", {**head, "shadow": shadow.to_dict(),
                                               "annulus_bound": annulus.to_dict(),
                                               "support_minimality": minimal.to_dict()}),
        write_svg(out / "limitset.svg", limitset_svg(mu_p, ball)),
    ]


def cmd_classify(cfg: RunConfig) -> list[Path]:
    group, ball = _ball(cfg)
    s = "auto" if cfg.s == "auto" else float(cfg.s)
    rep = conservativity_report(group, ball.radius, s=s, samples=cfg.samples,
                                thresholds=cfg.threshold_set(), seed=cfg.seed, bins=cfg.bins,
                                p=cfg.point_p(), ball=ball)
    out = Path(cfg.out)
    return [
        write_json(out / "conservativity_report.json", {"config": cfg.to_dict(), **rep.to_dict()}),
        write_records_csv(out / "classification_records.csv", rep.records),
    ]


COMMANDS = {"orbit": cmd_orbit, "delta": cmd_delta, "measure": cmd_measure, "classify": cmd_classify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--preset", help="group preset name")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="sampling seed")
    common.add_argument("--radius", type=float, help="orbit ball radius")
    common.add_argument("--bins", type=int, help="histogram bins (power of two)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="psworkbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__name__.replace("cmd_", ""))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, preset=args.preset, out=args.out, seed=args.seed,
                          radius=args.radius, bins=args.bins)
        if args.preset is not None:
            cfg.generators = None
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidGenerator, OSError) as exc:
        print(f"psworkbench: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InsufficientData, BudgetExceeded) as exc:
        print(f"psworkbench: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
