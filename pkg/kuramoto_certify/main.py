import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from kuramoto_certify.config import Config
from kuramoto_certify.engines.graph_engine import GraphEngine
from kuramoto_certify.exceptions import (
    ConsistencyViolation,
    DomainError,
    IntegrationError,
    KuramotoError,
    NumericError,
    RefinementError,
)
from kuramoto_certify.schemas import ExperimentConfig
from kuramoto_certify.tools import (
    run_basin,
    run_certify,
    run_chain_sweep,
    run_figure1,
    run_pattern_search,
    run_razor_edge,
    run_region_scan,
)
from kuramoto_certify.utils.file_utils import FileUtils
from kuramoto_certify.utils.json_utils import JSONUtils

logger = logging.getLogger("kuramoto_certify")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CONSISTENCY = 4

# 子命令名 -> ExperimentConfig.experiment
EXPERIMENTS = {
    "figure1": "figure1",
    "razor-edge": "razor_edge",
    "pattern-search": "pattern_search",
    "basin": "basin",
    "certify": "certify",
    "region-scan": "region_scan",
}


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s:%(name)s:%(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuramoto-certify",
        description="Synchronization certificates for identical Kuramoto oscillator networks",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config (unknown keys rejected)")
    common.add_argument("--n", type=int, help="single network size (overrides n_range)")
    common.add_argument("--trials", type=int, help="basin-sampling trials")
    common.add_argument("--seed", type=int, help="64-bit seed for the counter-based RNG")
    common.add_argument("--out", help="output file path")
    common.add_argument("--verbose", "-v", action="store_true", help="DEBUG logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure1", parents=[common], help="synchrony bound vs densest stable circulant pattern per n")
    p.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--budget", type=int, help="circulant graphs examined per n")

    p = sub.add_parser("razor-edge", parents=[common], help="q=1 twisted state on twin(C4, m)")
    p.add_argument("--m-range", type=int, nargs=2, metavar=("LO", "HI"))

    p = sub.add_parser("pattern-search", parents=[common], help="densest circulant with a stable pattern")
    p.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--budget", type=int)
    p.add_argument("--sweep", action="store_true", help="consistency sweep over circulants with mu_tilde > 3/4")

    p = sub.add_parser("basin", parents=[common], help="Monte-Carlo synchrony fraction")
    p.add_argument("--graph", help="descriptor, e.g. complete:6, cycle:5, circulant:12:1,2,3, twin-c4:3")
    p.add_argument("--graph-file")

    p = sub.add_parser("certify", parents=[common], help="spectrum and certificate report for one state")
    p.add_argument("--graph", help="graph descriptor (alternative to --graph-file)")
    p.add_argument("--graph-file")
    p.add_argument("--state-file")

    p = sub.add_parser("region-scan", parents=[common], help="feasible (rho1, |rho2|) region")
    p.add_argument("--mu-tilde", type=float)
    p.add_argument("--grid-step", type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """默认值 <- --config 文件 <- 命令行参数"""
    experiment = EXPERIMENTS[args.command]
    if args.config:
        cfg = JSONUtils.load_config(args.config)
        if cfg.experiment != experiment:
            raise DomainError(f"config is for '{cfg.experiment}', not '{experiment}'")
    else:
        cfg = ExperimentConfig(experiment=experiment, seed=Config.SEED, budget=Config.PATTERN_BUDGET)

    updates = {}
    if getattr(args, "n_range", None):
        updates["n_range"] = tuple(args.n_range)
    if args.n is not None:
        updates["n_range"] = (args.n, args.n)
    for flag, key in (
        ("trials", "trials"), ("seed", "seed"), ("out", "output_path"), ("budget", "budget"),
        ("graph", "graph"), ("graph_file", "graph_file"), ("state_file", "state_file"),
        ("mu_tilde", "mu_tilde"), ("grid_step", "grid_step"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "m_range", None):
        updates["m_range"] = tuple(args.m_range)
    if getattr(args, "sweep", False):
        updates["sweep"] = True
    cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **updates})
    Config.apply_overrides(cfg.tolerances)
    return cfg


def default_output(cfg: ExperimentConfig, suffix: str) -> str:
    if cfg.output_path:
        return cfg.output_path
    Config.init_directories()
    return os.path.join(Config.OUTPUT_DIR, f"{cfg.experiment}.{suffix}")


def run(cfg: ExperimentConfig) -> int:
    if cfg.experiment == "figure1":
        run_figure1(cfg.n_range, cfg.budget, default_output(cfg, "csv"))
        return EXIT_OK

    if cfg.experiment == "razor_edge":
        run_razor_edge(cfg.m_range, cfg.trials, cfg.seed, default_output(cfg, "json"))
        return EXIT_OK

    if cfg.experiment == "pattern_search":
        if cfg.sweep:
            report = run_chain_sweep(cfg.n_range[1], cfg.trials, cfg.seed, n_min=cfg.n_range[0])
            JSONUtils.write_json(report, default_output(cfg, "json"))
            print(JSONUtils.dumps(report))
            return EXIT_OK if report.passed else EXIT_CONSISTENCY
        lo, hi = cfg.n_range
        records = [run_pattern_search(n, cfg.budget) for n in range(lo, hi + 1)]
        JSONUtils.write_json(records, default_output(cfg, "json"))
        return EXIT_OK

    if cfg.experiment == "basin":
        if cfg.graph_file:
            g, graph_id = FileUtils.load_graph(cfg.graph_file), cfg.graph_file
        elif cfg.graph:
            g, graph_id = GraphEngine.from_descriptor(cfg.graph), cfg.graph
        else:
            raise DomainError("basin needs --graph or --graph-file")
        estimate = run_basin(g, cfg.trials, cfg.seed, graph_id=graph_id)
        JSONUtils.write_json(estimate, default_output(cfg, "json"))
        print(JSONUtils.dumps(estimate))
        return EXIT_OK

    if cfg.experiment == "certify":
        payload, code = run_certify(cfg.graph_file, cfg.state_file, cfg.graph,
                                    output_path=default_output(cfg, "json"))
        print(JSONUtils.dumps(payload))
        return code

    if cfg.experiment == "region_scan":
        region = run_region_scan(cfg.mu_tilde, cfg.grid_step, default_output(cfg, "json"))
        print(JSONUtils.dumps(region.summary()))
        return EXIT_OK

    raise DomainError(f"unknown experiment {cfg.experiment}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return run(resolve_config(args))
    except ConsistencyViolation as exc:
        logger.error("consistency guard: %s", exc)
        return EXIT_CONSISTENCY
    except (DomainError, ValidationError, json.JSONDecodeError, OSError) as exc:
        logger.error("input error: %s", exc)
        return EXIT_CONFIG
    except (IntegrationError, RefinementError, NumericError) as exc:
        logger.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except KuramotoError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
