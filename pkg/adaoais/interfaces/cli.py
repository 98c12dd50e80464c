"""
命令行接口
adaoais run|mse|fixtures|gradcheck|proposals

退出码：0 成功；1 存在发散运行、梯度检验失败或没有可用运行；2 配置错误；3 夹具错误；4 输出错误
"""

import argparse
import asyncio
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from .internal_api import OAISInternalAPI, init_internal_api
from ..config.presets import DEFAULT_MASTER_SEED
from ..config.settings import ExperimentConfig, RuntimeSettings, config_manager
from ..core.proposals import GaussianFamily
from ..core.targets import GaussianSpec
from ..exceptions.errors import (
    ConfigurationError,
    FixtureError,
    OAISError,
    OutputError,
)
from ..features.diagnostics import GRADCHECK_CASES, snis_mse_bound
from ..features.experiment import ExperimentSetup
from ..features.plotting import plot_mse_csv, plot_params, plot_proposals
from ..features.reporting import (
    ensure_dir,
    run_summary,
    trace_filename,
    write_mse_csv,
    write_proposals_csv,
    write_summary,
    write_trace_csv,
)
from ..models.records import RunTrace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_FIXTURE = 3
EXIT_OUTPUT = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaoais", description="Adaptive optimised importance sampling")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration file")
    common.add_argument("--preset", help="named preset, e.g. exp2-adam-fast")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--jobs", type=int, help="worker threads for independent runs")
    common.add_argument("--out", help="output directory")
    common.add_argument("--thin", type=int, help="write every K-th trace record")
    common.add_argument("--force", action="store_true", help="overwrite an existing fixture file")
    common.add_argument("--fixtures", help="fixture JSON path")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run OAIS and write per-run traces")
    sub.add_parser("mse", parents=[common], help="run a sweep and write the MSE curve")
    sub.add_parser("fixtures", parents=[common], help="freeze ground-truth fixtures")
    sub.add_parser("proposals", parents=[common], help="average Beta proposals across runs")
    gradcheck = sub.add_parser("gradcheck", parents=[common], help="check the gradient estimator")
    gradcheck.add_argument("--case", choices=sorted(GRADCHECK_CASES), default="gaussian-optimum")
    gradcheck.add_argument("--samples", type=int, default=100_000)
    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(getattr(logging, level))


def _load_config(api: OAISInternalAPI, args: argparse.Namespace) -> ExperimentConfig:
    text = None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ConfigurationError(f"cannot read configuration file '{args.config}': {e}",
                                     key="config", original_error=e)
    config = api.load_config(text=text, preset=args.preset)
    return config.with_overrides(master_seed=args.seed, output=args.out, thin=args.thin)


def _jobs(args: argparse.Namespace, settings: RuntimeSettings) -> int:
    jobs = args.jobs if args.jobs is not None else settings.jobs
    if jobs < 1:
        raise ConfigurationError(f"jobs must be >= 1, got {jobs}", key="jobs")
    return jobs


def _out_dir(config: ExperimentConfig, settings: RuntimeSettings) -> str:
    return config.output or settings.out_dir


def _experiment_summary(config: ExperimentConfig, setup: ExperimentSetup,
                        traces: Sequence[RunTrace]) -> Dict[str, Any]:
    runs = []
    for trace in sorted(traces, key=lambda t: t.run_index):
        entry = run_summary(trace, setup.family)
        if trace.completed and trace.final is not None:
            bound = snis_mse_bound(setup.target, setup.family, trace.final.theta, setup.phi.sup_norm,
                                   setup.n_particles)
            if bound is not None:
                entry["rho_final"], entry["mse_bound"] = bound
        runs.append(entry)
    completed = sum(1 for t in traces if t.completed)
    return {
        "experiment": config.name,
        "target": config.target,
        "family": config.proposal.family,
        "optimizer": config.optimizer.name,
        "rate": config.optimizer.rate,
        "schedule": config.optimizer.schedule,
        "n_particles": config.n_particles,
        "iterations": config.iterations,
        "master_seed": config.master_seed,
        "thin": config.thin,
        "runs": runs,
        "completed_runs": completed,
        "diverged_runs": len(traces) - completed,
    }


def _gaussian_reference(setup: ExperimentSetup) -> Optional[Dict[str, float]]:
    spec = setup.target.spec
    if isinstance(spec, GaussianSpec) and isinstance(setup.family, GaussianFamily) and not setup.family.mean_only:
        return setup.family.param_columns(setup.family.pack(spec))
    return None


def cmd_run(api: OAISInternalAPI, args: argparse.Namespace, settings: RuntimeSettings) -> int:
    """执行全部运行，写出每次运行的轨迹、摘要与参数轨迹图"""
    config = _load_config(api, args)
    jobs = _jobs(args, settings)
    setup, traces = asyncio.run(api.run_experiment(config, jobs))

    out = ensure_dir(_out_dir(config, settings))
    for trace in traces:
        write_trace_csv(os.path.join(out, trace_filename(trace.run_index)), trace, setup.family, config.thin)
    summary = _experiment_summary(config, setup, traces)
    write_summary(os.path.join(out, "summary.json"), summary)
    plot_params(traces, setup.family, os.path.join(out, "params.svg"), _gaussian_reference(setup))
    logger.info(f"wrote {len(traces)} traces to {out}")
    return EXIT_OK if summary["diverged_runs"] == 0 else EXIT_FAILED


def cmd_mse(api: OAISInternalAPI, args: argparse.Namespace, settings: RuntimeSettings) -> int:
    """对夹具真值执行 MSE 扫描，写出 MSE 表与图"""
    config = _load_config(api, args)
    jobs = _jobs(args, settings)
    fixtures_path = args.fixtures or settings.fixtures_path
    setup, entry, curve, traces = asyncio.run(api.mse_sweep(config, fixtures_path, jobs))

    out = ensure_dir(_out_dir(config, settings))
    csv_path = write_mse_csv(os.path.join(out, "mse.csv"), curve)
    plot_mse_csv(csv_path, os.path.join(out, "mse.svg"), config.n_particles, title=config.name)
    summary = _experiment_summary(config, setup, traces)
    final_mse = float(curve.mse[-1]) if curve.runs_used else None
    summary.update(truth=entry.truth, truth_generator=entry.generator, runs_used=curve.runs_used,
                   final_mse=final_mse, inverse_n=1.0 / config.n_particles)
    write_summary(os.path.join(out, "summary.json"), summary)
    if curve.runs_used == 0:
        logger.error("no completed runs, MSE is undefined")
        return EXIT_FAILED
    logger.info(f"final MSE {final_mse:.4g} over {curve.runs_used} runs (1/N = {1.0 / config.n_particles:.4g})")
    return EXIT_OK if curve.diverged_runs == 0 else EXIT_FAILED


def cmd_fixtures(api: OAISInternalAPI, args: argparse.Namespace, settings: RuntimeSettings) -> int:
    """计算并冻结真值夹具"""
    path = args.fixtures or settings.fixtures_path
    truths = asyncio.run(api.freeze_fixtures(path, force=args.force))
    for name, entry in sorted(truths.items()):
        print(f"{name}: {entry.truth:.12g} ({entry.generator})")
    return EXIT_OK


def cmd_gradcheck(api: OAISInternalAPI, args: argparse.Namespace, settings: RuntimeSettings) -> int:
    """梯度无偏性与评分函数检验"""
    if args.samples < 2:
        raise ConfigurationError(f"samples must be >= 2, got {args.samples}", key="samples")
    seed = args.seed if args.seed is not None else DEFAULT_MASTER_SEED
    report = asyncio.run(api.gradcheck(args.case, args.samples, seed))
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_proposals(api: OAISInternalAPI, args: argparse.Namespace, settings: RuntimeSettings) -> int:
    """Beta 提议的演化：写出平均参数表与密度图"""
    config = _load_config(api, args)
    jobs = _jobs(args, settings)
    setup, snapshots = asyncio.run(api.proposal_evolution(config, jobs))

    out = ensure_dir(_out_dir(config, settings))
    write_proposals_csv(os.path.join(out, "proposals.csv"), snapshots)
    plot_proposals(snapshots, setup.target, os.path.join(out, "proposals.svg"))
    metrics = api.monitor.get_metrics()
    return EXIT_OK if metrics.diverged == 0 else EXIT_FAILED


COMMANDS: Dict[str, Callable[[OAISInternalAPI, argparse.Namespace, RuntimeSettings], int]] = {
    "run": cmd_run,
    "mse": cmd_mse,
    "fixtures": cmd_fixtures,
    "gradcheck": cmd_gradcheck,
    "proposals": cmd_proposals,
}


def main(argv: Optional[List[str]] = None) -> int:
    """命令行入口，返回退出码"""
    args = build_parser().parse_args(argv)
    try:
        settings = config_manager.load_runtime_settings()
    except ConfigurationError as e:
        _configure_logging(args.log_level or "INFO")
        logger.error(f"configuration error: {e.message}")
        return EXIT_CONFIG
    _configure_logging(args.log_level or settings.log_level)

    api = init_internal_api(config_manager)
    try:
        return COMMANDS[args.command](api, args, settings)
    except ConfigurationError as e:
        logger.error(f"configuration error: {e.message}")
        return EXIT_CONFIG
    except FixtureError as e:
        logger.error(f"fixture error: {e.message}")
        return EXIT_FIXTURE
    except OutputError as e:
        logger.error(f"output error: {e.message}")
        return EXIT_OUTPUT
    except OAISError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
