import argparse
import logging
from typing import List, Optional, Sequence

from ..exceptions import BudgetExceeded, ConfigError, SymphomError
from .census import CensusConfig, CensusTable, PeriodicOrbit, census
from .configs import RunConfig, Task, load_config
from .emitter import ArtifactEmitter
from .runner import Budget, RunReport, run

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _k_list(text: str) -> List[int]:
    try:
        return [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--k", dest="k_list", type=_k_list, help="comma-separated k values, e.g. 1,2,4")
    common.add_argument("--seed", type=int)
    common.add_argument("--budget-seconds", dest="budget_seconds", type=int)
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("overrides", nargs="*", help="dotted overrides such as grids.resolution=32")

    root = argparse.ArgumentParser(prog="symphom", description="Symplectic homogenization on T*Tⁿ.")
    commands = root.add_subparsers(dest="task", required=True)
    for task in Task:
        commands.add_parser(task.value, parents=[common])
    return root


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(
            args.config,
            args.overrides,
            task=args.task,
            output_dir=args.output_dir,
            k_list=args.k_list,
            seed=args.seed,
            budget_seconds=args.budget_seconds,
        )
        report = run(config)
    except ConfigError as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_CONFIG
    except BudgetExceeded as e:
        logger.error("budget exceeded: %s", e)
        return EXIT_BUDGET
    except SymphomError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILED
    logger.info("%s done: %d artifacts in %s", report.task.value, len(report.artifacts), report.output_dir)
    return EXIT_OK


__all__ = (
    ArtifactEmitter.__name__,
    Budget.__name__,
    CensusConfig.__name__,
    CensusTable.__name__,
    PeriodicOrbit.__name__,
    RunConfig.__name__,
    RunReport.__name__,
    Task.__name__,
    census.__name__,
    load_config.__name__,
    main.__name__,
    run.__name__,
)
