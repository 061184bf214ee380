import logging
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from attrs import define, field

from .._data_structures import SampledFunction
from ..dynamics import FlowConfig, HamiltonianSpec
from ..exceptions import BudgetExceeded
from ..genfunc import GridConfig, LandscapeCache, fiber_critical_orbits
from ..measures import MeasureConfig, build_mu_alpha, emit_R_set, support_checks
from ..oracle import effham_oracle
from ..selector import capacities, homogenize, selector_table
from ..subdiff import clarke_pl, limit_diff, rotation_hull_inclusion, strong_diff
from .census import census
from .configs import RunConfig, Task
from .emitter import ArtifactEmitter

logger = logging.getLogger(__name__)


@define
class Budget:
    seconds: Optional[float]
    _started: float = field(factory=time.monotonic)

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self._started

    def check(self, stage: str) -> None:
        if self.seconds is not None and self.elapsed > self.seconds:
            raise BudgetExceeded(f"{stage}: {self.elapsed:.1f}s spent of a {self.seconds:g}s budget")


@define(frozen=True)
class RunReport:
    task: Task
    output_dir: Path
    artifacts: List[str]
    runtimes: Dict[str, float]


@define
class Context:
    config: RunConfig
    H: HamiltonianSpec
    flow: FlowConfig
    grids: GridConfig
    emitter: ArtifactEmitter
    budget: Budget
    cache: Optional[LandscapeCache] = None

    @property
    def momenta(self) -> Any:
        axes = self.config.momentum_axes()
        return axes[0] if self.H.n == 1 else axes

    def points(self) -> np.ndarray:
        axes = self.config.momentum_axes()
        return np.array(list(product(*axes)), dtype=float)


def _p_header(n: int, prefix: str = "p") -> List[str]:
    return [f"{prefix}{i}" for i in range(n)]


def _homogenize(ctx: Context) -> None:
    n = ctx.H.n
    tables, report = homogenize(ctx.H, ctx.config.k_list, ctx.momenta, ctx.grids, ctx.flow, ctx.cache)
    ctx.budget.check("homogenize")
    for table in tables:
        ctx.emitter.write_csv(f"h_k{table.k}.csv", [*_p_header(n), "value", "uncertainty"], table.to_rows())
    ctx.emitter.write_csv("h_extrapolated.csv", [*_p_header(n), "value", "uncertainty"], report.extrapolated.to_rows())
    ctx.emitter.write_json(
        "convergence.json",
        {"k_list": list(report.k_list), "cauchy": list(report.cauchy), "extrapolation_residual": report.extrapolation_residual},
    )
    if ctx.config.oracle:
        oracle = effham_oracle(ctx.H, ctx.momenta)
        ctx.emitter.write_csv("effham_oracle.csv", ["p0", "value"], oracle.to_rows())


def _orbits(ctx: Context) -> None:
    n = ctx.H.n
    jobs = [(k, y) for k in ctx.config.k_list for y in ctx.points()]

    def search(job: Any) -> List[Any]:
        k, y = job
        return [
            (k, *y, *o.x, o.value, *o.rotation, o.average_action, int(o.degenerate))
            for o in fiber_critical_orbits(ctx.H, k, y, ctx.flow)
        ]

    with ThreadPoolExecutor(max_workers=ctx.config.workers) as pool:
        rows = [row for found in pool.map(search, jobs) for row in found]
    ctx.budget.check("orbits")
    header = ["k", *_p_header(n, "y"), *_p_header(n, "x"), "value", *_p_header(n, "rotation"), "average_action", "degenerate"]
    ctx.emitter.write_csv("orbits.csv", header, rows)


def _measures(ctx: Context) -> None:
    settings = ctx.config.measure
    cfg = MeasureConfig(
        flow=ctx.flow,
        level_tolerance=settings.level_tolerance,
        table_k=settings.table_k,
        table_spacing=settings.table_spacing,
        grids=ctx.grids,
    )
    records = []
    for k in ctx.config.k_list:
        μ = build_mu_alpha(ctx.H, settings.alpha, settings.p, k, cfg)
        report = support_checks(μ, ctx.H, p=settings.p)
        records.append({"k": k, "measure": μ.to_dict(), "support": report.to_dict()})
        ctx.budget.check(f"measure at k={k}")
    ctx.emitter.write_json("measures.json", {"p": settings.p, "alpha": settings.alpha, "realizations": records})


def _selector_sampled(ctx: Context) -> Any:
    k = ctx.config.k_list[-1]
    return selector_table(ctx.H, k, ctx.momenta, ctx.grids, ctx.flow, ctx.cache)


def _subdiff(ctx: Context) -> None:
    settings = ctx.config.subdiff
    table = _selector_sampled(ctx)
    f = table.as_sampled()
    ctx.budget.check("subdiff table")
    side = np.linspace(settings.alpha_lo, settings.alpha_hi, settings.alpha_nodes)
    covectors = np.array(list(product(side, repeat=ctx.H.n)))
    records = []
    for index in product(*(range(1, s - 1) for s in f.shape)):
        x = f.point(index)
        inclusion = rotation_hull_inclusion(table, x, ctx.H, ctx.flow)
        records.append(
            {
                "p": x.tolist(),
                "clarke": clarke_pl(f, x).to_dict(),
                "strong": strong_diff(f, x, covectors, settings.radius).to_dict(),
                "limit": limit_diff(f, x, covectors, window=settings.radius).to_dict(),
                "rotation_hull": {"holds": inclusion.holds, "excess": inclusion.excess, "tolerance": inclusion.tolerance},
            }
        )
        ctx.budget.check("subdiff")
    ctx.emitter.write_json("subdiff.json", {"k": table.k, "nodes": records})


def _census(ctx: Context) -> None:
    n = ctx.H.n
    settings = ctx.config.census
    table = census(ctx.H, settings.N, ctx.config.census_config(), ctx.flow)
    ctx.budget.check("census")
    header = ["period", *_p_header(n, "u"), *_p_header(n, "rotation"), *_p_header(n, "q"), *_p_header(n, "p")]
    ctx.emitter.write_csv("census.csv", [*header, "action", "mean_action", "residual"], [o.to_row() for o in table.orbits])
    summary = table.summary()
    if settings.capacities and not ctx.H.coercive:
        summary["capacities"] = [
            {"k": k, "c_plus": c_plus / k, "c_minus": c_minus / k}
            for k in range(1, settings.N + 1)
            for c_plus, c_minus in [capacities(ctx.H, k, ctx.grids, ctx.flow)]
        ]
    ctx.emitter.write_json("census.json", summary)


def _rset(ctx: Context) -> None:
    n = ctx.H.n
    if ctx.config.oracle:
        oracle = effham_oracle(ctx.H, ctx.momenta)
        f = SampledFunction((oracle.p_grid,), oracle.values, (False,))
    else:
        f = _selector_sampled(ctx).as_sampled()
    rset = emit_R_set(ctx.H, ctx.momenta, table=f)
    ctx.emitter.write_csv("rset.csv", [*_p_header(n), *_p_header(n, "alpha"), "action", "extremal"], rset.to_rows())


TASKS: Dict[Task, Callable[[Context], None]] = {
    Task.HOMOGENIZE: _homogenize,
    Task.ORBITS: _orbits,
    Task.MEASURES: _measures,
    Task.SUBDIFF: _subdiff,
    Task.CENSUS: _census,
    Task.RSET: _rset,
}


def run(config: RunConfig) -> RunReport:
    """Executes the configured task and writes its artifacts and manifest."""
    budget = Budget(config.budget_seconds)
    H = config.hamiltonian.to_spec()
    ctx = Context(
        config,
        H,
        config.flow.to_flow_config(H),
        config.grids.to_grid_config(),
        ArtifactEmitter.init(Path(config.output_dir)),
        budget,
        LandscapeCache.init(config.cache_dir) if config.cache_dir else None,
    )
    logger.info("task %s on a %s Hamiltonian, k=%s", config.task.value, H.family.value, config.k_list)
    TASKS[config.task](ctx)
    runtimes = {config.task.value: budget.elapsed}
    ctx.emitter.write_manifest(runtimes, config.dict())
    return RunReport(config.task, ctx.emitter.root, ctx.emitter.artifacts, runtimes)
