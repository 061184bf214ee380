"""Selector tables of the pendulum against its exact effective Hamiltonian."""
import logging

import hydra
import numpy as np
import wandb
from omegaconf import DictConfig, OmegaConf

from conf import LoggingConfig, SweepConfig
from symphom.dynamics import HamiltonianSpec
from symphom.genfunc import GridConfig
from symphom.oracle import effham_oracle
from symphom.selector import homogenize

logger = logging.getLogger(__name__)


@hydra.main(version_base=None, config_path='conf', config_name='homogenize_pendulum')
def sweep(cfg: DictConfig) -> None:
    sweep_cfg = SweepConfig(**cfg['sweep'])
    logging_cfg = LoggingConfig(**cfg['logging'])

    p_grid = np.linspace(sweep_cfg.p_lo, sweep_cfg.p_hi, sweep_cfg.p_nodes)
    grids = GridConfig(resolution=sweep_cfg.resolution)

    run = wandb.init(
        project=logging_cfg.project,
        mode=logging_cfg.mode,
        config=OmegaConf.to_container(cfg, resolve=True),
    )

    for a in sweep_cfg.amplitudes:
        H = HamiltonianSpec.pendulum(a)
        exact = effham_oracle(H, p_grid).values
        tables, report = homogenize(H, sweep_cfg.k_list, p_grid, grids)
        for table, cauchy in zip(tables, (np.nan, *report.cauchy)):
            error = float(np.abs(table.values - exact).max())
            logger.info("a=%g k=%d sup error %.3e", a, table.k, error)
            run.log({
                "amplitude": a,
                "k": table.k,
                "sup_error": error,
                "cauchy": cauchy,
                "plateau_width": table.plateau_width(a),
            })
        run.summary[f"extrapolated_error/a={a:g}"] = float(np.abs(report.extrapolated.values - exact).max())

    run.finish()


if __name__ == '__main__':
    sweep()
