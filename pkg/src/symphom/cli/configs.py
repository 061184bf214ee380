import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException
from pydantic import BaseModel, ValidationError, validator

from ..dynamics import FlowConfig, GridSamples, HamiltonianSpec, Integrator
from ..exceptions import ConfigError
from ..genfunc import GridConfig
from .census import MAX_PERIOD, CensusConfig


class Task(str, Enum):
    HOMOGENIZE = "homogenize"
    ORBITS = "orbits"
    MEASURES = "measures"
    SUBDIFF = "subdiff"
    CENSUS = "census"
    RSET = "rset"


class _Strict(BaseModel):
    class Config:
        extra = "forbid"


class ProfileConfig(_Strict):
    kind: str
    coefficients: List[float] = [1.0]
    width: float = 1.0


class HamiltonianConfig(_Strict):
    family: str
    n: int = 1
    time_dependent: bool = False
    support_radius: Optional[float] = None
    coercive: bool = False
    scale: float = 1.0
    margin: float = 1.0
    shear: float = 0.0
    offset: float = 0.0
    amplitude: float = 0.0
    p_profile: Optional[ProfileConfig] = None
    q_profile: Optional[ProfileConfig] = None
    centre_q: List[float] = []
    centre_p: List[float] = []
    radius: float = 0.25
    grid_csv: Optional[str] = None  # samples t,q,p,H for the custom-grid family

    @validator("n")
    def is_one_or_two(cls, v):
        assert v in (1, 2), "torus dimension must be 1 or 2"
        return v

    def to_spec(self) -> HamiltonianSpec:
        data = self.dict(exclude={"grid_csv"})
        for name in ("p_profile", "q_profile"):
            if data[name] is None:
                del data[name]
        spec = HamiltonianSpec.from_dict(data)
        if self.grid_csv is not None:
            return HamiltonianSpec.from_dict({**spec.to_dict(), "grid": GridSamples.from_csv(self.grid_csv).to_dict()})
        return spec


class GridSettings(_Strict):
    resolution: int = 64
    inflation: float = 1.25
    budget: int = 64**3
    fiber_half_width: Optional[float] = None
    momentum_half_width: Optional[float] = None

    @validator("resolution")
    def at_least_four(cls, v):
        assert v >= 4, "resolution must be at least 4"
        return v

    @validator("inflation")
    def at_least_one(cls, v):
        assert v >= 1.0, "inflation must be at least 1"
        return v

    def to_grid_config(self) -> GridConfig:
        return GridConfig(**self.dict())


class FlowSettings(_Strict):
    integrator: Optional[Integrator] = None
    substeps: int = 16
    newton_tol: float = 1e-10
    max_newton_iters: int = 25

    @validator("substeps")
    def positive(cls, v):
        assert v >= 1, "substeps must be positive"
        return v

    def to_flow_config(self, H: HamiltonianSpec) -> FlowConfig:
        options = self.dict(exclude={"integrator"})
        if self.integrator is None:
            return FlowConfig.init(H, **options)
        return FlowConfig(self.integrator, **options)


class MomentumGrid(_Strict):
    lo: float = -1.0
    hi: float = 1.0
    nodes: int = 21

    @validator("nodes")
    def at_least_three(cls, v):
        assert v >= 3, "a momentum grid needs at least three nodes"
        return v

    @validator("hi")
    def ordered(cls, v, values):
        assert "lo" not in values or v > values["lo"], "hi must exceed lo"
        return v

    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.nodes)


class MeasureSettings(_Strict):
    p: List[float] = [0.0]
    alpha: List[float] = [0.0]
    level_tolerance: Optional[float] = None
    table_k: int = 4
    table_spacing: float = 0.05


class CensusSettings(_Strict):
    N: int = 20
    q_seeds: int = 12
    p_seeds: int = 25
    capacities: bool = False

    @validator("N")
    def bounded(cls, v):
        assert 1 <= v <= MAX_PERIOD, f"N must lie in [1, {MAX_PERIOD}]"
        return v


class SubdiffSettings(_Strict):
    alpha_lo: float = -2.0
    alpha_hi: float = 2.0
    alpha_nodes: int = 41
    radius: int = 8


class RunConfig(_Strict):
    hamiltonian: HamiltonianConfig
    task: Task = Task.HOMOGENIZE
    grids: GridSettings = GridSettings()
    flow: FlowSettings = FlowSettings()
    k_list: List[int] = [1, 2, 4]
    p_grid: List[MomentumGrid] = [MomentumGrid()]
    output_dir: str = "out"
    cache_dir: Optional[str] = None
    seed: int = 0
    budget_seconds: Optional[float] = None
    workers: int = 1
    oracle: bool = False
    measure: MeasureSettings = MeasureSettings()
    census: CensusSettings = CensusSettings()
    subdiff: SubdiffSettings = SubdiffSettings()

    @validator("k_list")
    def increasing(cls, v):
        assert v, "k_list must not be empty"
        assert all(k >= 1 for k in v), "every k must be positive"
        assert all(b > a for a, b in zip(v, v[1:])), "k_list must be increasing"
        return v

    @validator("seed")
    def nonnegative(cls, v):
        assert v >= 0, "seed must be nonnegative"
        return v

    @validator("output_dir")
    def writable(cls, v):
        path = Path(v)
        while not path.exists():
            path = path.parent
        assert os.access(path, os.W_OK), f"{v} is not writable"
        return v

    def momentum_axes(self) -> List[np.ndarray]:
        return [grid.axis() for grid in self.p_grid]

    def census_config(self) -> CensusConfig:
        return CensusConfig(q_seeds=self.census.q_seeds, p_seeds=self.census.p_seeds, seed=self.seed)


def _from_container(data: Mapping[str, Any]) -> RunConfig:
    try:
        return RunConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], first["loc"]) from e


def load_config(path: Optional[str] = None, overrides: Sequence[str] = (), **flags: Any) -> RunConfig:
    """
    YAML at `path`, then dotted `key=value` overrides, then the explicit flags
    that are not None, validated into a RunConfig.
    """
    try:
        base = OmegaConf.load(path) if path is not None else OmegaConf.create()
        merged = OmegaConf.merge(
            base,
            OmegaConf.from_dotlist(list(overrides)),
            OmegaConf.create({k: v for k, v in flags.items() if v is not None}),
        )
        data: Dict[str, Any] = OmegaConf.to_container(merged, resolve=True)  # type: ignore[assignment]
    except (OSError, OmegaConfBaseException) as e:
        raise ConfigError(str(e)) from e
    if "hamiltonian" not in data:
        raise ConfigError("field required", ("hamiltonian",))
    config = _from_container(data)
    try:
        config.hamiltonian.to_spec()
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(str(e), ("hamiltonian",)) from e
    return config
