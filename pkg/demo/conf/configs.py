from typing import List

from omegaconf import OmegaConf
from pydantic import BaseModel, validator


class SweepConfig(BaseModel):
    amplitudes: List[float]
    k_list: List[int]
    resolution: int
    p_lo: float
    p_hi: float
    p_nodes: int

    def __init__(self, **data):
        data = {k: OmegaConf.to_object(v) if OmegaConf.is_config(v) else v for k, v in data.items()}
        super().__init__(**data)

    @validator('amplitudes', each_item=True)
    def is_positive(cls, v):
        assert v > 0, 'the pendulum amplitude must be positive'
        return v

    @validator('k_list')
    def is_increasing(cls, v):
        assert all(b > a for a, b in zip(v, v[1:])), 'k_list must be increasing'
        return v


class LoggingConfig(BaseModel):
    project: str
    mode: str

    @validator('mode')
    def is_wandb_mode(cls, v):
        assert v in ('online', 'offline', 'disabled')
        return v
