"""
Landscape cache: a directory of binary containers.

Container layout: the magic bytes, a little-endian uint32 header length, a UTF-8
JSON header (k, ℓ, y, grid axes, periodicity, indices, tags) and the value array as
little-endian float64 in C order.
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Union

import attrs
import numpy as np
from attrs import define

from ..dynamics import FlowConfig, HamiltonianSpec
from .landscape import GeneratingLandscape, GridConfig, Reduction, build_landscape

logger = logging.getLogger(__name__)

MAGIC = b"SYMPHOM\x01"


def landscape_key(
    H: HamiltonianSpec,
    k: int,
    ell: int,
    y: Optional[np.ndarray],
    grids: GridConfig,
    cfg: FlowConfig,
    reduction: Union[str, Reduction] = Reduction.AUTO,
) -> str:
    """SHA-256 over the Hamiltonian mapping, grids, integrator, k, ℓ and the boundary data."""
    document = {
        "hamiltonian": H.to_dict(),
        "grids": attrs.asdict(grids),
        "flow": attrs.asdict(cfg),
        "k": k,
        "ell": ell,
        "y": None if y is None else np.atleast_1d(y).tolist(),
        "reduction": Reduction(reduction).value,
    }
    return hashlib.sha256(json.dumps(document, sort_keys=True).encode()).hexdigest()


def encode(L: GeneratingLandscape) -> bytes:
    header: Dict[str, Any] = {
        "k": L.k,
        "ell": L.ell,
        "y": None if L.y is None else L.y.tolist(),
        "axes": [axis.tolist() for axis in L.axes],
        "periodic": list(L.periodic),
        "shape": list(L.values.shape),
        "negative_index": L.negative_index,
        "kept_index": L.kept_index,
        "negative_level": None if np.isinf(L.negative_level) else L.negative_level,
        "boundary_tag": list(L.boundary_tag),
        "labels": list(L.labels),
        "durations": list(L.durations),
        "reduction": L.reduction.value,
    }
    blob = json.dumps(header).encode()
    payload = np.ascontiguousarray(L.values, dtype="<f8").tobytes()
    return MAGIC + struct.pack("<I", len(blob)) + blob + payload


def decode(
    data: bytes,
    hamiltonian: Optional[HamiltonianSpec] = None,
    grids: GridConfig = GridConfig(),
    flow: Optional[FlowConfig] = None,
) -> GeneratingLandscape:
    if not data.startswith(MAGIC):
        raise ValueError("not a landscape container")
    offset = len(MAGIC)
    (length,) = struct.unpack_from("<I", data, offset)
    offset += 4
    header = json.loads(data[offset : offset + length].decode())
    values = np.frombuffer(data, dtype="<f8", offset=offset + length).reshape(header["shape"])
    level = header["negative_level"]
    return GeneratingLandscape(
        k=header["k"],
        ell=header["ell"],
        y=header["y"],
        axes=tuple(np.asarray(axis) for axis in header["axes"]),
        periodic=tuple(header["periodic"]),
        values=values.astype(float),
        negative_index=header["negative_index"],
        kept_index=header["kept_index"],
        negative_level=-np.inf if level is None else level,
        boundary_tag=tuple(header["boundary_tag"]),
        labels=tuple(header["labels"]),
        durations=tuple(header["durations"]),
        reduction=header.get("reduction", Reduction.ELIMINATED.value),
        hamiltonian=hamiltonian,
        grids=grids,
        flow=flow,
    )


@define
class LandscapeCache:
    _directory: Path

    def path(self, key: str) -> Path:
        return self._directory / f"{key}.landscape"

    def load(
        self, key: str, H: HamiltonianSpec, grids: GridConfig, flow: Optional[FlowConfig] = None
    ) -> Optional[GeneratingLandscape]:
        path = self.path(key)
        if not path.exists():
            return None
        logger.debug("landscape cache hit %s", key[:12])
        return decode(path.read_bytes(), H, grids, flow)

    def store(self, key: str, L: GeneratingLandscape) -> Path:
        path = self.path(key)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(encode(L))
        tmp.replace(path)
        return path

    def build(
        self,
        H: HamiltonianSpec,
        k: int,
        y: object,
        grids: GridConfig = GridConfig(),
        cfg: Optional[FlowConfig] = None,
        reduction: Union[str, Reduction] = Reduction.AUTO,
    ) -> GeneratingLandscape:
        """build_landscape through the cache."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        cfg = cfg or FlowConfig.init(H)
        key = landscape_key(H, k, 1, y, grids, cfg, reduction)
        cached = self.load(key, H, grids, cfg)
        if cached is not None:
            return cached
        L = build_landscape(H, k, y, grids, cfg, reduction)
        self.store(key, L)
        return L

    @classmethod
    def init(cls, directory: Union[str, Path]) -> "LandscapeCache":
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        return cls(directory)
