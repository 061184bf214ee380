from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from ..exceptions import UnsupportedCoercive
from .hamiltonian import HamiltonianSpec

Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def phase_space_integral(
    H: HamiltonianSpec,
    integrand: Integrand,
    q_nodes: Optional[int] = None,
    p_nodes: Optional[int] = None,
    t_nodes: Optional[int] = None,
) -> np.ndarray:
    """
    ∫₀¹ ∫_{Tⁿ} ∫_{box} integrand(t, q, p) dp dq dt over the momentum box containing supp H.

    Rectangle rule in the periodic variables, Simpson in p. The integrand maps
    q, p of shape (N, n) to values of shape (N,) or (N, m).
    """
    if H.support_radius is None or H.offset != 0.0:
        raise UnsupportedCoercive("phase-space integrals need a compactly supported Hamiltonian")
    n = H.n
    q_nodes = q_nodes or (64 if n == 1 else 24)
    p_nodes = p_nodes or (2001 if n == 1 else 161)
    t_nodes = t_nodes or (1 if H.is_autonomous else 32)

    R = H.outer_radius
    q_axis = np.arange(q_nodes) / q_nodes
    p_axis = np.linspace(-R, R, p_nodes)
    P = np.stack(np.meshgrid(*([p_axis] * n), indexing="ij"), axis=-1).reshape(-1, n)

    total = 0.0
    for t in np.arange(t_nodes) / t_nodes:
        for q in np.stack(np.meshgrid(*([q_axis] * n), indexing="ij"), axis=-1).reshape(-1, n):
            values = np.asarray(integrand(t, np.broadcast_to(q, P.shape), P))
            values = values.reshape((p_nodes,) * n + values.shape[1:])
            for _ in range(n):
                values = simpson(values, x=p_axis, axis=0)
            total = total + values
    return np.asarray(total) / (t_nodes * q_nodes**n)


def calabi(H: HamiltonianSpec) -> float:
    """Cal(φ_H) = ∫₀¹ ∫ H ωⁿ dt."""
    if H.coercive:
        raise UnsupportedCoercive("the Calabi invariant needs a compactly supported Hamiltonian")
    return float(phase_space_integral(H, lambda t, q, p: H(t, q, p)))
