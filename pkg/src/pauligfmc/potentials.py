"""Well potential, trial potential, and the pairwise Pauli exchange weight.

The Pauli weight w = 1 - exp(-S) multiplies every propagation step and
carries the antisymmetry: S flips sign when a pair exchanges, so a step
that crosses a node of the pair ordering picks up a negative weight
(phase pi), and a step ending on the node (S = 0) is weighted zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemSpec

__all__ = [
    "PauliWeight",
    "well_potential",
    "trial_potential",
    "pauli_action",
    "pauli_weight",
]


@dataclass(frozen=True)
class PauliWeight:
    """w = 1 - exp(-S) split into magnitude and phase (0 or pi)."""

    magnitude: float
    phase: float
    action: float


def well_potential(x, spec: SystemSpec) -> float:
    """Sum over particles of the square well, -V0 for |r_i| <= R inclusive."""
    r = np.asarray(x, dtype=float).reshape(spec.n_particles, spec.dimension)
    inside = np.sum(r * r, axis=1) <= spec.well_radius**2
    return -spec.well_depth * float(np.count_nonzero(inside))


def trial_potential(x, spec: SystemSpec) -> float:
    """Isotropic oscillator (m omega_T^2 / 2) sum x^2 plus the offset c_T."""
    x = np.asarray(x, dtype=float)
    return 0.5 * spec.mass * spec.trial_omega**2 * float(x @ x) + spec.trial_offset


def pauli_action(x_f, x_in, beta, spec: SystemSpec) -> float:
    """Pairwise exchange action S = sum_{k<l} m (r_k^f - r_l^f).(r_k^in - r_l^in) / beta.

    For N = 1 there is no exchange; returns +inf so the weight is exactly 1.
    """
    n, d = spec.n_particles, spec.dimension
    if n == 1:
        return math.inf
    xf = np.asarray(x_f, dtype=float).reshape(n, d)
    xi = np.asarray(x_in, dtype=float).reshape(n, d)
    # sum_{k<l} (a_k - a_l).(b_k - b_l) = N sum_k a_k.b_k - (sum a).(sum b)
    pair_sum = n * float(np.sum(xf * xi)) - float(xf.sum(axis=0) @ xi.sum(axis=0))
    return spec.mass * pair_sum / beta


def pauli_weight(x_f, x_in, beta, spec: SystemSpec) -> PauliWeight:
    """The step weight 1 - exp(-S) as (magnitude, phase in {0, pi})."""
    s = pauli_action(x_f, x_in, beta, spec)
    if not math.isfinite(s):
        return PauliWeight(magnitude=1.0, phase=0.0, action=s)
    if s == 0.0:
        return PauliWeight(magnitude=0.0, phase=0.0, action=0.0)
    if -s > 700.0:
        # exp would overflow; such a walker is always removed by the M_max cut
        return PauliWeight(magnitude=math.inf, phase=math.pi, action=s)
    w = -math.expm1(-s)
    return PauliWeight(magnitude=abs(w), phase=0.0 if w > 0 else math.pi, action=s)
