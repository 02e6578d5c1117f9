"""The modified GFMC iteration.

One generation applies the sampled trial kernel to every walker: draw an
exponential time step beta, drift-diffuse, weight by the direct
multiplicity m_D times the Pauli magnitude, stochastically round, and kill
anything whose rounded multiplicity exceeds M_max.  The correction kernel
(V_T - V) rho_T spawns intermediate walkers that re-enter the same
machinery within the generation until the queue drains; each application
contributes one more power of Delta of the resolvent series.  Phases stay
in {0, pi}: they flip with the sign of the guidance ratio, the Pauli
weight, and the kernel sign.

Randomness contract: every walker of generation g gets its own substream
keyed by (seed, g, walker index), so results are independent of scheduling
and bit-reproducible; aggregation is in walker order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .guidance import (
    _value_and_force,
    force_cap,
    guidance_value,
    log_trial_density_matrix,
)
from .model import Population, RunConfig, SystemSpec, Walker
from .potentials import pauli_weight, trial_potential, well_potential

__all__ = [
    "EngineError",
    "StepStats",
    "sample_initial_generation",
    "sample_time_step",
    "stochastic_round",
    "propagate_walker",
    "intermediate_multiplicity",
    "advance_generation",
    "energy_estimate",
]

log = logging.getLogger(__name__)

# tags keeping the seed-derived substreams of different purposes disjoint
_TAG_INIT = 0x494E4954
_TAG_WALK = 0x57414C4B

# rounded multiplicities above any permitted M_max; overflow guard only,
# such walkers are always removed by the M_max cut
_MULT_CLAMP = 1e12


class EngineError(RuntimeError):
    """Terminal run error (extinction, runaway intermediate queue)."""


@dataclass(frozen=True)
class StepStats:
    """Per-generation statistics emitted by advance_generation."""

    generation: int
    energy_estimate: float
    signed_pop_before: float
    signed_pop_after: float
    abs_pop_after: int
    killed_weight: float
    crossing_attempts: int
    intermediate_count: int
    mean_beta: float


def _init_rng(seed):
    return np.random.default_rng([int(seed), _TAG_INIT])


def _walker_rng(seed, generation, index):
    return np.random.default_rng([int(seed), _TAG_WALK, int(generation), int(index)])


def _add_phase(a, b):
    # phases are exactly 0.0 or pi; addition mod 2pi is a parity flip
    return math.pi if (a == math.pi) != (b == math.pi) else 0.0


def sample_time_step(delta, rng) -> float:
    """Exponentially distributed imaginary-time step with mean delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    beta = rng.exponential(delta)
    while beta <= 0.0:
        beta = rng.exponential(delta)
    return beta


def _round_u(m, u) -> int:
    return int(math.floor(m + u))


def stochastic_round(m, rng) -> int:
    """floor(m + U[0,1)); integer with expectation exactly m."""
    if m < 0:
        raise ValueError("multiplicity must be non-negative")
    return _round_u(m, rng.random())


def sample_initial_generation(spec: SystemSpec, size, rng) -> Population:
    """Metropolis sample of |Psi_G|^2: Gaussian single-particle proposals,
    500 thermalization sweeps, one walker kept every 20 sweeps; phases 0."""
    if size < 1:
        raise ValueError("size must be >= 1")
    n, d = spec.n_particles, spec.dimension
    sigma = 1.0 / math.sqrt(spec.mass * spec.guidance_omega)
    x = rng.normal(0.0, sigma, size=n * d)
    lcur = guidance_value(x, spec).log_magnitude
    while not math.isfinite(lcur):
        x = rng.normal(0.0, sigma, size=n * d)
        lcur = guidance_value(x, spec).log_magnitude

    def sweep(x, lcur):
        for i in range(n):
            prop = x.copy()
            prop[i * d : (i + 1) * d] += rng.normal(0.0, sigma, size=d)
            lp = guidance_value(prop, spec).log_magnitude
            if math.isfinite(lp) and rng.random() < math.exp(
                min(0.0, 2.0 * (lp - lcur))
            ):
                x, lcur = prop, lp
        return x, lcur

    for _ in range(500):
        x, lcur = sweep(x, lcur)
    walkers = []
    while len(walkers) < size:
        for _ in range(20):
            x, lcur = sweep(x, lcur)
        walkers.append(Walker(coords=x.copy(), phase=0.0))
    return Population.from_walkers(walkers, generation=0)


def propagate_walker(w: Walker, beta, spec: SystemSpec, cfg: RunConfig, rng):
    """One drift-diffusion step with the direct multiplicity.

    Returns (new walker, m_D, PauliWeight) where m_D is the magnitude-only
    direct multiplicity e^{E_T beta} (|Psi_G(x)|/|Psi_G(x')|) (rho_T/rho_D);
    the effective multiplicity downstream is m_D times the Pauli magnitude.
    The new walker's phase already includes the guidance sign ratio and the
    Pauli phase.  Returns None when Psi_G(x') = 0 (walker discarded, logged).
    """
    x_old = w.coords
    gv_old, force = _value_and_force(x_old, spec)
    if gv_old.magnitude == 0.0:
        log.info("walker discarded: guidance value is zero at the start point")
        return None
    nd = x_old.size
    m = spec.mass
    cap = force_cap(beta, m)
    drift = np.clip(force, -cap, cap)
    noise = rng.standard_normal(nd) * math.sqrt(beta / m)
    x_new = x_old + beta * drift + noise
    gv_new = guidance_value(x_new, spec)
    log_rho_t = log_trial_density_matrix(x_new, x_old, beta, spec)
    # the sampled density at the sampled point, directly from the noise
    log_rho_d = 0.5 * nd * math.log(m / (2.0 * math.pi * beta)) - 0.5 * m * float(
        noise @ noise
    ) / beta
    log_m = (
        cfg.trial_energy * beta
        + gv_new.log_magnitude
        - gv_old.log_magnitude
        + log_rho_t
        - log_rho_d
    )
    m_d = math.exp(log_m) if log_m < 700.0 else math.inf
    pw = pauli_weight(x_new, x_old, beta, spec)
    sign_flip = _add_phase(gv_new.sign_phase, gv_old.sign_phase)
    phase = _add_phase(_add_phase(w.phase, sign_flip), pw.phase)
    return Walker(coords=x_new, phase=phase), m_d, pw


def intermediate_multiplicity(x, x_prev, beta, m_d, spec: SystemSpec, cfg: RunConfig):
    """Multiplicity and kernel phase of the correction branch.

    m_I = |V_T(x) - V(x)| m_D Delta (the rho_T factors cancel); the kernel
    contributes phase pi when V_T(x) - V(x) < 0.
    """
    diff = trial_potential(x, spec) - well_potential(x, spec)
    m_i = abs(diff) * m_d * cfg.delta
    return m_i, (math.pi if diff < 0 else 0.0)


def energy_estimate(p_prev, p_curr, delta, trial_energy) -> float:
    """Growth estimator E_0 = E_T + (P_{n-1}/P_n - 1)/Delta on signed sums."""
    if p_curr == 0:
        raise ValueError("signed population is zero: extinction or sign collapse")
    return trial_energy + (p_prev / p_curr - 1.0) / delta


def advance_generation(
    pop: Population,
    spec: SystemSpec,
    cfg: RunConfig,
    seed=None,
    trial_only: bool = False,
):
    """Propagate one full generation; returns (new population, StepStats).

    `seed` defaults to cfg.seed; walker substreams are keyed on it together
    with the generation index and walker index.  With trial_only=True the
    correction kernel is switched off (V = V_T), leaving pure trial
    propagation with Pauli weights.
    """
    if pop.abs_count == 0:
        raise EngineError(f"population extinct at generation {pop.generation}")
    seed = cfg.seed if seed is None else seed
    queue_cap = 100 * cfg.target_population
    new_walkers = []
    killed_weight = 0.0
    crossing_attempts = 0
    intermediate_count = 0
    events = 0
    beta_sum = 0.0
    for idx, walker in enumerate(pop.walkers):
        rng = _walker_rng(seed, pop.generation, idx)
        stack = [(walker, False)]
        while stack:
            if len(stack) > queue_cap:
                raise EngineError(
                    "kernel too strong; decrease delta or improve V_T "
                    f"(intermediate queue exceeded {queue_cap} at generation "
                    f"{pop.generation + 1})"
                )
            cur, is_intermediate = stack.pop()
            if is_intermediate:
                intermediate_count += 1
            beta = sample_time_step(cfg.delta, rng)
            events += 1
            beta_sum += beta
            result = propagate_walker(cur, beta, spec, cfg, rng)
            if result is None:
                continue
            w_new, m_d, pw = result
            u_direct = rng.random()
            u_inter = rng.random()
            if pw.action < 0:
                crossing_attempts += 1
            m_eff = m_d * pw.magnitude
            if not math.isfinite(m_eff):
                m_eff = 0.0 if m_d == 0.0 else _MULT_CLAMP
            m_eff = min(m_eff, _MULT_CLAMP)
            n_direct = _round_u(m_eff, u_direct)
            if n_direct > cfg.m_max:
                killed_weight += n_direct
            elif n_direct > 0:
                new_walkers.extend([w_new] * n_direct)
            if trial_only:
                continue
            m_i, phase_k = intermediate_multiplicity(
                w_new.coords, cur.coords, beta, m_eff, spec, cfg
            )
            n_inter = _round_u(min(m_i, _MULT_CLAMP), u_inter)
            if n_inter > cfg.m_max:
                killed_weight += n_inter
            elif n_inter > 0:
                wk = Walker(coords=w_new.coords, phase=_add_phase(w_new.phase, phase_k))
                stack.extend([(wk, True)] * n_inter)
    new_pop = Population.from_walkers(new_walkers, pop.generation + 1)
    if new_pop.abs_count == 0:
        raise EngineError(f"population extinct at generation {new_pop.generation}")
    if new_pop.signed_count != 0:
        energy = energy_estimate(
            pop.signed_count, new_pop.signed_count, cfg.delta, cfg.trial_energy
        )
    else:
        energy = math.nan
    stats = StepStats(
        generation=new_pop.generation,
        energy_estimate=energy,
        signed_pop_before=pop.signed_count,
        signed_pop_after=new_pop.signed_count,
        abs_pop_after=new_pop.abs_count,
        killed_weight=killed_weight,
        crossing_attempts=crossing_attempts,
        intermediate_count=intermediate_count,
        mean_beta=beta_sum / events,
    )
    return new_pop, stats
