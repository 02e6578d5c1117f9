"""Domain types and configuration handling.

Conventions used throughout the package: natural units hbar = 1, mass in
units where the kinetic term is p^2/2m, energies therefore in inverse
length squared times 1/m.  The external well is V(r) = -V0 for |r| <= R
(boundary inclusive) per particle.  The trial Hamiltonian is an isotropic
oscillator with frequency omega_T plus a constant offset c_T.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemSpec",
    "Walker",
    "Population",
    "RunConfig",
    "ConfigError",
    "default_orbitals",
    "validate_spec",
    "validation_errors",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "save_config",
]


class ConfigError(ValueError):
    """Invalid configuration; carries the complete list of violations."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def default_orbitals(n: int, dimension: int) -> tuple:
    """The n lowest-energy Cartesian oscillator orbitals.

    Orbitals are labelled by per-axis excitation tuples; energy is
    proportional to the total excitation, ties broken lexicographically
    so the choice is deterministic.
    """
    if n < 1 or dimension < 1:
        return ()
    out = []
    total = 0
    while len(out) < n:
        # all tuples of length `dimension` summing to `total`, ascending
        shell = _tuples_with_sum(dimension, total)
        out.extend(shell)
        total += 1
    return tuple(out[:n])


def _tuples_with_sum(length, total):
    if length == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in _tuples_with_sum(length - 1, total - first):
            out.append((first,) + rest)
    return sorted(out)


@dataclass(frozen=True)
class SystemSpec:
    """Physical problem definition.

    Attributes:
        n_particles: number of spinless fermions N.
        dimension: spatial dimension D (1, 2 or 3).
        mass: particle mass m (hbar = 1).
        well_depth: V0 > 0; the potential inside the well is -V0.
        well_radius: R (halfwidth in 1D, radius otherwise).
        trial_omega: omega_T of the trial oscillator.
        trial_offset: constant c_T added to the trial potential;
            defaults to -V0 so the trial roughly matches the well floor.
        guidance_omega: omega_G of the guidance orbitals (may differ
            from trial_omega).
        guidance_orbitals: N distinct per-axis excitation tuples, one per
            Slater column; defaults to the N lowest-energy orbitals.
    """

    n_particles: int
    well_depth: float
    well_radius: float
    dimension: int = 3
    mass: float = 1.0
    trial_omega: float = 0.5
    trial_offset: float | None = None
    guidance_omega: float = 0.5
    guidance_orbitals: tuple | None = None

    def __post_init__(self):
        if self.trial_offset is None:
            object.__setattr__(self, "trial_offset", -float(self.well_depth))
        if self.guidance_orbitals is None:
            object.__setattr__(
                self,
                "guidance_orbitals",
                default_orbitals(self.n_particles, self.dimension),
            )
        else:
            object.__setattr__(
                self,
                "guidance_orbitals",
                tuple(tuple(int(q) for q in orb) for orb in self.guidance_orbitals),
            )

    @property
    def n_coords(self) -> int:
        return self.n_particles * self.dimension


@dataclass(frozen=True)
class RunConfig:
    """Algorithm knobs for one run.

    delta is the mean of the exponentially sampled imaginary-time step;
    trial_energy E_T shifts the Hamiltonian and tunes population growth;
    m_max kills walkers whose rounded multiplicity exceeds it.
    """

    delta: float
    trial_energy: float
    target_population: int
    n_generations: int
    m_max: int = 5
    burn_in_fraction: float = 0.2
    seed: int = 0


@dataclass(frozen=True)
class Walker:
    """One point of the ensemble: N*D coordinates plus a phase.

    The phase is a general real in [0, 2pi) by type, but every engine
    operation produces only 0 or pi (all weights in this model are real).
    """

    coords: np.ndarray
    phase: float = 0.0

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class Population:
    """A generation of walkers with signed and absolute totals."""

    walkers: tuple
    generation: int
    signed_count: float
    abs_count: int

    @classmethod
    def from_walkers(cls, walkers, generation):
        walkers = tuple(walkers)
        return cls(
            walkers=walkers,
            generation=generation,
            signed_count=signed_sum(walkers),
            abs_count=len(walkers),
        )


def signed_sum(walkers) -> float:
    """Sum of cos(phase) over walkers, in walker order."""
    total = 0.0
    for w in walkers:
        total += float(np.cos(w.phase))
    return total


# --- validation -------------------------------------------------------------

def validation_errors(spec: SystemSpec, cfg: RunConfig) -> list:
    """Complete list of invariant violations (empty when valid)."""
    errors = []
    if spec.n_particles < 1:
        errors.append("n_particles >= 1")
    if spec.dimension not in (1, 2, 3):
        errors.append("dimension must be 1, 2 or 3")
    if not spec.mass > 0:
        errors.append("mass must be positive")
    if not spec.well_depth > 0:
        errors.append("well_depth must be positive")
    if not spec.well_radius > 0:
        errors.append("well_radius must be positive")
    if not spec.trial_omega > 0:
        errors.append("trial_omega must be positive")
    if not spec.guidance_omega > 0:
        errors.append("guidance_omega must be positive")
    orbs = spec.guidance_orbitals or ()
    if len(orbs) != spec.n_particles:
        errors.append(
            "guidance_orbitals must have exactly n_particles entries "
            f"(got {len(orbs)}, need {spec.n_particles})"
        )
    if len(set(orbs)) != len(orbs):
        errors.append("guidance_orbitals must be distinct orbitals")
    for orb in orbs:
        if len(orb) != spec.dimension:
            errors.append(f"orbital {orb} must have {spec.dimension} entries")
        if any(q < 0 for q in orb):
            errors.append(f"orbital {orb} entries must be >= 0")
    if not cfg.delta > 0:
        errors.append("delta > 0")
    if cfg.m_max < 1:
        errors.append("m_max >= 1")
    if cfg.target_population < 10:
        errors.append("target_population >= 10")
    if cfg.n_generations < 1:
        errors.append("n_generations >= 1")
    if not 0.0 <= cfg.burn_in_fraction < 1.0:
        errors.append("burn_in_fraction in [0, 1)")
    if not 0 <= int(cfg.seed) < 2**64:
        errors.append("seed must fit in 64 bits")
    return errors


def validate_spec(spec: SystemSpec, cfg: RunConfig):
    """Return (spec, cfg) unchanged if valid, else raise with all violations."""
    errors = validation_errors(spec, cfg)
    if errors:
        raise ConfigError(errors)
    return spec, cfg


# --- JSON configuration -----------------------------------------------------

_SYSTEM_FIELDS = {f.name for f in dataclasses.fields(SystemSpec)}
_RUN_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def config_from_dict(doc: dict):
    """Build (SystemSpec, RunConfig) from a parsed config document.

    The document must have exactly the top-level objects "system" and
    "run"; unknown keys anywhere are an error (collected, not first-fail).
    """
    errors = []
    if not isinstance(doc, dict):
        raise ConfigError(["config document must be a JSON object"])
    for key in doc:
        if key not in ("system", "run"):
            errors.append(f"unknown top-level key {key!r}")
    system = doc.get("system")
    run = doc.get("run")
    if not isinstance(system, dict):
        errors.append('missing or invalid "system" object')
        system = {}
    if not isinstance(run, dict):
        errors.append('missing or invalid "run" object')
        run = {}
    for key in system:
        if key not in _SYSTEM_FIELDS:
            errors.append(f"unknown system key {key!r}")
    for key in run:
        if key not in _RUN_FIELDS:
            errors.append(f"unknown run key {key!r}")
    if errors:
        raise ConfigError(errors)
    try:
        spec = SystemSpec(**system)
        cfg = RunConfig(**run)
    except TypeError as exc:
        raise ConfigError([str(exc)]) from exc
    return spec, cfg


def config_to_dict(spec: SystemSpec, cfg: RunConfig) -> dict:
    sys_doc = dataclasses.asdict(spec)
    sys_doc["guidance_orbitals"] = [list(orb) for orb in spec.guidance_orbitals]
    return {"system": sys_doc, "run": dataclasses.asdict(cfg)}


def load_config(path):
    with open(path, "r") as fh:
        return config_from_dict(json.load(fh))


def save_config(path, spec: SystemSpec, cfg: RunConfig):
    with open(path, "w") as fh:
        json.dump(config_to_dict(spec, cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
