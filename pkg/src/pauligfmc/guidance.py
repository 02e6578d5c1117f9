"""Guidance function, quantum force, and the two propagation densities.

The guidance function is a Slater determinant of Cartesian oscillator
product orbitals at frequency omega_G.  Determinant values are carried as
(sign, log magnitude) so that ratios stay finite for any particle number;
the quantum force comes from the inverse Slater matrix.  The trial density
matrix rho_T is the exact imaginary-time kernel of the trial oscillator;
rho_D is the Gaussian drift-diffusion density actually sampled by the
engine, and both are evaluated in log space.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import SystemSpec

__all__ = [
    "GuidanceValue",
    "orbital_value",
    "orbital_gradient",
    "guidance_value",
    "quantum_force",
    "force_cap",
    "capped_force",
    "trial_density_matrix",
    "log_trial_density_matrix",
    "drift_diffusion_density",
    "log_drift_diffusion_density",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GuidanceValue:
    """|Psi_G| split into magnitude and sign phase (0 or pi).

    log_magnitude is -inf at a node; sign_phase is 0 there by convention.
    """

    magnitude: float
    sign_phase: float
    log_magnitude: float


@functools.lru_cache(maxsize=32)
def _orbital_setup(orbitals, omega, mass):
    """Per-spec constants: orbital index array and 1D normalizations."""
    orb = np.array(orbitals, dtype=int)
    n_max = int(orb.max(initial=0))
    ns = np.arange(n_max + 1)
    # (m omega / pi)^{1/4} / sqrt(2^n n!) for each 1D excitation level
    norms = (mass * omega / math.pi) ** 0.25 / np.sqrt(
        2.0**ns * np.array([math.factorial(n) for n in ns], dtype=float)
    )
    return orb, n_max, norms


def _hermite_table(n_max, z):
    """Physicists' Hermite values H_0..H_{n_max} on an array, by recurrence."""
    h = np.empty((n_max + 1,) + z.shape)
    h[0] = 1.0
    if n_max >= 1:
        h[1] = 2.0 * z
    for n in range(2, n_max + 1):
        h[n] = 2.0 * z * h[n - 1] - 2.0 * (n - 1) * h[n - 2]
    return h


def _orbital_tables(coords, spec: SystemSpec):
    """1D orbital values and derivatives at every (particle, axis) coordinate.

    Returns val[n, i, d] and der[n, i, d] for excitation n, particle i,
    axis d, with normalization and Gaussian factor included.
    """
    orb, n_max, norms = _orbital_setup(
        spec.guidance_orbitals, spec.guidance_omega, spec.mass
    )
    r = np.asarray(coords, dtype=float).reshape(spec.n_particles, spec.dimension)
    s = math.sqrt(spec.mass * spec.guidance_omega)
    z = s * r
    h = _hermite_table(n_max, z)
    gauss = np.exp(-0.5 * z * z)
    val = norms[:, None, None] * h * gauss
    # phi_n'(u) = norm * s * (2n H_{n-1} - z H_n) exp(-z^2/2)
    hder = np.empty_like(h)
    hder[0] = -z * h[0]
    for n in range(1, n_max + 1):
        hder[n] = 2.0 * n * h[n - 1] - z * h[n]
    der = norms[:, None, None] * s * hder * gauss
    return orb, val, der


def _slater_matrix(coords, spec: SystemSpec):
    orb, val, der = _orbital_tables(coords, spec)
    a = val[orb[:, 0], :, 0]
    for d in range(1, spec.dimension):
        a = a * val[orb[:, d], :, d]
    return a.T  # a[i, j] = orbital_j at particle_i


def _slater_with_gradients(coords, spec: SystemSpec):
    orb, val, der = _orbital_tables(coords, spec)
    n, ddim = spec.n_particles, spec.dimension
    cols = [val[orb[:, d], :, d] for d in range(ddim)]
    a = cols[0]
    for d in range(1, ddim):
        a = a * cols[d]
    grad = np.empty((n, n, ddim))  # grad[i, j, d] = d phi_j / dx_d at particle i
    for d in range(ddim):
        g = der[orb[:, d], :, d]
        for dp in range(ddim):
            if dp != d:
                g = g * cols[dp]
        grad[:, :, d] = g.T
    return a.T, grad


def orbital_value(idx, r, spec: SystemSpec) -> float:
    """Value of one Cartesian product orbital at frequency omega_G."""
    idx = tuple(int(q) for q in idx)
    r = np.asarray(r, dtype=float).ravel()
    s = math.sqrt(spec.mass * spec.guidance_omega)
    out = 1.0
    for n, u in zip(idx, r):
        z = s * u
        h = _hermite_table(n, np.array(z))[n]
        norm = (spec.mass * spec.guidance_omega / math.pi) ** 0.25 / math.sqrt(
            2.0**n * math.factorial(n)
        )
        out *= norm * float(h) * math.exp(-0.5 * z * z)
    return out


def orbital_gradient(idx, r, spec: SystemSpec):
    """Gradient of one product orbital, axis by axis."""
    idx = tuple(int(q) for q in idx)
    r = np.asarray(r, dtype=float).ravel()
    s = math.sqrt(spec.mass * spec.guidance_omega)
    vals = []
    ders = []
    for n, u in zip(idx, r):
        z = s * u
        h = _hermite_table(max(n, 1), np.array(z))
        norm = (spec.mass * spec.guidance_omega / math.pi) ** 0.25 / math.sqrt(
            2.0**n * math.factorial(n)
        )
        gauss = math.exp(-0.5 * z * z)
        vals.append(norm * float(h[n]) * gauss)
        hd = 2.0 * n * float(h[n - 1]) if n >= 1 else -z * float(h[0])
        if n >= 1:
            hd = hd - z * float(h[n])
        ders.append(norm * s * hd * gauss)
    out = np.empty(len(idx))
    for d in range(len(idx)):
        g = ders[d]
        for dp in range(len(idx)):
            if dp != d:
                g *= vals[dp]
        out[d] = g
    return out


def guidance_value(x, spec: SystemSpec) -> GuidanceValue:
    """Slater determinant of the guidance orbitals as (magnitude, sign)."""
    a = _slater_matrix(x, spec)
    sign, logmag = np.linalg.slogdet(a)
    if sign == 0.0:
        return GuidanceValue(magnitude=0.0, sign_phase=0.0, log_magnitude=-math.inf)
    return GuidanceValue(
        magnitude=math.exp(logmag) if logmag < 709 else math.inf,
        sign_phase=0.0 if sign > 0 else math.pi,
        log_magnitude=float(logmag),
    )


def quantum_force(x, spec: SystemSpec):
    """F_i = (1/m) d ln Psi_G / dx_i via the inverse Slater matrix.

    Uncapped analytic value; the cap 2/sqrt(beta m) is applied at use
    sites where a time step is in play.  At an exact node the inverse
    does not exist; the pseudoinverse direction is returned (flagged via
    log) and the use-site cap bounds its effect.
    """
    a, grad = _slater_with_gradients(x, spec)
    n = spec.n_particles
    try:
        inv = np.linalg.inv(a)
        f = np.einsum("ji,ijd->id", inv, grad) / spec.mass
    except np.linalg.LinAlgError:
        inv = np.linalg.pinv(a)
        f = np.einsum("ji,ijd->id", inv, grad) / spec.mass
        log.warning("quantum_force at a guidance node; pseudoinverse direction used")
    if not np.all(np.isfinite(f)):
        f = np.nan_to_num(f, nan=0.0, posinf=1e300, neginf=-1e300)
        log.warning("quantum_force overflow near a guidance node; clamped")
    return f.ravel()


def _value_and_force(x, spec: SystemSpec):
    """guidance_value and quantum_force from one Slater factorization.

    Shared hot path for the propagation step, which needs both at the
    same point.  Returns (GuidanceValue, force or None at a node).
    """
    a, grad = _slater_with_gradients(x, spec)
    sign, logmag = np.linalg.slogdet(a)
    if sign == 0.0:
        return GuidanceValue(magnitude=0.0, sign_phase=0.0, log_magnitude=-math.inf), None
    gv = GuidanceValue(
        magnitude=math.exp(logmag) if logmag < 709 else math.inf,
        sign_phase=0.0 if sign > 0 else math.pi,
        log_magnitude=float(logmag),
    )
    f = np.einsum("ji,ijd->id", np.linalg.inv(a), grad) / spec.mass
    if not np.all(np.isfinite(f)):
        f = np.nan_to_num(f, nan=0.0, posinf=1e300, neginf=-1e300)
        log.warning("quantum_force overflow near a guidance node; clamped")
    return gv, f.ravel()


def force_cap(beta, mass) -> float:
    """Component-wise cap 2/sqrt(beta m), the scale of one diffusion step."""
    return 2.0 / math.sqrt(beta * mass)


def capped_force(x, beta, spec: SystemSpec):
    cap = force_cap(beta, spec.mass)
    return np.clip(quantum_force(x, spec), -cap, cap)


# --- propagation densities --------------------------------------------------

def _log_sinh(a):
    # log(sinh a) without overflow for large a
    if a > 20.0:
        return a + math.log1p(-math.exp(-2.0 * a)) - math.log(2.0)
    return math.log(math.sinh(a))


def log_trial_density_matrix(x, x_prev, beta, spec: SystemSpec) -> float:
    """Log of the trial-oscillator imaginary-time kernel.

    rho_T(x, x', beta) = (m w / 2 pi sinh(w b))^{ND/2}
        * exp{ -(m w / 2 sinh(w b)) [ (x^2 + x'^2) cosh(w b) - 2 x.x' ] - c_T b }
    """
    x = np.asarray(x, dtype=float).ravel()
    xp = np.asarray(x_prev, dtype=float).ravel()
    nd = x.size
    w = spec.trial_omega
    m = spec.mass
    a = w * beta
    ls = _log_sinh(a)
    quad = (float(x @ x) + float(xp @ xp)) * math.cosh(a) - 2.0 * float(x @ xp)
    return (
        0.5 * nd * (math.log(m * w) - math.log(2.0 * math.pi) - ls)
        - 0.5 * m * w * math.exp(-ls) * quad
        - spec.trial_offset * beta
    )


def trial_density_matrix(x, x_prev, beta, spec: SystemSpec) -> float:
    return math.exp(log_trial_density_matrix(x, x_prev, beta, spec))


def log_drift_diffusion_density(x, x_prev, beta, spec: SystemSpec) -> float:
    """Log of the Gaussian density actually sampled by one drift-diffusion
    step: mean x' + beta F(x') (capped force), variance beta/m per coordinate."""
    x = np.asarray(x, dtype=float).ravel()
    xp = np.asarray(x_prev, dtype=float).ravel()
    nd = x.size
    m = spec.mass
    drift = capped_force(xp, beta, spec)
    dev = x - xp - beta * drift
    return 0.5 * nd * math.log(m / (2.0 * math.pi * beta)) - 0.5 * m * float(
        dev @ dev
    ) / beta


def drift_diffusion_density(x, x_prev, beta, spec: SystemSpec) -> float:
    return math.exp(log_drift_diffusion_density(x, x_prev, beta, spec))
