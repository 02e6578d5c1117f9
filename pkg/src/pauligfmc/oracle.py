"""Exact reference results for validating the Monte Carlo machinery.

Single-particle bound states of the finite square well (1D even/odd
matching, 3D radial matching for each angular momentum), non-interacting
fermion ground energies as filled-level sums, and the exact antisymmetrized
two-fermion short-time propagator used to quantify the accuracy of the
pairwise Pauli factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect
from scipy.special import spherical_jn, spherical_kn

from .model import SystemSpec
from .potentials import pauli_action

__all__ = [
    "Level",
    "LevelTable",
    "FactorizationTable",
    "bound_states_1d",
    "bound_states_radial",
    "fermi_ground_energy",
    "exact_two_fermion_propagator",
    "pauli_factorization_error",
    "matching_residual_1d",
    "matching_residual_radial",
    "random_endpoints",
]

_SPECTROSCOPIC = "spdfghik"


@dataclass(frozen=True)
class Level:
    """One bound level: node count, angular momentum (None in 1D), energy."""

    nodes: int
    ell: int | None
    energy: float
    degeneracy: int

    @property
    def label(self) -> str:
        if self.ell is None:
            return f"n{self.nodes}"
        return f"{self.nodes + 1}{_SPECTROSCOPIC[self.ell]}"


@dataclass(frozen=True)
class LevelTable:
    """Bound levels sorted ascending in energy."""

    levels: tuple

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)

    @property
    def total_degeneracy(self) -> int:
        return sum(lv.degeneracy for lv in self.levels)


def _bisect_energy(f, lo, hi):
    # bracketed bisection only; robustness over speed, the oracle runs once
    return bisect(f, lo, hi, xtol=1e-13, rtol=8.9e-16)


# --- 1D finite well ---------------------------------------------------------

def matching_residual_1d(energy, v0, halfwidth, mass, even):
    """Residual of the 1D matching condition at the given energy.

    Even states satisfy k tan(ka) = kappa, odd states -k cot(ka) = kappa,
    with k^2 + kappa^2 = 2 m V0.  Zero residual means a bound state.
    """
    k = math.sqrt(2.0 * mass * (energy + v0))
    kappa = math.sqrt(-2.0 * mass * energy)
    z = k * halfwidth
    if even:
        return k * math.tan(z) - kappa
    return -k / math.tan(z) - kappa


def bound_states_1d(v0, halfwidth, mass) -> LevelTable:
    """All bound states of the 1D well of depth v0 on (-a, a).

    Roots of the even/odd transcendental matching conditions, one per
    monotone branch of tan between its poles, found by bracketed bisection.
    """
    a = float(halfwidth)
    z0 = a * math.sqrt(2.0 * mass * v0)

    def energy_of(z):
        return z * z / (2.0 * mass * a * a) - v0

    levels = []
    branch = 0
    while branch * math.pi / 2.0 < z0:
        lo = branch * math.pi / 2.0
        hi = min((branch + 1) * math.pi / 2.0, z0)
        even = branch % 2 == 0
        eps = 1e-12 * max(1.0, z0)

        def f(z, even=even):
            rhs = math.sqrt(max(z0 * z0 - z * z, 0.0))
            if even:
                return z * math.tan(z) - rhs
            return -z / math.tan(z) - rhs

        zlo, zhi = lo + eps, hi - eps
        if f(zlo) * f(zhi) < 0:
            z = _bisect_energy(f, zlo, zhi)
            levels.append(Level(nodes=branch, ell=None, energy=energy_of(z), degeneracy=1))
        branch += 1
    levels.sort(key=lambda lv: lv.energy)
    return LevelTable(levels=tuple(levels))


# --- 3D radial well ---------------------------------------------------------

def _spherical_jn_zeros(ell, zmax):
    """Zeros of the spherical Bessel j_ell in (0, zmax].

    Generated by recursion on the order: zeros of consecutive orders
    interlace, so each pair of j_{ell-1} zeros brackets one zero of j_ell.
    """
    if ell == 0:
        n = int(zmax / math.pi)
        return [k * math.pi for k in range(1, n + 1)]
    prev = _spherical_jn_zeros(ell - 1, zmax + math.pi)
    zeros = []
    for lo, hi in zip(prev[:-1], prev[1:]):
        flo = spherical_jn(ell, lo)
        fhi = spherical_jn(ell, hi)
        if flo * fhi < 0:
            z = bisect(lambda x: spherical_jn(ell, x), lo, hi, xtol=1e-13, rtol=8.9e-16)
            if z <= zmax:
                zeros.append(z)
    return zeros


def matching_residual_radial(energy, v0, radius, mass, ell):
    """Log-derivative mismatch at r = R between interior and exterior solutions.

    Interior: regular spherical Bessel j_ell(kr).  Exterior: decaying
    modified spherical Bessel k_ell(kappa r).  For ell = 0 a zero of this
    residual is equivalent to k cot(kR) = -kappa.
    """
    k = math.sqrt(2.0 * mass * (energy + v0))
    kappa = math.sqrt(-2.0 * mass * energy)
    zi = k * radius
    ze = kappa * radius
    interior = k * spherical_jn(ell, zi, derivative=True) / spherical_jn(ell, zi)
    exterior = kappa * spherical_kn(ell, ze, derivative=True) / spherical_kn(ell, ze)
    return interior - exterior


def bound_states_radial(v0, radius, mass, ell_max=None) -> LevelTable:
    """Bound states of the 3D spherical well, all angular momenta.

    For each ell, the matching function is monotone between the poles of
    the interior log-derivative (zeros of j_ell(kR)); each sign-changing
    branch is bisected.  With ell_max=None the search extends until an
    ell binds nothing (capped at ell=10, far beyond these well sizes).
    """
    R = float(radius)
    z0 = R * math.sqrt(2.0 * mass * v0)
    auto = ell_max is None
    ell_limit = 10 if auto else int(ell_max)

    levels = []
    for ell in range(ell_limit + 1):
        found = _radial_levels_one_ell(v0, R, mass, ell, z0)
        if auto and not found:
            break
        levels.extend(found)
    levels.sort(key=lambda lv: lv.energy)
    return LevelTable(levels=tuple(levels))


def _radial_levels_one_ell(v0, R, mass, ell, z0):
    poles = [z / R for z in _spherical_jn_zeros(ell, z0)]
    kmax = math.sqrt(2.0 * mass * v0)

    def energy_of(k):
        return k * k / (2.0 * mass) - v0

    e_bot = -v0 * (1.0 - 1e-10)
    e_top = -v0 * 1e-12
    edges = [e_bot] + [energy_of(k) for k in poles] + [e_top]

    def g(energy):
        return matching_residual_radial(energy, v0, R, mass, ell)

    out = []
    for nodes, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        width = hi - lo
        if width <= 0:
            continue
        elo, ehi = lo + 1e-9 * width, hi - 1e-9 * width
        if g(elo) * g(ehi) < 0:
            e = _bisect_energy(g, elo, ehi)
            out.append(Level(nodes=nodes, ell=ell, energy=e, degeneracy=2 * ell + 1))
    return out


# --- filled-level sums ------------------------------------------------------

def fermi_ground_energy(levels: LevelTable, n: int) -> float:
    """Ground energy of n non-interacting spinless fermions: sum of the n
    lowest single-particle energies, filling degenerate levels partially."""
    if levels.total_degeneracy < n:
        raise ValueError(
            f"system cannot bind {n} fermions "
            f"(only {levels.total_degeneracy} bound states)"
        )
    remaining = n
    total = 0.0
    for lv in sorted(levels, key=lambda lv: lv.energy):
        take = min(remaining, lv.degeneracy)
        total += take * lv.energy
        remaining -= take
        if remaining == 0:
            break
    return total


# --- exact two-fermion short-time propagator --------------------------------

def _log_single_u(x_f, x_in, beta, mass, potential):
    # log of the midpoint-rule single-particle propagator; x_f, x_in: (d,)
    d = len(x_f)
    dx2 = float(np.sum((x_f - x_in) ** 2))
    mid = 0.5 * (x_f + x_in)
    return (0.5 * d * math.log(mass / (2.0 * math.pi * beta))
            - mass * dx2 / (2.0 * beta) - beta * potential(mid))


def _well_v(spec: SystemSpec):
    def v(r):
        return -spec.well_depth if np.linalg.norm(r) <= spec.well_radius else 0.0

    return v


def _pair_coords(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(2, -1)


def exact_two_fermion_propagator(x_f, x_in, beta, spec: SystemSpec, potential=None):
    """Antisymmetrized product of single-particle midpoint propagators.

    x_f, x_in: arrays of shape (2, D), or flat (2,) in 1D.  The direct term
    propagates particle k from x_in[k] to x_f[k]; the exchange term swaps
    the final positions and enters with a minus sign.  `potential`
    overrides the spec's well (e.g. identically zero for free checks).
    """
    x_f = _pair_coords(x_f)
    x_in = _pair_coords(x_in)
    v = potential if potential is not None else _well_v(spec)
    m = spec.mass
    ld = (_log_single_u(x_f[0], x_in[0], beta, m, v)
          + _log_single_u(x_f[1], x_in[1], beta, m, v))
    lex = (_log_single_u(x_f[1], x_in[0], beta, m, v)
           + _log_single_u(x_f[0], x_in[1], beta, m, v))
    top = max(ld, lex)
    return math.exp(top) * (math.exp(ld - top) - math.exp(lex - top))


@dataclass(frozen=True)
class FactorizationTable:
    """Per-beta maximum relative error of the pairwise Pauli factorization,
    plus the convergence order fitted on the log-log ladder."""

    rows: tuple  # (beta, max relative error)
    order: float


def _relative_factorization_error(q, t):
    # |e^q - e^t| / |1 - e^q| without overflow; q = log(U^ex/U^D) so the
    # exact ratio is U^F/U^D = 1 - e^q, and t = -S approximates q
    if q == t:
        return 0.0
    top = max(q, t)
    num_log = top + math.log1p(-math.exp(-abs(q - t)))
    den_log = q if q > 700.0 else math.log(abs(math.expm1(q)))
    gap = num_log - den_log
    return math.exp(gap) if gap < 700.0 else math.inf


def pauli_factorization_error(betas, endpoints, spec: SystemSpec, potential=None):
    """Max over endpoints of |U^F - U^D (1 - e^{-S})| / |U^F| for each beta.

    U^F is the exact antisymmetrized propagator, U^D the direct product,
    S the pairwise action used by the engine's Pauli weight.  The
    discrepancy is measured relative to the exact value; normalizing by
    U^D instead would let exchange-dominated endpoints (where U^F/U^D
    grows like e^{|S|}) swamp the ladder.  For V = 0 the factorization is
    an algebraic identity and the error vanishes at machine precision;
    with a potential on, it is first order in beta.
    """
    betas = [float(b) for b in betas]
    if any(b <= 0 for b in betas):
        raise ValueError("beta values must be positive")
    if any(b1 <= b2 for b1, b2 in zip(betas[:-1], betas[1:])):
        raise ValueError("beta ladder must be decreasing")
    v = potential if potential is not None else _well_v(spec)
    m = spec.mass
    rows = []
    for beta in betas:
        worst = 0.0
        for x_f, x_in in endpoints:
            x_f = _pair_coords(x_f)
            x_in = _pair_coords(x_in)
            ld = (_log_single_u(x_f[0], x_in[0], beta, m, v)
                  + _log_single_u(x_f[1], x_in[1], beta, m, v))
            lex = (_log_single_u(x_f[1], x_in[0], beta, m, v)
                   + _log_single_u(x_f[0], x_in[1], beta, m, v))
            s = pauli_action(x_f.ravel(), x_in.ravel(), beta, spec)
            worst = max(worst, _relative_factorization_error(lex - ld, -s))
        rows.append((beta, worst))
    errs = np.array([r[1] for r in rows])
    if np.all(errs > 1e-300):
        order = float(np.polyfit(np.log(betas), np.log(errs), 1)[0])
    else:
        order = float("nan")
    return FactorizationTable(rows=tuple(rows), order=order)


def random_endpoints(n_pairs, spec: SystemSpec, rng, scale=None):
    """Random (x_f, x_in) endpoint pairs for factorization checks, Gaussian
    with a width of order the well radius so midpoints straddle the edge."""
    scale = spec.well_radius if scale is None else scale
    out = []
    for _ in range(n_pairs):
        x_in = rng.normal(0.0, scale, size=(2, spec.dimension))
        x_f = rng.normal(0.0, scale, size=(2, spec.dimension))
        out.append((x_f, x_in))
    return out
