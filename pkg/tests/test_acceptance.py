"""Release acceptance suite.

Each test checks one acceptance criterion end to end and prints a single
PASS/FAIL line straight to the terminal (bypassing capture), so a plain
`pytest -v` leaves one verdict line per criterion in the log.  Criteria
1, 2 and 7 are quick; 3 takes minutes; 4-6 share one delta sweep and take
tens of minutes; 8 is the full nine-fermion run (hours) and only runs
when PAULIGFMC_FULL=1 is set.
"""
import math
import os
import sys
import time

import numpy as np
import pytest

from pauligfmc import (
    RunConfig,
    SystemSpec,
    bound_states_1d,
    bound_states_radial,
    fermi_ground_energy,
    pauli_factorization_error,
    sweep_delta,
    extrapolate_linear,
)
from pauligfmc.engine import stochastic_round
from pauligfmc.guidance import (
    guidance_value,
    quantum_force,
    trial_density_matrix,
)
from pauligfmc.oracle import random_endpoints
from pauligfmc.experiments import run_single


def _verdict(num, label, ok, detail=""):
    line = f"acceptance {num} ({label}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    assert ok, line


def well_1d_spec(n=2):
    return SystemSpec(n_particles=n, well_depth=3.5, well_radius=2.0,
                      dimension=1, trial_omega=0.5, guidance_omega=0.5)


# --- 1: oracle reference energy ---------------------------------------------

def test_oracle_reference_energy():
    t0 = time.time()
    levels = bound_states_radial(3.5, 2.0, 1.0)
    e9 = fermi_ground_energy(levels, 9)
    wall = time.time() - t0
    ok = abs(e9 - (-11.501)) <= 0.01
    _verdict(1, "oracle reference energy", ok,
             f"E(9)={e9:.6f} vs -11.501, {wall:.2f}s")


# --- 2: short-time factorization ---------------------------------------------

def test_pauli_factorization():
    t0 = time.time()
    spec = well_1d_spec()
    betas = (0.1, 0.05, 0.025, 0.0125)
    pairs = random_endpoints(100, spec, np.random.default_rng(11))
    free = pauli_factorization_error(betas, pairs, spec, potential=lambda x: 0.0)
    free_max = max(err for _, err in free.rows)
    well = pauli_factorization_error(betas, pairs, spec)
    errs = [err for _, err in well.rows]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    wall = time.time() - t0
    # free-case residual is pure rounding noise on exponents of order 1e3
    ok = free_max < 1e-11 and well.order >= 1.0 and min(ratios) >= 1.8
    _verdict(2, "pauli factorization", ok,
             f"free max {free_max:.1e}, order {well.order:.2f}, "
             f"halving ratios {min(ratios):.2f}..{max(ratios):.2f}, {wall:.1f}s")


# --- 3: fermionic oscillator, kernel off -------------------------------------

def test_oscillator_desk_scale():
    t0 = time.time()
    details = []
    ok = True
    for n, exact, e_t in ((2, 2.0, 1.98), (3, 4.5, 4.45)):
        spec = SystemSpec(n_particles=n, well_depth=3.5, well_radius=2.0,
                          dimension=1, trial_omega=1.0, trial_offset=0.0,
                          guidance_omega=1.0)
        cfg = RunConfig(delta=0.002, trial_energy=e_t, target_population=500,
                        n_generations=3000, seed=20260821 + n)
        series, _ = run_single(spec, cfg, trial_only=True)
        pull = (series.energy - exact) / series.stderr
        ok = ok and abs(series.energy - exact) <= 3 * series.stderr
        details.append(f"N={n}: {series.energy:.4f}+/-{series.stderr:.4f} "
                       f"vs {exact} ({pull:+.2f} sigma)")
    _verdict(3, "oscillator desk scale", ok,
             "; ".join(details) + f", {time.time() - t0:.0f}s")


# --- 4-6: one shared square-well delta sweep ----------------------------------

SWEEP_LADDER = (0.001, 0.002, 0.004, 0.008)


@pytest.fixture(scope="module")
def well_sweep():
    spec = well_1d_spec()
    cfg = RunConfig(delta=0.002, trial_energy=-5.9, target_population=500,
                    n_generations=3000, seed=20260821)
    t0 = time.time()
    res = sweep_delta(spec, cfg, SWEEP_LADDER)
    return res, time.time() - t0


def test_square_well_extrapolation(well_sweep):
    res, wall = well_sweep
    levels = sorted(bound_states_1d(3.5, 2.0, 1.0), key=lambda lv: lv.energy)
    exact = levels[0].energy + levels[1].energy
    fit = extrapolate_linear(res)
    pull = (fit.intercept - exact) / fit.intercept_stderr
    ok = abs(fit.intercept - exact) <= 3 * fit.intercept_stderr
    _verdict(4, "square well extrapolation", ok,
             f"intercept {fit.intercept:.4f}+/-{fit.intercept_stderr:.4f} vs "
             f"{exact:.6f} ({pull:+.2f} sigma), slope {fit.slope:.1f}, "
             f"n={fit.n_used}, sweep {wall:.0f}s")


def _ols_line(x, y):
    a = np.column_stack([np.ones_like(x), x])
    beta, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ beta
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    cov = ss_res / (len(x) - 2) * np.linalg.inv(a.T @ a)
    return beta, cov, r2


def test_killed_fraction_linearity(well_sweep):
    res, _ = well_sweep
    deltas = np.array([r.delta for r in res.rows])
    fracs = np.array([r.killed_fraction for r in res.rows])
    beta, cov, r2 = _ols_line(deltas, fracs)
    intercept_ok = abs(beta[0]) <= 2 * math.sqrt(cov[0, 0])

    # same physics with the kill threshold at 20: the rounded multiplicities
    # that exceed 20 live in a far tail, so the ladder needs larger deltas
    # for countable statistics; linearity must survive the change
    spec = well_1d_spec()
    cfg = RunConfig(delta=0.008, trial_energy=-5.9, target_population=250,
                    n_generations=1200, seed=20260822, m_max=20)
    res20 = sweep_delta(spec, cfg, (0.004, 0.008, 0.016, 0.032))
    d20 = np.array([r.delta for r in res20.rows])
    f20 = np.array([r.killed_fraction for r in res20.rows])
    _, _, r2_20 = _ols_line(d20, f20)

    ok = r2 > 0.95 and intercept_ok and r2_20 > 0.95
    _verdict(5, "killed fraction linearity", ok,
             f"M_max=5: R2 {r2:.3f}, intercept {beta[0]:.2e}"
             f"+/-{math.sqrt(cov[0, 0]):.2e}; M_max=20: R2 {r2_20:.3f}")


def test_node_blocking(well_sweep):
    res, _ = well_sweep
    rows = sorted(res.rows, key=lambda r: r.delta)
    fracs = [r.crossing_fraction for r in rows]
    ok = all(a < b for a, b in zip(fracs, fracs[1:]))
    _verdict(6, "node blocking", ok,
             "crossing fraction by delta: "
             + ", ".join(f"{r.delta:g}: {r.crossing_fraction:.2e}" for r in rows))


# --- 7: property bundle -------------------------------------------------------

def test_property_suite(tmp_path):
    t0 = time.time()
    checks = []

    # Slater antisymmetry under 1000 random transpositions
    specs = [
        SystemSpec(n_particles=3, well_depth=3.5, well_radius=2.0, dimension=1,
                   trial_omega=0.7, guidance_omega=0.7),
        SystemSpec(n_particles=2, well_depth=3.5, well_radius=2.0, dimension=3,
                   trial_omega=0.5, guidance_omega=0.5),
        SystemSpec(n_particles=4, well_depth=3.5, well_radius=2.0, dimension=2,
                   trial_omega=1.0, guidance_omega=1.0),
    ]
    rng = np.random.default_rng(13)
    anti_ok = True
    for k in range(1000):
        spec = specs[k % len(specs)]
        n, d = spec.n_particles, spec.dimension
        x = rng.normal(size=n * d)
        i, j = rng.choice(n, size=2, replace=False)
        y = x.reshape(n, d).copy()
        y[[i, j]] = y[[j, i]]
        a = guidance_value(x, spec)
        b = guidance_value(y.ravel(), spec)
        anti_ok = anti_ok and (
            math.isinf(a.log_magnitude) and math.isinf(b.log_magnitude)
            or abs(a.log_magnitude - b.log_magnitude) < 1e-10
            and a.sign_phase != b.sign_phase
        )
    checks.append(("antisymmetry", anti_ok))

    # quantum force against central differences, 1e-6 relative
    force_ok = True
    for spec in specs[:2]:
        n, d = spec.n_particles, spec.dimension
        x = np.random.default_rng(17).normal(size=n * d) * 0.8
        f = quantum_force(x, spec)
        h = 1e-5
        for k in range(n * d):
            xp, xm = x.copy(), x.copy()
            xp[k] += h
            xm[k] -= h
            fd = (guidance_value(xp, spec).log_magnitude
                  - guidance_value(xm, spec).log_magnitude) / (2 * h)
            force_ok = force_ok and abs(f[k] - fd) <= 1e-6 * max(1.0, abs(fd))
    checks.append(("quantum force", force_ok))

    # trial density matrix: semigroup quadrature and eigenfunction decay
    s1 = SystemSpec(n_particles=1, well_depth=3.5, well_radius=2.0, dimension=1,
                    trial_omega=1.0, trial_offset=0.25, guidance_omega=1.0)
    grid = np.linspace(-8.0, 8.0, 1601)
    dz = grid[1] - grid[0]
    x0, y0, b1, b2 = 0.4, -0.3, 0.35, 0.2
    left = np.array([trial_density_matrix(np.array([x0]), np.array([z]), b1, s1)
                     for z in grid])
    right = np.array([trial_density_matrix(np.array([z]), np.array([y0]), b2, s1)
                      for z in grid])
    conv = float(np.sum(left * right) * dz)
    direct = trial_density_matrix(np.array([x0]), np.array([y0]), b1 + b2, s1)
    semi_ok = abs(conv - direct) <= 1e-6 * abs(direct)
    phi = np.pi**-0.25 * np.exp(-0.5 * grid**2)
    evolved = np.array([
        float(np.sum(np.array([trial_density_matrix(np.array([x]), np.array([z]),
                                                    0.6, s1) for z in grid]) * phi))
        * dz for x in (0.0, 0.7)])
    decay = np.exp(-(0.5 + 0.25) * 0.6)
    eig_ok = np.allclose(evolved, decay * np.pi**-0.25 * np.exp(-0.5 * np.array([0.0, 0.7])**2),
                         rtol=1e-6)
    checks.append(("density matrix", semi_ok and eig_ok))

    # stochastic rounding unbiased to 3 sigma over 10^6 draws
    m = 2.37
    rrng = np.random.default_rng(23)
    draws = np.array([stochastic_round(m, rrng) for _ in range(10**6)])
    sigma = math.sqrt(0.37 * 0.63 / 10**6)
    checks.append(("rounding", abs(float(np.mean(draws)) - m) <= 3 * sigma))

    # byte-identical run output for a repeated seed
    spec = well_1d_spec()
    cfg = RunConfig(delta=0.01, trial_energy=-5.9, target_population=60,
                    n_generations=200, seed=31)
    run_single(spec, cfg, out_dir=tmp_path / "a")
    run_single(spec, cfg, out_dir=tmp_path / "b")
    bytes_a = (tmp_path / "a" / "generations.csv").read_bytes()
    bytes_b = (tmp_path / "b" / "generations.csv").read_bytes()
    checks.append(("determinism", bytes_a == bytes_b))

    ok = all(flag for _, flag in checks)
    failed = [name for name, flag in checks if not flag]
    _verdict(7, "property suite", ok,
             (f"failed: {', '.join(failed)}, " if failed else "all five, ")
             + f"{time.time() - t0:.0f}s")


# --- 8: nine fermions in three dimensions, full scale -------------------------

@pytest.mark.skipif(not os.environ.get("PAULIGFMC_FULL"),
                    reason="multi-hour run; set PAULIGFMC_FULL=1 to enable")
def test_nine_fermion_full_run():
    t0 = time.time()
    spec = SystemSpec(n_particles=9, well_depth=3.5, well_radius=2.0, dimension=3,
                      trial_omega=0.5, guidance_omega=0.5)
    exact = fermi_ground_energy(bound_states_radial(3.5, 2.0, 1.0), 9)

    cfg = RunConfig(delta=0.0005, trial_energy=-10.5, target_population=1000,
                    n_generations=2500, seed=20260823)
    series, _ = run_single(spec, cfg)
    bias = series.energy - exact
    # the finite-delta run sits clearly below the true energy, around -12.8;
    # desk-scale statistics make this directional: right sign, right scale
    mean_ok = bias < 0 and 0.13 <= -bias <= 2.6

    sweep_cfg = RunConfig(delta=0.0005, trial_energy=-10.5, target_population=1000,
                          n_generations=1200, seed=20260824)
    res = sweep_delta(spec, sweep_cfg, (0.0005, 0.001, 0.002))
    fit = extrapolate_linear(res)
    pull = (fit.intercept - exact) / fit.intercept_stderr
    fit_ok = abs(fit.intercept - exact) <= 3 * fit.intercept_stderr

    _verdict(8, "nine fermion full run", mean_ok and fit_ok,
             f"mean {series.energy:.3f}+/-{series.stderr:.3f} vs -12.8 "
             f"(bias {bias:+.3f}); intercept {fit.intercept:.3f}"
             f"+/-{fit.intercept_stderr:.3f} vs {exact:.3f} ({pull:+.2f} sigma), "
             f"{(time.time() - t0) / 60:.0f} min")
