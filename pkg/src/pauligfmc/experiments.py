"""Run orchestration: single runs, delta sweeps, blocking errors, and the
linear delta -> 0 extrapolation.

A run is n_generations applications of advance_generation from a fresh
Metropolis-sampled initial generation.  The reported energy is the mean of
the per-generation growth estimates after discarding the burn-in prefix,
with a blocking standard error (consecutive generations are correlated
through the population).  A sweep repeats the run over a delta ladder with
per-delta derived seeds and fits E(delta) = E0 + a*delta by weighted least
squares; the systematic errors of the method are linear in delta, so the
intercept estimates the exact energy.

File outputs (when an output directory is given): generations.csv with one
row per generation, sweep.csv with one row per delta, and manifest.json
echoing the config.  CSV bytes are a pure function of (config, seed); the
manifest carries timestamps and is not.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import EngineError, _init_rng, advance_generation, sample_initial_generation
from .model import RunConfig, SystemSpec, config_to_dict

__all__ = [
    "EnergySeries",
    "SweepRow",
    "SweepResult",
    "ExtrapolationFit",
    "run_single",
    "sweep_delta",
    "blocking_error",
    "extrapolate_linear",
    "report_run",
    "report_sweep",
    "report_fit",
]

log = logging.getLogger(__name__)

_TAG_SWEEP = 0x53574550

RUN_CSV_COLUMNS = (
    "generation",
    "mean_beta",
    "signed_pop",
    "abs_pop",
    "energy",
    "killed_weight",
    "crossing_attempts",
    "intermediate_count",
)
SWEEP_CSV_COLUMNS = (
    "delta",
    "energy",
    "stderr",
    "killed_fraction",
    "crossing_fraction",
    "generations",
)


@dataclass(frozen=True, eq=False)
class EnergySeries:
    """Energy trace of one run plus its trimmed summary statistics.

    killed_fraction and crossing_fraction are normalized by the total
    number of propagation events (walkers entering a generation plus
    intermediate points), counted after burn-in like the energy.
    """

    delta: float
    trial_energy: float
    energies: np.ndarray
    burn_in: int
    energy: float
    stderr: float
    killed_fraction: float
    crossing_fraction: float

    @property
    def generations(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class SweepRow:
    delta: float
    energy: float
    stderr: float
    killed_fraction: float
    crossing_fraction: float
    generations: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    failures: tuple  # (delta, error message) pairs

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class ExtrapolationFit:
    intercept: float
    slope: float
    intercept_stderr: float
    window: tuple  # (min delta, max delta) actually used
    n_used: int
    r_squared: float
    max_studentized_residual: float


def run_single(
    spec: SystemSpec,
    cfg: RunConfig,
    out_dir=None,
    overwrite: bool = False,
    trial_only: bool = False,
):
    """Execute one run; returns (EnergySeries, list of StepStats).

    With out_dir set, writes generations.csv and manifest.json there
    (refusing to overwrite existing files unless overwrite=True).
    """
    started = _now_iso()
    rng = _init_rng(cfg.seed)
    pop = sample_initial_generation(spec, cfg.target_population, rng)
    stats = []
    events = []
    try:
        for _ in range(cfg.n_generations):
            prev_abs = pop.abs_count
            pop, st = advance_generation(pop, spec, cfg, trial_only=trial_only)
            stats.append(st)
            events.append(prev_abs + st.intermediate_count)
    except EngineError as exc:
        raise EngineError(
            f"run failed (delta={cfg.delta}, seed={cfg.seed}): {exc}"
        ) from exc
    burn = int(cfg.n_generations * cfg.burn_in_fraction)
    energies = np.array([st.energy_estimate for st in stats])
    energies.flags.writeable = False
    used = energies[burn:]
    total_events = sum(events[burn:])
    series = EnergySeries(
        delta=cfg.delta,
        trial_energy=cfg.trial_energy,
        energies=energies,
        burn_in=burn,
        energy=float(np.mean(used)),
        stderr=blocking_error(used),
        killed_fraction=sum(st.killed_weight for st in stats[burn:]) / total_events,
        crossing_fraction=sum(st.crossing_attempts for st in stats[burn:])
        / total_events,
    )
    if out_dir is not None:
        report_run(series, stats, spec, cfg, out_dir, overwrite=overwrite,
                   trial_only=trial_only, started=started)
    return series, stats


def sweep_delta(
    spec: SystemSpec,
    cfg: RunConfig,
    deltas,
    out_dir=None,
    overwrite: bool = False,
    trial_only: bool = False,
) -> SweepResult:
    """run_single once per delta with derived seeds; aggregates SweepRows.

    Individual run failures are recorded and the sweep continues; fewer
    than 3 successful rows is an error.  With out_dir set, each run writes
    into out_dir/delta_<value>/ and the aggregate into out_dir/sweep.csv.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 3:
        raise ValueError(f"need >= 3 delta values, got {len(deltas)}")
    if len(set(deltas)) != len(deltas):
        raise ValueError("delta values must be distinct")
    if any(d <= 0 for d in deltas):
        raise ValueError("delta values must be positive")
    started = _now_iso()
    rows = []
    failures = []
    for i, delta in enumerate(deltas):
        seed = int(np.random.SeedSequence([cfg.seed, _TAG_SWEEP, i]).generate_state(1, np.uint64)[0])
        cfg_i = dataclasses.replace(cfg, delta=delta, seed=seed)
        run_dir = None if out_dir is None else Path(out_dir) / f"delta_{delta:g}"
        try:
            series, _ = run_single(
                spec, cfg_i, out_dir=run_dir, overwrite=overwrite, trial_only=trial_only
            )
        except EngineError as exc:
            log.warning("sweep point delta=%g failed: %s", delta, exc)
            failures.append((delta, str(exc)))
            continue
        rows.append(
            SweepRow(
                delta=delta,
                energy=series.energy,
                stderr=series.stderr,
                killed_fraction=series.killed_fraction,
                crossing_fraction=series.crossing_fraction,
                generations=series.generations,
            )
        )
    if len(rows) < 3:
        detail = "; ".join(f"delta={d:g}: {m}" for d, m in failures)
        msg = f"sweep produced {len(rows)} successful runs, need >= 3"
        raise EngineError(msg + (f" ({detail})" if detail else ""))
    result = SweepResult(rows=tuple(rows), failures=tuple(failures))
    if out_dir is not None:
        report_sweep(result, spec, cfg, out_dir, overwrite=overwrite,
                     trial_only=trial_only, started=started, deltas=deltas)
    return result


def blocking_error(series) -> float:
    """Blocking stderr: pair-average recursively, take the worst level.

    Levels with fewer than 16 blocks are too noisy to trust and are not
    formed.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if x.size < 32:
        raise ValueError(f"series too short for blocking: need >= 32 points, got {x.size}")
    best = 0.0
    while x.size >= 16:
        best = max(best, float(x.std(ddof=1)) / math.sqrt(x.size))
        if x.size < 32:
            break
        if x.size % 2:
            x = x[:-1]
        x = 0.5 * (x[0::2] + x[1::2])
    return best


def _normalize_rows(rows):
    if isinstance(rows, SweepResult):
        rows = rows.rows
    out = []
    for row in rows:
        if isinstance(row, SweepRow):
            out.append((row.delta, row.energy, row.stderr))
        else:
            d, e, s = row[0], row[1], row[2]
            out.append((float(d), float(e), float(s)))
    return sorted(out)


def _wls_line(pts):
    """Weighted least squares y = b0 + b1*x; absolute-sigma covariance."""
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    w = np.array([1.0 / p[2] ** 2 for p in pts])
    design = np.column_stack([np.ones_like(x), x])
    normal = design.T @ (w[:, None] * design)
    cov = np.linalg.inv(normal)
    beta = cov @ (design.T @ (w * y))
    resid = y - design @ beta
    # leverage of each point in the weighted fit
    h = np.einsum("ij,jk,ik->i", design, cov, design * w[:, None])
    denom = np.sqrt(np.maximum(1.0 - h, 1e-12))
    studentized = resid * np.sqrt(w) / denom
    ss_res = float(np.sum(w * resid**2))
    ybar = float(np.sum(w * y) / np.sum(w))
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return beta, cov, r2, float(np.max(np.abs(studentized)))


def extrapolate_linear(rows) -> ExtrapolationFit:
    """Weighted linear fit E(delta) = E0 + a*delta, extrapolated to 0.

    The window is trimmed automatically: while the largest studentized
    residual exceeds 2 and more than 3 points remain, the largest delta is
    dropped.  This keeps the fit inside the regime where the bias is
    actually linear.
    """
    pts = _normalize_rows(rows)
    if len(pts) < 3:
        raise ValueError(f"need >= 3 points to extrapolate, got {len(pts)}")
    if len({p[0] for p in pts}) != len(pts):
        raise ValueError("delta values must be distinct")
    if any(p[2] <= 0 for p in pts):
        raise ValueError("stderr must be positive for every point")
    while True:
        beta, cov, r2, max_stud = _wls_line(pts)
        if max_stud <= 2.0 or len(pts) <= 3:
            break
        pts = pts[:-1]
    return ExtrapolationFit(
        intercept=float(beta[0]),
        slope=float(beta[1]),
        intercept_stderr=float(math.sqrt(cov[0, 0])),
        window=(pts[0][0], pts[-1][0]),
        n_used=len(pts),
        r_squared=r2,
        max_studentized_residual=max_stud,
    )


def _now_iso():
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + "Z"


def _git_revision():
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
    except OSError:
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 else "unknown"


def _fresh_path(directory, name, overwrite):
    path = Path(directory) / name
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass overwrite to replace")
    return path


def _write_csv(path, columns, rows):
    # repr() keeps floats shortest-round-trip so re-runs are byte-identical
    def cell(v):
        return repr(float(v)) if isinstance(v, float) else str(v)

    lines = [",".join(columns)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(path, spec, cfg, extra):
    from . import __version__

    manifest = {
        "config": config_to_dict(spec, cfg),
        "seed": cfg.seed,
        "version": __version__,
        "git": _git_revision(),
    }
    manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def report_run(series, stats, spec, cfg, out_dir, overwrite=False,
               trial_only=False, started=None):
    """Write generations.csv and manifest.json for one completed run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = _fresh_path(out, "generations.csv", overwrite)
    manifest_path = _fresh_path(out, "manifest.json", overwrite)
    rows = [
        (
            st.generation,
            st.mean_beta,
            st.signed_pop_after,
            st.abs_pop_after,
            st.energy_estimate,
            st.killed_weight,
            st.crossing_attempts,
            st.intermediate_count,
        )
        for st in stats
    ]
    _write_csv(csv_path, RUN_CSV_COLUMNS, rows)
    _write_manifest(
        manifest_path, spec, cfg,
        {
            "kind": "run",
            "trial_only": trial_only,
            "energy": series.energy,
            "stderr": series.stderr,
            "burn_in": series.burn_in,
            "started": started or _now_iso(),
            "finished": _now_iso(),
        },
    )
    return [csv_path, manifest_path]


def report_sweep(result, spec, cfg, out_dir, overwrite=False,
                 trial_only=False, started=None, deltas=None):
    """Write sweep.csv and manifest.json for a completed sweep."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = _fresh_path(out, "sweep.csv", overwrite)
    manifest_path = _fresh_path(out, "manifest.json", overwrite)
    rows = [
        (
            r.delta,
            r.energy,
            r.stderr,
            r.killed_fraction,
            r.crossing_fraction,
            r.generations,
        )
        for r in result.rows
    ]
    _write_csv(csv_path, SWEEP_CSV_COLUMNS, rows)
    _write_manifest(
        manifest_path, spec, cfg,
        {
            "kind": "sweep",
            "trial_only": trial_only,
            "deltas": deltas or [r.delta for r in result.rows],
            "failures": [{"delta": d, "error": m} for d, m in result.failures],
            "started": started or _now_iso(),
            "finished": _now_iso(),
        },
    )
    return [csv_path, manifest_path]


def report_fit(fit: ExtrapolationFit, path=None, overwrite=False):
    """Fit summary as a JSON-ready dict; optionally written to path."""
    payload = dataclasses.asdict(fit)
    payload["window"] = list(fit.window)
    if path is not None:
        path = Path(path)
        if path.exists() and not overwrite:
            raise FileExistsError(f"{path} exists; pass overwrite to replace")
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return payload
