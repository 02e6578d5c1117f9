"""One-off calibration for the acceptance sweep (criteria 4-6)."""
import json
import time

import numpy as np

from pauligfmc import SystemSpec, RunConfig, sweep_delta, extrapolate_linear

spec = SystemSpec(n_particles=2, well_depth=3.5, well_radius=2.0, dimension=1,
                  trial_omega=0.5, guidance_omega=0.5)
cfg = RunConfig(delta=0.002, trial_energy=-5.9, target_population=500,
                n_generations=3000, seed=20260821)
t0 = time.time()
res = sweep_delta(spec, cfg, (0.001, 0.002, 0.004, 0.008))
rows = [dict(delta=r.delta, energy=r.energy, stderr=r.stderr,
             killed_fraction=r.killed_fraction,
             crossing_fraction=r.crossing_fraction,
             generations=r.generations) for r in res.rows]
fit = extrapolate_linear(res)
out = dict(rows=rows, intercept=fit.intercept, stderr=fit.intercept_stderr,
           slope=fit.slope, r2=fit.r_squared, n_used=fit.n_used,
           wall=time.time() - t0)
with open("calib_sweep.json", "w") as fh:
    json.dump(out, fh, indent=1)
print(json.dumps(out, indent=1))
