"""One-off calibration for the oscillator desk-scale check (criterion 3)."""
import json
import sys
import time

from pauligfmc import SystemSpec, RunConfig
from pauligfmc.experiments import run_single

n = int(sys.argv[1])
e_t = {2: 1.98, 3: 4.45}[n]
spec = SystemSpec(n_particles=n, well_depth=3.5, well_radius=2.0, dimension=1,
                  trial_omega=1.0, trial_offset=0.0, guidance_omega=1.0)
cfg = RunConfig(delta=0.002, trial_energy=e_t, target_population=500,
                n_generations=3000, seed=20260821 + n)
t0 = time.time()
series, _ = run_single(spec, cfg, trial_only=True)
out = dict(n=n, energy=series.energy, stderr=series.stderr,
           wall=time.time() - t0)
with open(f"calib_osc_{n}.json", "w") as fh:
    json.dump(out, fh, indent=1)
print(json.dumps(out, indent=1))
