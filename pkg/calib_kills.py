"""One-off probe of killed-weight rates vs delta and M_max."""
import json
import time

from pauligfmc import SystemSpec, RunConfig
from pauligfmc.experiments import run_single

spec = SystemSpec(n_particles=2, well_depth=3.5, well_radius=2.0, dimension=1,
                  trial_omega=0.5, guidance_omega=0.5)
rows = []
t0 = time.time()
for m_max in (5, 20):
    for delta in (0.004, 0.008, 0.016, 0.032):
        cfg = RunConfig(delta=delta, trial_energy=-5.9, target_population=250,
                        n_generations=700, seed=77, m_max=m_max)
        try:
            series, stats = run_single(spec, cfg)
        except Exception as exc:
            rows.append(dict(m_max=m_max, delta=delta, error=str(exc)))
            continue
        rows.append(dict(m_max=m_max, delta=delta, energy=series.energy,
                         killed_fraction=series.killed_fraction,
                         crossing_fraction=series.crossing_fraction))
out = dict(rows=rows, wall=time.time() - t0)
with open("calib_kills.json", "w") as fh:
    json.dump(out, fh, indent=1)
print(json.dumps(out, indent=1))
