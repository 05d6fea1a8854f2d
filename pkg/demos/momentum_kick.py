"""
A momentum kick from a weak p1 p2 interaction
=============================================

The Gaussian pair of ``gaussian_pair_trajectories.py`` couples briefly to a
test oscillator through ``p1 p2``. The test particle's momentum shifts by
``lambda x0 cos(t_kick) / 2`` while its position barely moves. Rerunning
with an ``x1 x2`` coupling at a quarter period moves position instead.
"""

from weakpot.scenarios import ScenarioConfig, run_gaussian_pair

for label, cfg in [
    ("p1 p2 kick at t = pi", ScenarioConfig("gaussian_pair", lam=1e-2)),
    ("p1 p2 kick at t = 2 pi", ScenarioConfig("gaussian_pair", lam=1e-2, period_count=2, kick_center=1.0)),
    ("x1 x2 kick at t = pi/2", ScenarioConfig("gaussian_pair", lam=1e-2, interaction="xx", kick_center=0.25)),
]:
    s = run_gaussian_pair(cfg).summary
    print(label)
    print(f"  predicted shift      {s['predicted_shift']:+.6f}")
    print(f"  exact   d<x2>, d<p2> {s['oracle_delta_x2']:+.2e}, {s['oracle_delta_p2']:+.6f}")
    print(f"  1st-ord d<x2>, d<p2> {s['first_order_delta_x2']:+.2e}, {s['first_order_delta_p2']:+.6f}")
    print(f"  frozen test particle d<x2>, d<p2> {s['static_oracle_delta_x2']:+.2e}, {s['static_oracle_delta_p2']:+.6f}")
    print(f"  coupling spread over the period: d<x2>, d<p2> "
          f"{s['constant_profile_oracle_delta_x2']:+.2e}, {s['constant_profile_oracle_delta_p2']:+.2e}")
