"""
From probe logs to jet parameters
=================================

Synthesize a measurement campaign, run it through the processing chain and
compare the fitted jet parameters with the ones that generated the data.
"""

from downwash import DEFAULT_ENVIRONMENT, DEFAULT_JET, get_preset
from downwash.pipeline import PipelineConfig, grid_flight_plan, run_pipeline, synthesize_log

kolibri = get_preset("kolibri")
env = DEFAULT_ENVIRONMENT

# a lattice of hover points, 0.33 l apart, in fourteen horizontal slices below the vehicle
res = 0.33
plan = grid_flight_plan(kolibri, res, 3.3, [res * k for k in range(8, 22)])
print(f"{len(plan)} hover points")

# probe readings with 3% multiplicative noise and a light ambient breeze
records = synthesize_log(kolibri, env, DEFAULT_JET, plan, noise=0.03, seed=7, ambient=0.05,
                         pre_takeoff_samples=20, hover_samples=1)

# filter, subtract ambient, bin, fit each slice, then fit the slices jointly
result = run_pipeline(records, kolibri, env, PipelineConfig(resolution_norm=res, pre_takeoff_window=20.0))
print(f"ambient estimate: {result.ambient:.3f} m/s")
for sl in result.slices:
    print(f"  s/l = {sl.s_norm:5.2f}  U_C/U_H = {sl.u_c_norm:.3f}  r_half/l = {sl.r_half_norm:.3f}")

# bd and s0 trade off against each other, so one noisy campaign lands a few
# percent off along that ridge; repeated campaigns scatter around the truth
fit = result.jet_parameters
for name in ("bd", "spreading_rate", "s0_norm"):
    true, got = getattr(DEFAULT_JET, name), getattr(fit, name)
    print(f"{name:15s} true {true:8.4f}  fitted {got:8.4f}  ({got / true - 1:+.1%})")

# one-sided tests of whether the measurements fall short of the profile;
# with a thousand samples per bin even a slightly misfitted profile is detected
for t in result.residual_tests:
    if t.testable:
        print(f"xi in {t.xi_interval}: n = {t.n:4d}  mean = {t.mean_residual:+.4f}  reject = {t.reject_h0}")
