# %% [markdown]
# # A small robustness study
#
# `run_scenario` repeats the generate, fit and score loop for several
# methods. We contrast alpha = 0 and alpha = 0.3 with clean data,
# then with response outliers, then with leverage points.
# Five replicates keep the run short; the test suite uses more.

# %%
from rpsparse import Method, ScenarioSpec, XOutliers, YOutliers, run_scenario

methods = [Method(0.0, "SCAD"), Method(0.3, "SCAD")]
scenarios = {
    "clean": None,
    "y-outliers": YOutliers(fraction=0.1, shift=20.0),
    "x-outliers": XOutliers(fraction=0.1, shift=20.0, n_cols=10),
}
for label, cont in scenarios.items():
    spec = ScenarioSpec(n=100, p=100, contamination=cont, replications=5, seed=1)
    result = run_scenario(spec, methods)
    for row in result.summary:
        print(f"{label:11s} {row['method']:14s} MSES={row['mses']:.4f} "
              f"TP={row['tp']:.2f} TN={row['tn']:.3f} EE={row['ee']:.3f}")

# %% [markdown]
# Under contamination the Gaussian fit loses accuracy on the signal
# coefficients by orders of magnitude. The robust fit stays near its clean
# accuracy. The same study runs from the shell:
#
#     rpsparse simulate --output-dir out --contamination y --alpha 0 0.3
