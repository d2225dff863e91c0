"""Four estimators, one dataset family.

ica      source-separation route, no nuisance regression at all
oml      cross-fitted lasso residuals, residual-on-residual slope
homl     same residuals, higher-moment orthogonal score
ols      joint least squares on (T, X, 1)

The linear benchmark is kind to every method; the interesting part is
how the error scales with n and what each method needs to be true.

Run: python demos/03_method_comparison.py
"""
import numpy as np

from plrica import (
    NoiseSpec,
    PlrSpec,
    estimate_homl,
    estimate_ica,
    estimate_oml,
    ols_joint,
    simulate,
)

lap = NoiseSpec.laplace()
spec = PlrSpec(p=5, m=1, theta=[3.0], noise_x=lap, noise_t=lap, noise_y=lap)

print(f"{'n':>7} {'ica':>9} {'oml':>9} {'homl':>9} {'ols':>9}")
for n in (500, 2000, 8000, 32_000):
    errs = {"ica": [], "oml": [], "homl": [], "ols": []}
    for seed in range(10):
        data = simulate(spec, n, seed=1000 * seed + n)
        errs["ica"].append(abs(estimate_ica(data, seed=seed).theta_hat[0] - 3.0))
        errs["oml"].append(abs(estimate_oml(data).theta_hat[0] - 3.0))
        homl_est, _ = estimate_homl(data)
        errs["homl"].append(abs(homl_est.theta_hat[0] - 3.0))
        errs["ols"].append(abs(ols_joint(data).theta_hat[0] - 3.0))
    row = " ".join(f"{np.median(errs[k]):9.4f}" for k in ("ica", "oml", "homl", "ols"))
    print(f"{n:>7} {row}")

# Where the joint regression wins by construction, and where it cannot:
# feed the outcome regression a nonlinearity
bent = PlrSpec(p=5, m=1, theta=[1.55], nuisance="tanh",
               noise_x=lap, noise_t=lap, noise_y=lap)
data = simulate(bent, 20_000, seed=3)
print("\ntanh nuisance, theta = 1.55")
print("  ica:", round(float(estimate_ica(data, seed=3).theta_hat[0]), 4))
print("  ols:", round(float(ols_joint(data).theta_hat[0]), 4),
      " (linear-in-X misspecification is visible here)")
