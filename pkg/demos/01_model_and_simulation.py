"""Simulating partially linear treatment-effect data.

The model has three layers: covariates X drawn from independent noise,
treatments T = f(X) + eta, and an outcome Y = g(X) + theta' T + eps.
Everything an estimator later sees is the (X, T, Y) table; theta is the
target. This script builds a few specs, simulates them, and shows the
bookkeeping the rest of the package relies on.

Run: python demos/01_model_and_simulation.py
"""
import numpy as np

from plrica import (
    Dataset,
    NoiseSpec,
    PlrSpec,
    build_linear_mixing,
    resolve,
    simulate,
)

rng_seed = 7

# A scalar spec with everything explicit. Noises are standardized to unit
# variance by default, so theta is comparable across families.
lap = NoiseSpec.laplace()
spec = PlrSpec(p=3, m=1, theta=[3.0], noise_x=lap, noise_t=lap, noise_y=lap)
data = simulate(spec, n=2000, seed=rng_seed)

print("columns:", data.column_names)
print("shape:", data.columns.shape)
print("first row:", np.round(data.columns[0], 3))

# The ground truth travels with simulated data: the resolved coefficient
# blocks plus the exact source draws. Loaded CSVs have neither.
gt = data.ground_truth
print("\ntheta:", gt.theta)
print("a block (treatment loadings):", np.round(np.asarray(gt.spec.a_block), 3))
print("b block (outcome loadings):  ", np.round(np.asarray(gt.spec.b_block), 3))

# For the linear nuisance the model is a square mixing of independent
# sources, and the unmixing is its exact inverse.
mixing, unmixing = build_linear_mixing(gt.spec)
print("\n|A W - I| =", np.max(np.abs(mixing @ unmixing - np.eye(5))))
reconstructed = gt.sources @ mixing.T
print("|data - sources A'| =", np.max(np.abs(data.columns - reconstructed)))

# Specs stay unresolved until they meet a generator, so one spec object
# can fan out into many independent draws of the coefficient blocks.
sparse = PlrSpec(p=8, m=1, theta=[1.0], sparsity_keep_prob=0.3)
for seed in (0, 1):
    drawn = resolve(sparse, np.random.default_rng(seed))
    b = np.asarray(drawn.b_block)
    print(f"\nseed {seed}: {int(np.sum(b != 0))}/8 outcome loadings kept")

# Nonlinear nuisance: same interface, no mixing matrix.
bent = PlrSpec(p=4, m=1, theta=[1.55], nuisance="tanh")
ds = simulate(bent, 500, seed=2)
print("\ntanh nuisance sample ok:", ds.columns.shape)

# Round-trip through CSV. Loading drops the ground truth on purpose.
path = "/tmp/plrica_demo_sample.csv"
data.to_csv(path)
back = Dataset.from_csv(path)
print("csv round trip bitwise:", np.array_equal(back.columns, data.columns))
