#!/usr/bin/env python3
"""Stress the defender with wrong guesses about the attacker.

The defender trains once with fixed estimates — effort price 0.5, attack
probability 0.8, and a crude constant guess at the attack target — while the
actual attacker sweeps over a grid of effort prices and attack probabilities
and aims at y + 5 sigma. Each cell compares the equilibrium defender's mean
expected RMSE to the best conventional baseline in that cell.
"""

import time

from advreg.data import ConstantTarget, TargetSpec, split_train_test
from advreg.evaluate import GameSetting, ScenarioConfig, run_sweep
from advreg.synthetic import load_bundled

REPEATS = 5
BASELINES = ("ols", "ridge", "lasso")

ds = load_bundled("wine_like")
train, test = split_train_test(ds, 0.5, 0)

defender = GameSetting(lam=0.5, beta=0.8,
                       target=ConstantTarget(value_range=(0.0, 5 * 0.81)))
actual = GameSetting(lam=1.0, beta=0.5,
                     target=TargetSpec(delta_scale=5.0, clip_max=10.0))
scen = ScenarioConfig(n=5, defender_estimates=defender, actual=actual, seed=0,
                      defender_knows_actual=False, standardize=False)

lambdas = [0.1, 0.5, 1.0, 2.0]
betas = [0.2, 0.5, 0.8]

t0 = time.perf_counter()
grid = run_sweep(train, test, scen, lambdas, betas, REPEATS, 0)
elapsed = time.perf_counter() - t0

print(f"defender's mean expected RMSE / best baseline's, {REPEATS} repeats "
      f"({elapsed:.0f}s):\n")
print("  actual lambda   " + "".join(f"beta={b:<6g}" for b in betas))
hits = 0
for i, lam in enumerate(lambdas):
    ratios = []
    for j in range(len(betas)):
        cell = grid.cells[i][j]
        best = min(cell[a]["rmse_expected"] for a in BASELINES)
        ratio = cell["mlsg"]["rmse_expected"] / best
        hits += ratio <= 1.05
        ratios.append(ratio)
    print(f"  {lam:12.1f}   " + "".join(f"{r:<11.3f}" for r in ratios))

print(f"\ncells at or within 5% of the best baseline: {hits}/12")
print("(a ratio below 1 means the equilibrium defender wins the cell outright,")
print("despite training with the wrong effort price, probability, and target)")
