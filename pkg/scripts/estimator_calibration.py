"""Empirical calibration of the Monte Carlo probability estimator.

Runs the same two-mode stabilizer circuit across many seeds, compares each
estimate against the dense-algebra reference, and reports the empirical
failure rate (largest bin error above epsilon) next to the planned bound.
The planned sample count is conservative, so the observed rate should sit
far below delta_fail.
"""

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from zakgross.estimator import estimate, plan
from zakgross.measure import MeasurementSpec
from zakgross.qudit import CodeParams, Gate, clifford_oracle_probabilities
from zakgross.wigner import ideal_input


@dataclass
class CalibrationConfig:
    d: int = 3
    epsilon: float = 0.05
    delta_fail: float = 0.1
    n_seeds: int = 200
    threads: int = 1


def build_reference(cfg: CalibrationConfig):
    params = CodeParams(d=cfg.d, n=2)
    word = [Gate("F", (0,)), Gate("SUM", (0, 1)), Gate("P", (1,)), Gate("Z", (0,))]
    disp = [0, 1, 2, 0]
    state = ideal_input(params, [1, 0]).apply_word(word).apply_displacement(disp)
    spec = MeasurementSpec.from_params(params, (0, 1), K=cfg.d)
    oracle_gates = list(word) + [Gate("Z", (0,))] * disp[2] + [Gate("X", (1,))] * disp[1]
    exact = clifford_oracle_probabilities(params, [1, 0], oracle_gates, (0, 1))
    return state, spec, exact


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epsilon", type=float, default=0.05)
    parser.add_argument("--delta-fail", type=float, default=0.1)
    parser.add_argument("--seeds", type=int, default=200)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)
    cfg = CalibrationConfig(
        epsilon=args.epsilon,
        delta_fail=args.delta_fail,
        n_seeds=args.seeds,
        threads=args.threads,
    )

    state, spec, exact = build_reference(cfg)
    est_plan = plan(cfg.epsilon, cfg.delta_fail, state.negativity())
    print(f"# plan: {est_plan.n_samples} samples per seed (M = {est_plan.negativity:.6f})")

    t0 = time.time()
    fails = 0
    worst = 0.0
    err_sum = np.zeros_like(exact)
    se_sq = np.zeros_like(exact)
    for seed in range(cfg.n_seeds):
        rep = estimate(state, spec, est_plan, seed=seed, threads=cfg.threads)
        err = rep.probabilities - exact
        err_sum += err
        se_sq += np.square(rep.std_errors)
        top = float(np.abs(err).max())
        worst = max(worst, top)
        if top > cfg.epsilon:
            fails += 1
    elapsed = time.time() - t0

    rate = fails / cfg.n_seeds
    pooled_se = np.sqrt(se_sq / cfg.n_seeds / cfg.n_seeds)
    bias = float(np.abs(err_sum / cfg.n_seeds / np.maximum(pooled_se, 1e-15)).max())
    print(f"# {cfg.n_seeds} seeds in {elapsed:.1f}s")
    print(f"empirical failure rate: {rate:.4f} (planned bound {cfg.delta_fail})")
    print(f"worst single-seed bin error: {worst:.5f} (epsilon {cfg.epsilon})")
    print(f"largest pooled bias: {bias:.2f} standard errors")
    hoeffding = 2.0 * math.exp(-cfg.epsilon ** 2 * est_plan.n_samples / (2.0 * est_plan.negativity ** 2))
    print(f"per-bin tail bound at this plan: {hoeffding:.2e}")
    return 0 if rate <= cfg.delta_fail else 1


if __name__ == "__main__":
    sys.exit(main())
