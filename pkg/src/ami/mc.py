"""Monte Carlo experiment harness: power curves and asymmetry replications.

Replicates draw their RNG streams from (master seed, replicate index), so
results are reproducible and independent of execution order; rows are always
emitted in replicate order.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .estimators import SplitConfig, full_pipeline
from .grid import DEFAULT_POINTS_1D, DEFAULT_POINTS_2D
from .inference import permutation_independence_test
from .synthgen import CopulaSpec, PatternSpec, gen_copula_sample, gen_pattern

__all__ = ["derive_seed", "run_mc_asymmetry", "run_mc_power"]


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable child seed for a replicate of a seeded experiment."""
    return int(np.random.SeedSequence([master_seed, *indices]).generate_state(1)[0])


def _maybe_parallel(tasks: list, n_jobs: int) -> list:
    if n_jobs in (None, 1) or len(tasks) <= 1:
        return [t() for t in tasks]
    return Parallel(n_jobs=n_jobs)(delayed(t)() for t in tasks)


def run_mc_asymmetry(
    make_sample: Callable[[int], np.ndarray],
    reps: int,
    alpha: float = 0.05,
    master_seed: int = 0,
    n_jobs: int = 1,
    **pipeline_kwargs,
) -> tuple[list[dict], dict]:
    """Replicate the split pipeline over fresh samples; tabulate delta and CIs.

    ``make_sample(rep)`` must return an (n, 2) sample for replicate ``rep``.
    Returns per-replicate rows and a summary with the empirical mean, the
    quantile interval of the delta estimates, the mean theoretical CI width,
    the fraction of CIs covering zero, and the fraction rejecting symmetry.
    """

    def one(rep: int) -> dict:
        sample = make_sample(rep)
        report = full_pipeline(
            sample,
            SplitConfig(seed=derive_seed(master_seed, rep, 1)),
            alpha=alpha,
            **pipeline_kwargs,
        )
        return {
            "replicate": rep,
            "delta_hat": report.delta_hat,
            "ci_low": report.delta_ci_low,
            "ci_high": report.delta_ci_high,
            "mi_hat": report.mi_hat,
            "covers_zero": report.delta_ci_low <= 0.0 <= report.delta_ci_high,
            "rejects_symmetry": not (report.delta_ci_low <= 0.0 <= report.delta_ci_high),
            "theo_width": report.delta_ci_high - report.delta_ci_low,
        }

    rows = _maybe_parallel([lambda r=rep: one(r) for rep in range(reps)], n_jobs)
    deltas = np.array([r["delta_hat"] for r in rows])
    widths = np.array([r["theo_width"] for r in rows])
    q_lo, q_hi = np.quantile(deltas, [alpha / 2.0, 1.0 - alpha / 2.0])
    mean_width = float(widths.mean())
    summary = {
        "reps": reps,
        "alpha": alpha,
        "mean_delta": float(deltas.mean()),
        "sd_delta": float(deltas.std(ddof=1)),
        "quantile_ci_low": float(q_lo),
        "quantile_ci_high": float(q_hi),
        "quantile_width": float(q_hi - q_lo),
        "mean_theoretical_width": mean_width,
        "width_ratio": float((q_hi - q_lo) / mean_width) if mean_width > 0 else float("nan"),
        "coverage_zero": float(np.mean([r["covers_zero"] for r in rows])),
        "rejection_rate": float(np.mean([r["rejects_symmetry"] for r in rows])),
    }
    return rows, summary


def make_pattern_factory(pattern: str, a: float, n: int, master_seed: int) -> Callable[[int], np.ndarray]:
    def factory(rep: int) -> np.ndarray:
        return gen_pattern(PatternSpec(id=pattern, a=a, n=n, seed=derive_seed(master_seed, rep)))

    return factory


def make_copula_factory(spec: CopulaSpec, master_seed: int) -> Callable[[int], np.ndarray]:
    def factory(rep: int) -> np.ndarray:
        return gen_copula_sample(
            CopulaSpec(
                family=spec.family,
                param=spec.param,
                marginal_x=spec.marginal_x,
                marginal_y=spec.marginal_y,
                n=spec.n,
                seed=derive_seed(master_seed, rep),
            )
        )

    return factory


def run_mc_power(
    pattern: str,
    a_values: Sequence[float],
    n_values: Sequence[int],
    reps: int,
    n_permutations: int = 199,
    alpha: float = 0.05,
    master_seed: int = 0,
    n_jobs: int = 1,
    points_1d: int = DEFAULT_POINTS_1D,
    points_2d: int = DEFAULT_POINTS_2D,
    statistic: str = "ami_xy",
) -> list[dict]:
    """Empirical power of the permutation test over an (a, n) grid.

    One row per cell with the rejection rate at level ``alpha`` across
    ``reps`` fresh samples.
    """
    rows = []
    for a in a_values:
        for n in n_values:

            def one(rep: int, a=a, n=n) -> bool:
                sample = gen_pattern(
                    PatternSpec(id=pattern, a=a, n=n, seed=derive_seed(master_seed, rep, int(a * 1e6), n))
                )
                res = permutation_independence_test(
                    sample,
                    n_permutations=n_permutations,
                    alpha=alpha,
                    seed=derive_seed(master_seed, rep, int(a * 1e6), n, 7),
                    statistic=statistic,
                    points_1d=points_1d,
                    points_2d=points_2d,
                )
                return res.reject

            rejects = _maybe_parallel([lambda r=rep: one(r) for rep in range(reps)], n_jobs)
            rows.append(
                {
                    "pattern": pattern,
                    "a": a,
                    "n": n,
                    "reps": reps,
                    "n_permutations": n_permutations,
                    "alpha": alpha,
                    "rejections": int(np.sum(rejects)),
                    "power": float(np.mean(rejects)),
                }
            )
    return rows
