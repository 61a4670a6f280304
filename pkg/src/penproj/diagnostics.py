"""Constraint-error measurement, penalty sweeps, and slope fits."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from . import projectors
from .errors import DegenerateInput, DimMismatch, GridMismatch
from .integrator import StepperConfig, Trajectory, evolve
from .penalty import bound_given_lambda, lambda_for

__all__ = [
    "SweepRow",
    "constraint_error",
    "lambda_sweep",
    "fit_slope",
    "feasible_deviation",
    "write_sweep_csv",
    "sweep_to_json",
]

CSV_HEADER = "lambda,measured_err_sq,bound,slope_window,wall_time_s"


@dataclass(frozen=True)
class SweepRow:
    lam: float
    measured_err_sq: float
    bound: float
    wall_time: float
    pre_asymptotic: bool = False
    error: str | None = None


def constraint_error(traj: Trajectory, P_measure) -> np.ndarray:
    """Per-saved-time squared constraint error <v, P v>."""
    if traj.states.shape[1] != P_measure.dim:
        raise DimMismatch(
            f"states of dim {traj.states.shape[1]} against projector dim {P_measure.dim}"
        )
    return np.array(
        [np.vdot(v, projectors.apply(P_measure, v)).real for v in traj.states]
    )


def run_one_lambda(scenario, lam: float, cfg: StepperConfig,
                   epsilon_target: float = 1e-2) -> SweepRow:
    """One penalized evolution plus its analytic bound column."""
    run = scenario.build()
    start = time.perf_counter()
    traj = evolve(run.problem, lam, cfg)
    elapsed = time.perf_counter() - start
    v = traj.final
    measured = float(np.vdot(v, projectors.apply(run.measure_projector, v)).real)
    bound = bound_given_lambda(run.regime, run.penalty_inputs(epsilon_target), lam)
    lam_req = lambda_for(run.regime, run.penalty_inputs(epsilon_target)).lam
    return SweepRow(
        lam=lam,
        measured_err_sq=measured,
        bound=bound,
        wall_time=elapsed,
        pre_asymptotic=lam < lam_req / 10.0,
    )


def lambda_sweep(scenario, lambdas, cfg: StepperConfig,
                 epsilon_target: float = 1e-2, jobs: int = 1) -> list[SweepRow]:
    """One evolve per penalty value, rows ordered by lambda.

    Failed runs are annotated per row rather than aborting the sweep.
    """
    lambdas = [float(l) for l in lambdas]
    if any(l <= 0 for l in lambdas) or sorted(lambdas) != lambdas:
        raise ValueError("lambdas must be positive and sorted")

    def safe(lam):
        try:
            return run_one_lambda(scenario, lam, cfg, epsilon_target)
        except Exception as exc:  # noqa: BLE001 - annotated per row
            return SweepRow(lam=lam, measured_err_sq=float("nan"), bound=float("nan"),
                            wall_time=0.0, error=f"{type(exc).__name__}: {exc}")

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_worker,
                                 [(scenario, lam, cfg, epsilon_target) for lam in lambdas]))
    else:
        rows = [safe(lam) for lam in lambdas]
    return sorted(rows, key=lambda r: r.lam)


def _sweep_worker(args):
    scenario, lam, cfg, epsilon_target = args
    try:
        return run_one_lambda(scenario, lam, cfg, epsilon_target)
    except Exception as exc:  # noqa: BLE001
        return SweepRow(lam=lam, measured_err_sq=float("nan"), bound=float("nan"),
                        wall_time=0.0, error=f"{type(exc).__name__}: {exc}")


def fit_slope(rows) -> float:
    """Least-squares slope of log squared error against log lambda."""
    pts = [(r.lam, r.measured_err_sq) for r in rows if r.error is None]
    if len(pts) < 2 or len({l for l, _ in pts}) < 2:
        raise DegenerateInput("need at least two rows with distinct lambda")
    if any(e <= 0 for _, e in pts):
        raise DegenerateInput("squared errors must be positive for a log fit")
    lams, errs = zip(*pts)
    return float(np.polyfit(np.log(lams), np.log(errs), 1)[0])


def fit_slope_kept(rows) -> float:
    """Slope over the rows not flagged pre-asymptotic (all rows if that
    would leave fewer than two)."""
    kept = [r for r in rows if not r.pre_asymptotic and r.error is None]
    return fit_slope(kept if len(kept) >= 2 else rows)


def feasible_deviation(traj_pen: Trajectory, traj_ref: Trajectory, P) -> np.ndarray:
    """Per-time || (I - P)(v_pen - v_ref) || against an unconstrained solve."""
    if traj_pen.times.shape != traj_ref.times.shape or not np.allclose(
        traj_pen.times, traj_ref.times, rtol=0, atol=1e-12
    ):
        raise GridMismatch("trajectories saved on different time grids")
    diffs = traj_pen.states - traj_ref.states
    return np.array([np.linalg.norm(projectors.complement_apply(P, dv)) for dv in diffs])


def write_sweep_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            window = "excluded" if r.pre_asymptotic else "kept"
            if r.error is not None:
                window = f"error:{r.error}"
            fh.write(
                f"{r.lam:.17g},{r.measured_err_sq:.17g},{r.bound:.17g},"
                f"{window},{r.wall_time:.6f}\n"
            )


def sweep_to_json(rows) -> str:
    return json.dumps(
        [
            {
                "lambda": r.lam,
                "measured_err_sq": r.measured_err_sq,
                "bound": r.bound,
                "slope_window": "excluded" if r.pre_asymptotic else "kept",
                "wall_time_s": r.wall_time,
                "error": r.error,
            }
            for r in rows
        ]
    )
