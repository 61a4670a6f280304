"""Time stepping for the penalized dynamics, directly or in the projector's
interaction frame.

Both modes obey the anti-aliasing cap dt <= (2 pi / lambda) / 20: the direct
equations are stiff in amplitude, the interaction-frame ones oscillate in
time at the same rate, and an explicit stepper must resolve either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import projectors
from .errors import NonFinite, StepSizeUnderflow
from .homogenize import ConstrainedProblem

__all__ = ["StepperConfig", "Trajectory", "StepStats", "rk23_step", "evolve",
           "write_trajectory_csv", "write_snapshots"]

ALIAS_SAMPLES_PER_PERIOD = 20


@dataclass(frozen=True)
class StepperConfig:
    """Fixed step (dt) or embedded-error adaptive stepping (atol, rtol)."""

    dt: float | None = None
    atol: float | None = None
    rtol: float | None = None
    mode: str = "direct"  # "direct" | "interaction"
    save_every: int | None = None  # None: decimate to ~400 saved states
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.mode not in ("direct", "interaction"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.dt is None and (self.atol is None or self.rtol is None):
            raise ValueError("need either dt or (atol, rtol)")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class StepStats:
    steps: int
    rejected: int
    max_err_est: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), dim) complex
    final: np.ndarray
    stats: StepStats


# Bogacki-Shampine 3(2) tableau
_B_HIGH = (2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0)
_B_ERR = (-5.0 / 72.0, 1.0 / 12.0, 1.0 / 9.0, -1.0 / 8.0)


def _bs_step(f, t, v, dt, k1):
    k2 = f(t + 0.5 * dt, v + (0.5 * dt) * k1)
    k3 = f(t + 0.75 * dt, v + (0.75 * dt) * k2)
    v_next = v + dt * (_B_HIGH[0] * k1 + _B_HIGH[1] * k2 + _B_HIGH[2] * k3)
    k4 = f(t + dt, v_next)
    err_vec = dt * (_B_ERR[0] * k1 + _B_ERR[1] * k2 + _B_ERR[2] * k3 + _B_ERR[3] * k4)
    return v_next, float(np.linalg.norm(err_vec)), k4


def rk23_step(f, t: float, v: np.ndarray, dt: float):
    """One embedded 3(2) step; returns (v_next, err_est)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = np.asarray(v, dtype=complex)
    v_next, err, _ = _bs_step(f, t, v, dt, f(t, v))
    if not (np.isfinite(err) and np.all(np.isfinite(v_next))):
        raise NonFinite(f"non-finite state after step at t={t}")
    return v_next, err


def _capped_dt(dt: float, lam: float) -> float:
    if lam > 0:
        return min(dt, (2.0 * math.pi / lam) / ALIAS_SAMPLES_PER_PERIOD)
    return dt


def evolve(problem: ConstrainedProblem, lam: float, cfg: StepperConfig) -> Trajectory:
    """Integrate v' = A(t) v - i lambda P v + b(t) to the horizon.

    Interaction mode integrates the frame-rotated variable with the projector
    exponentials applied analytically, then maps saved states back.
    """
    gen, P, forcing = problem.generator, problem.projector, problem.forcing
    T = problem.horizon
    v0 = np.asarray(problem.initial, dtype=complex)
    if v0.shape != (gen.dim,):
        raise ValueError(f"initial state has shape {v0.shape}, expected ({gen.dim},)")

    interaction = cfg.mode == "interaction"
    feasible_forcing = forcing.B == 0.0 or problem.forcing_is_feasible()

    if interaction:
        def f(t, v):
            inner = projectors.exp_apply(P, -1j * lam * t, v)
            out = projectors.exp_apply(P, 1j * lam * t, gen.apply(t, inner))
            if forcing.B != 0.0:
                b = forcing.eval(t)
                out = out + (b if feasible_forcing else projectors.exp_apply(P, 1j * lam * t, b))
            return out

        def to_lab(t, v):
            return projectors.exp_apply(P, -1j * lam * t, v)
    else:
        def f(t, v):
            out = gen.apply(t, v) - 1j * lam * projectors.apply(P, v)
            if forcing.B != 0.0:
                out = out + forcing.eval(t)
            return out

        def to_lab(t, v):
            return v

    if cfg.dt is not None:
        dt = _capped_dt(cfg.dt, lam)
        nsteps = max(1, math.ceil(T / dt - 1e-12))
        if nsteps > cfg.max_steps:
            raise StepSizeUnderflow(f"{nsteps} steps exceed max_steps={cfg.max_steps}")
        dt = T / nsteps
        save_every = cfg.save_every or max(1, nsteps // 400)
        times, states = [0.0], [to_lab(0.0, v0)]
        v, t = v0, 0.0
        k1 = f(t, v)
        max_err = 0.0
        for step in range(nsteps):
            v, err, k1 = _bs_step(f, t, v, dt, k1)
            t = (step + 1) * dt
            if not math.isfinite(err):
                raise NonFinite(f"non-finite state at t={t}")
            max_err = max(max_err, err)
            if (step + 1) % save_every == 0 or step + 1 == nsteps:
                times.append(t)
                states.append(to_lab(t, v))
        stats = StepStats(steps=nsteps, rejected=0, max_err_est=max_err)
    else:
        dt_cap = _capped_dt(T, lam)
        dt = min(dt_cap, T / 100.0)
        times, states = [0.0], [to_lab(0.0, v0)]
        v, t = v0, 0.0
        steps = rejected = 0
        max_err = 0.0
        while t < T - 1e-14 * T:
            dt = min(dt, T - t, dt_cap)
            if dt < 1e-15 * T:
                raise StepSizeUnderflow(f"step size underflow at t={t}")
            k1 = f(t, v)
            v_next, err, _ = _bs_step(f, t, v, dt, k1)
            if not math.isfinite(err):
                raise NonFinite(f"non-finite state at t={t}")
            tol = cfg.atol + cfg.rtol * float(np.linalg.norm(v))
            if err <= tol:
                t += dt
                v = v_next
                steps += 1
                max_err = max(max_err, err)
                if cfg.save_every and steps % cfg.save_every == 0:
                    times.append(t)
                    states.append(to_lab(t, v))
            else:
                rejected += 1
            factor = 0.9 * (tol / err) ** (1.0 / 3.0) if err > 0 else 5.0
            dt *= min(5.0, max(0.2, factor))
            if steps + rejected > cfg.max_steps:
                raise StepSizeUnderflow("adaptive stepping exceeded max_steps")
        if times[-1] != t:
            times.append(t)
            states.append(to_lab(t, v))
        stats = StepStats(steps=steps, rejected=rejected, max_err_est=max_err)

    states = np.asarray(states)
    if not np.all(np.isfinite(states)):
        raise NonFinite("trajectory contains non-finite entries")
    return Trajectory(times=np.asarray(times), states=states, final=states[-1], stats=stats)


def write_trajectory_csv(traj: Trajectory, P, path) -> None:
    """CSV with one row per saved time: t, squared constraint error, norm."""
    with open(path, "w") as fh:
        fh.write("t,constraint_error_sq,norm\n")
        for t, v in zip(traj.times, traj.states):
            err_sq = float(np.vdot(v, projectors.apply(P, v)).real)
            fh.write(f"{t:.17g},{err_sq:.17g},{float(np.linalg.norm(v)):.17g}\n")


def write_snapshots(traj: Trajectory, path) -> None:
    """Binary dump: little-endian interleaved re/im doubles, row-major states."""
    np.ascontiguousarray(traj.states.astype("<c16")).tofile(path)
