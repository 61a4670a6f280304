import numpy as np
import pytest
import scipy.linalg

from penproj import operators as ops
from penproj import projectors as pj
from penproj.errors import NonFinite
from penproj.grid import WallDirichlet, build_grid
from penproj.homogenize import ConstrainedProblem
from penproj.integrator import (
    StepperConfig,
    evolve,
    rk23_step,
    write_snapshots,
    write_trajectory_csv,
)
from penproj.scenarios import gaussian_initial
from tests.conftest import random_complex


def heat_problem(n=8, diffusion=1.0, horizon=0.1, forcing=None, spacing=None):
    dom = build_grid(1, n, WallDirichlet())
    gen = ops.laplacian_fd(dom, diffusion, spacing=spacing)
    prob = ConstrainedProblem(
        generator=gen,
        forcing=forcing or ops.zero_forcing(dom.size),
        projector=pj.dirichlet_projector(dom),
        initial=gaussian_initial(dom),
        horizon=horizon,
    )
    return dom, gen, prob


def test_rk23_zero_field_is_identity(rng):
    v = random_complex(rng, 5)
    v_next, err = rk23_step(lambda t, y: np.zeros_like(y), 0.0, v, 0.3)
    assert np.array_equal(v_next, v) and err == 0.0


def test_rk23_third_order_exponential():
    v_next, _ = rk23_step(lambda t, y: y, 0.0, np.array([1.0 + 0j]), 0.1)
    assert abs(v_next[0] - np.exp(0.1)) < 1e-5


def test_rk23_rotation_preserves_modulus():
    v_next, _ = rk23_step(lambda t, y: 1j * y, 0.0, np.array([1.0 + 0j]), 0.01)
    assert abs(abs(v_next[0]) - 1.0) < 1e-8


def test_rk23_raises_on_non_finite():
    with pytest.raises(NonFinite):
        rk23_step(lambda t, y: y * np.nan, 0.0, np.ones(2, dtype=complex), 0.1)


def test_evolve_lambda_zero_matches_unconstrained_reference():
    dom, gen, prob = heat_problem(horizon=0.1)
    want = scipy.linalg.expm(ops.assemble_dense(gen) * 0.1) @ prob.initial
    for mode in ("direct", "interaction"):
        traj = evolve(prob, 0.0, StepperConfig(dt=1e-4, mode=mode))
        assert np.abs(traj.final - want).max() <= 1e-10


def test_evolve_pure_penalty_is_phase_rotation(rng):
    # A = 0, b = 0: the penalty rotates the constrained component, it does
    # not damp it
    dim = 8
    gen = ops.Generator(dim=dim, apply=lambda t, v: np.zeros_like(v), norm_bound=0.0)
    dom = build_grid(1, dim, WallDirichlet())
    P = pj.dirichlet_projector(dom)
    v0 = random_complex(rng, dim)
    prob = ConstrainedProblem(
        generator=gen, forcing=ops.zero_forcing(dim), projector=P, initial=v0, horizon=1.0
    )
    traj = evolve(prob, 5.0, StepperConfig(dt=1e-3))
    want = pj.exp_apply(P, -5.0j, v0)
    assert np.abs(traj.final - want).max() <= 1e-6
    assert abs(np.linalg.norm(traj.final) - np.linalg.norm(v0)) <= 1e-7
    before = np.vdot(v0, pj.apply(P, v0)).real
    after = np.vdot(traj.final, pj.apply(P, traj.final)).real
    assert abs(after - before) <= 1e-6


def test_evolve_matches_dense_penalized_exponential():
    dom, gen, prob = heat_problem(horizon=0.1)
    lam = 1e3
    A = ops.assemble_dense(gen) - 1j * lam * pj.dense(prob.projector)
    want = scipy.linalg.expm(A * 0.1) @ prob.initial
    traj = evolve(prob, lam, StepperConfig(dt=1e-5))
    assert np.abs(traj.final - want).max() <= 1e-6


def test_mode_equivalence():
    dom, gen, prob = heat_problem(horizon=0.3)
    lam = 50.0
    direct = evolve(prob, lam, StepperConfig(dt=1e-4, save_every=500))
    inter = evolve(prob, lam, StepperConfig(dt=1e-4, save_every=500, mode="interaction"))
    assert np.allclose(direct.times, inter.times)
    assert np.abs(direct.final - inter.final).max() <= 1e-6
    # frame change is an isometry: per-time norms agree across modes
    for a, b in zip(direct.states, inter.states):
        assert abs(np.linalg.norm(a) - np.linalg.norm(b)) <= 1e-6


def test_stability_norm_bound():
    dom = build_grid(1, 8, WallDirichlet())
    source = np.zeros(dom.size, dtype=complex)
    source[4] = 2.0
    forcing = ops.constant_forcing(source, horizon=0.5)
    _, _, prob = heat_problem(horizon=0.5, forcing=forcing)
    traj = evolve(prob, 1e3, StepperConfig(dt=1e-4, save_every=100))
    bound = np.linalg.norm(prob.initial) + forcing.B_L1
    for v in traj.states:
        assert np.linalg.norm(v) <= bound + 1e-9


def test_third_order_convergence_bracket():
    # smooth scalar test: halving dt shrinks the terminal error by ~2^3
    f = lambda t, y: y * np.cos(t)
    exact = np.exp(np.sin(1.0))

    def terminal_error(dt):
        v, t = np.array([1.0 + 0j]), 0.0
        steps = round(1.0 / dt)
        for _ in range(steps):
            v, _ = rk23_step(f, t, v, dt)
            t += dt
        return abs(v[0] - exact)

    ratio = terminal_error(0.01) / terminal_error(0.005)
    assert 6.0 <= ratio <= 10.0


def test_trajectory_invariants_and_aliasing_cap():
    dom, gen, prob = heat_problem(horizon=0.01)
    lam = 1e5
    traj = evolve(prob, lam, StepperConfig(dt=1e-3))
    assert traj.times[0] == 0.0
    assert abs(traj.times[-1] - prob.horizon) <= 1e-12
    assert np.all(np.isfinite(traj.states))
    # cap dt <= (2 pi / lambda) / 20
    assert traj.stats.steps >= 0.01 / ((2 * np.pi / lam) / 20.0) - 1


def test_adaptive_mode_matches_fixed():
    dom, gen, prob = heat_problem(horizon=0.1)
    fixed = evolve(prob, 100.0, StepperConfig(dt=1e-5))
    adaptive = evolve(prob, 100.0, StepperConfig(atol=1e-10, rtol=1e-10))
    assert np.abs(fixed.final - adaptive.final).max() <= 1e-6
    assert adaptive.stats.rejected >= 0


def test_csv_and_snapshot_outputs(tmp_path):
    dom, gen, prob = heat_problem(horizon=0.05)
    traj = evolve(prob, 10.0, StepperConfig(dt=1e-3, save_every=10))
    csv_path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, prob.projector, csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,constraint_error_sq,norm"
    assert len(lines) == 1 + len(traj.times)
    bin_path = tmp_path / "traj.bin"
    write_snapshots(traj, bin_path)
    back = np.fromfile(bin_path, dtype="<c16").reshape(traj.states.shape)
    assert np.array_equal(back, traj.states)


def test_evolve_raises_on_blowup():
    gen = ops.Generator(dim=2, apply=lambda t, v: 1e8 * v, norm_bound=1e8)
    prob = ConstrainedProblem(
        generator=gen,
        forcing=ops.zero_forcing(2),
        projector=pj.point_set_projector([0], 2),
        initial=np.full(2, 1e200, dtype=complex),
        horizon=4.0,
    )
    with pytest.raises(NonFinite):
        evolve(prob, 0.0, StepperConfig(dt=0.5))
