"""Acceptance gate: one test per criterion, each at its stated tolerance,
printing a PASS/FAIL line.  The sweep-based criteria share module-scoped
runs; everything here executes in a plain `pytest` invocation."""

import math
import time

import numpy as np
import pytest
import scipy.linalg

from penproj import circuits, diagnostics, kubo, operators as ops, projectors as pj
from penproj.cli import emulate_check, emulation_domains
from penproj.grid import CustomSpec, Region, WallDirichlet, build_grid
from penproj.homogenize import ConstrainedProblem, ghost_points, shift_dirichlet
from penproj.integrator import StepperConfig, evolve
from penproj.penalty import PenaltyInputs, Regime, lambda_for
from penproj.resources import heat_overhead, norm_lower_bound
from penproj.scenarios import gaussian_initial, get_scenario, tent_boundary_data


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def capped(dt: float, lam: float) -> float:
    return min(dt, (2.0 * math.pi / lam) / 20.0)


@pytest.fixture(scope="module")
def heat_sweep():
    scen = get_scenario("heat-dirichlet-zero", n=16)
    start = time.perf_counter()
    rows = diagnostics.lambda_sweep(
        scen, [1e2, 1e3, 1e4, 1e5], StepperConfig(dt=1e-4), epsilon_target=1e-2
    )
    return rows, time.perf_counter() - start


@pytest.fixture(scope="module")
def wave_sweep():
    scen = get_scenario("wave-circle", n=16)
    rows = diagnostics.lambda_sweep(
        scen, [1e3, 1e4, 1e5], StepperConfig(dt=1e-4), epsilon_target=1e-2
    )
    return rows


@pytest.fixture(scope="module")
def neumann_rows():
    scen = get_scenario("heat-neumann", n=16)
    return diagnostics.lambda_sweep(
        scen, [1e3, 1e5], StepperConfig(dt=1e-3), epsilon_target=1e-2
    )


def test_convergence_slope_heat_wall(heat_sweep):
    rows, elapsed = heat_sweep
    slope = diagnostics.fit_slope(rows)
    report(
        "convergence slope (heat wall-Dirichlet)",
        slope <= -0.9 and elapsed < 300.0,
        f"slope={slope:.3f} (<= -0.9), sweep wall time {elapsed:.0f}s (< 300s)",
    )


def test_bound_dominance_all_sweeps(heat_sweep, wave_sweep, neumann_rows):
    rows = list(heat_sweep[0]) + list(wave_sweep) + list(neumann_rows)
    ok = all(r.error is None and r.measured_err_sq <= r.bound for r in rows)
    margins = [math.log10(r.bound / r.measured_err_sq) for r in rows]
    report(
        "bound dominance (all sweep rows)",
        ok,
        f"{len(rows)} rows, log10 margins in [{min(margins):.1f}, {max(margins):.1f}]",
    )


def test_neumann_two_decade_decay(neumann_rows):
    lo, hi = neumann_rows[0], neumann_rows[1]
    ratio = hi.measured_err_sq / lo.measured_err_sq
    report(
        "Neumann derivative-constraint decay",
        ratio <= 3.0e-2,
        f"err_sq(1e5)/err_sq(1e3) = {ratio:.2e} (<= 3e-2)",
    )


def test_wave_slope(wave_sweep):
    kept = [r for r in wave_sweep if not r.pre_asymptotic]
    slope = diagnostics.fit_slope(kept if len(kept) >= 2 else wave_sweep)
    report(
        "wave circle-Dirichlet slope",
        slope <= -0.9,
        f"slope={slope:.3f} over {len(kept)} kept rows (<= -0.9)",
    )


def _random_idempotent(rng, dim):
    kind = rng.integers(0, 3)
    if kind == 0:
        k = int(rng.integers(1, dim // 2 + 1))
        idx = rng.choice(dim, size=k, replace=False)
        return pj.point_set_projector(idx, dim)
    perm = rng.permutation(dim)
    pairs = [(int(perm[2 * i]), int(perm[2 * i + 1])) for i in range(int(rng.integers(1, dim // 4 + 1)))]
    swap = pj.swap_network_projector(pairs, dim)
    if kind == 1:
        return swap
    used = {i for p in pairs for i in p}
    free = [i for i in range(dim) if i not in used]
    if not free:
        return swap
    points = pj.point_set_projector(free[: max(1, len(free) // 2)], dim)
    return pj.sum_projector([points, swap])


def test_projector_exponential_oracle(rng):
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        dim = int(rng.integers(8, 65))
        P = _random_idempotent(rng, dim)
        xi = complex(rng.uniform(-1.0, 1.0), rng.uniform(-4 * math.pi, 4 * math.pi))
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        got = pj.exp_apply(P, xi, v)
        want = scipy.linalg.expm(xi * pj.dense(P)) @ v
        worst = max(worst, float(np.abs(got - want).max()))
    elapsed = time.perf_counter() - start
    report(
        "projector-exponential oracle",
        worst <= 1e-12 and elapsed < 10.0,
        f"max deviation {worst:.2e} over 200 triples (<= 1e-12), {elapsed:.1f}s (< 10s)",
    )


def test_circuit_emulation():
    start = time.perf_counter()
    worst = emulate_check(max_qubits=14, thetas_per_domain=10)
    counts_ok = True
    for _, dom in emulation_domains(max_qubits=14):
        a = circuits.hamsim_combined(dom, 0.4)
        b = circuits.hamsim_combined(dom, 400.0)
        counts_ok &= a.gate_count == b.gate_count
    elapsed = time.perf_counter() - start
    report(
        "circuit emulation vs projector exponential",
        worst <= 1e-12 and counts_ok and elapsed < 60.0,
        f"max deviation {worst:.2e} (<= 1e-12), gate counts angle-independent: "
        f"{counts_ok}, {elapsed:.1f}s (< 60s)",
    )


def test_kubo_order_study():
    start = time.perf_counter()
    dom = build_grid(1, 8, WallDirichlet())
    gen = ops.laplacian_fd(dom, 1.0, spacing=1.0)
    P = pj.dirichlet_projector(dom)
    setup = kubo.KuboSetup(
        V=gen, zeta=1e-2, observable=P, v0=gaussian_initial(dom), t=1.0, h_projector=P
    )
    rows = kubo.order_study(setup, [1e-2, 5e-3, 2.5e-3])
    ratios = [r.ratio for r in rows[1:]]
    elapsed = time.perf_counter() - start
    report(
        "first-order response order study",
        all(3.0 <= r <= 5.0 for r in ratios) and elapsed < 120.0,
        f"halving ratios {[f'{r:.2f}' for r in ratios]} in [3, 5], {elapsed:.1f}s (< 120s)",
    )


def test_final_norm_lower_bound():
    n, D, t_end = 8, 1.0, 0.5
    dom = build_grid(1, n, WallDirichlet())
    gen = ops.laplacian_fd(dom, D, spacing=1.0)
    x = np.arange(n)
    v0 = np.exp(-((x - 3.5) ** 2) / 4.0).astype(complex)  # positive Gaussian
    b = np.full(n, 0.5, dtype=complex)  # constant positive source
    forcing = ops.constant_forcing(b, horizon=t_end)
    prob = ConstrainedProblem(
        generator=gen, forcing=forcing,
        projector=pj.dirichlet_projector(dom), initial=v0, horizon=t_end,
    )
    traj = evolve(prob, 0.0, StepperConfig(dt=1e-4))
    measured = float(np.linalg.norm(traj.final) ** 2)
    bound = norm_lower_bound(float(np.linalg.norm(v0)), forcing.B_L1, -4.0, D, t_end)
    report(
        "final-norm lower bound",
        measured >= bound > 0.0,
        f"||v(t)||^2 = {measured:.4f} >= bound {bound:.4f}",
    )


def test_homogenization_round_trip():
    n, lam, t_end, D = 8, 1e5, 0.25, 0.25
    dom = build_grid(2, n, WallDirichlet())
    gen = ops.laplacian_fd(dom, D)
    P = pj.dirichlet_projector(dom)
    g = tent_boundary_data(dom)
    base = ConstrainedProblem(
        generator=gen, forcing=ops.zero_forcing(dom.size), projector=P,
        initial=gaussian_initial(dom) + g, horizon=t_end, g=lambda t: g,
    )
    zero = np.zeros_like(g)
    cfg = StepperConfig(dt=1e-4)
    shifted = shift_dirichlet(base, lambda t: g, lambda t: zero)
    v_shift = shifted.unshift(t_end, evolve(shifted, lam, cfg).final)
    aug = ghost_points(base, g, dom)
    v_ghost = aug.unshift(t_end, evolve(aug, lam, cfg).final)
    feas = dom.interior_indices
    diff = float(np.abs(v_shift[feas] - v_ghost[feas]).max())
    report(
        "homogenization round-trip (shift vs ghost points)",
        diff <= 1e-4,
        f"max feasible-region disagreement {diff:.2e} (<= 1e-4)",
    )


def test_penalty_formula_examples_and_monotonicity(rng):
    lam_400 = lambda_for(
        Regime.STABLE_HOMOGENEOUS,
        PenaltyInputs(v_max=1.0, A0_norm=2.0, t=1.0, epsilon=0.01),
    ).lam
    lam_80 = lambda_for(
        Regime.STABLE_INHOMOGENEOUS,
        PenaltyInputs(v_max=1.0, A0_norm=1.0, t=1.0, epsilon=0.1, B=1.0),
    ).lam
    import dataclasses

    mono_ok = True
    for _ in range(1000):
        base = PenaltyInputs(
            v_max=rng.uniform(0.1, 5.0),
            A0_norm=rng.uniform(0.1, 5.0),
            t=rng.uniform(0.1, 3.0),
            epsilon=rng.uniform(1e-4, 1.0),
            B=rng.uniform(0.0, 3.0),
            B_L1=rng.uniform(0.0, 3.0),
            mu_R_max=rng.uniform(1e-3, 1.0),
            anticomm_norm=rng.uniform(0.1, 3.0),
        )
        for regime in Regime:
            lam = lambda_for(regime, base).lam
            eased = dataclasses.replace(base, epsilon=base.epsilon * 1.7)
            mono_ok &= lambda_for(regime, eased).lam <= lam
            for fld in ("v_max", "A0_norm", "B", "t"):
                harder = dataclasses.replace(base, **{fld: getattr(base, fld) * 1.3})
                mono_ok &= lambda_for(regime, harder).lam >= lam
    report(
        "penalty formulas (worked values and monotonicity)",
        lam_400 == 400.0 and lam_80 == 80.0 and mono_ok,
        f"lambda examples ({lam_400:g}, {lam_80:g}) == (400, 80); "
        f"monotone over 1000-point grid: {mono_ok}",
    )


def test_resource_scaling_signature():
    ok = True
    details = []
    for d in (1, 2):
        for n in (8, 16, 32):
            inc = heat_overhead(2 * n, d, 1.0) - heat_overhead(n, d, 1.0)
            ok &= d * math.log(2) <= inc <= 7 * d * math.log(2)
            details.append(f"d={d},n={n}:{inc / math.log(2):.2f}")
    report(
        "resource scaling (heat overhead doubling)",
        ok,
        "log2 increments " + ", ".join(details) + " within [d, 7d]",
    )
