"""Command-line front end: scenario runs, penalty sweeps, circuit emulation
checks, response-formula studies, and resource reports."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import circuits, diagnostics, kubo, projectors, resources, scenarios
from .errors import PenProjError
from .grid import CustomSpec, Region, WallDirichlet, WallNeumannInward, build_grid
from .integrator import StepperConfig, evolve, write_trajectory_csv
from .operators import laplacian_fd
from .penalty import lambda_for

LAMBDA_WARN = 1e6

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _parse_lambdas(text: str) -> list[float]:
    vals = [float(x) for x in text.split(",") if x.strip()]
    if len(vals) != len(set(vals)):
        raise ValueError("duplicate lambda values")
    return sorted(vals)


def _stepper(args, scenario) -> StepperConfig:
    dt = args.dt if args.dt is not None else scenario.dt
    return StepperConfig(dt=dt, mode=args.mode, save_every=args.save_every)


def _warn_lambda(lams) -> None:
    for lam in lams:
        if lam > LAMBDA_WARN:
            warnings.warn(
                f"lambda={lam:g} above {LAMBDA_WARN:g}; expect aliasing-driven cost",
                stacklevel=2,
            )


def _write_fields_csv(domain, initial, final, path) -> None:
    """Initial/final field snapshot (real parts) for the figure renderer."""
    with open(path, "w") as fh:
        fh.write("i,j,u0_re,u0_im,uT_re,uT_im\n")
        for flat in range(domain.size):
            coords = domain.unflatten(flat)
            i = coords[0]
            j = coords[1] if domain.d > 1 else 0
            fh.write(
                f"{i},{j},{initial[flat].real:.17g},{initial[flat].imag:.17g},"
                f"{final[flat].real:.17g},{final[flat].imag:.17g}\n"
            )


def _manifest(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def cmd_run(args) -> int:
    scen = scenarios.get_scenario(args.scenario, n=args.n, t=args.t, dt=args.dt)
    lams = _parse_lambdas(args.lambdas) if args.lambdas else [args.lam]
    _warn_lambda(lams)
    cfg = _stepper(args, scen)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = scen.build()

    lam = lams[-1]
    try:
        traj = evolve(run.problem, lam, cfg)
    except PenProjError as exc:
        print(f"solver failure at lambda={lam:g}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_trajectory_csv(traj, run.measure_projector, out / "trajectory.csv")

    unshift = run.problem.unshift or (lambda t, v: v)
    n_state = run.domain.size
    initial = unshift(0.0, run.problem.initial)[:n_state]
    final = unshift(run.problem.horizon, traj.final)[:n_state]
    _write_fields_csv(run.domain, initial, final, out / "fields.csv")

    manifest = {
        "command": "run",
        "scenario": scen.name,
        "n": scen.n,
        "d": scen.d,
        "t": scen.t,
        "dt": cfg.dt,
        "mode": cfg.mode,
        "lambda": lam,
        "lambdas": lams,
        "seed": args.seed,
        "epsilon_target": args.epsilon,
        "steps": traj.stats.steps,
        "artifacts": ["trajectory.csv", "fields.csv"],
    }
    failed = []
    if len(lams) > 1:
        rows = diagnostics.lambda_sweep(scen, lams, cfg, args.epsilon, jobs=args.jobs)
        diagnostics.write_sweep_csv(rows, out / "sweep.csv")
        manifest["artifacts"].append("sweep.csv")
        manifest["slope"] = diagnostics.fit_slope_kept(rows)
        failed = [r for r in rows if r.error is not None]
    _manifest(out / "manifest.json", manifest)
    if failed:
        print(f"solver failure at lambda={failed[0].lam:g}: {failed[0].error}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep(args) -> int:
    scen = scenarios.get_scenario(args.scenario, n=args.n, t=args.t, dt=args.dt)
    lams = _parse_lambdas(args.lambdas)
    if len(lams) < 2:
        print("sweep needs at least two lambda values", file=sys.stderr)
        return EXIT_USAGE
    _warn_lambda(lams)
    cfg = _stepper(args, scen)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = diagnostics.lambda_sweep(scen, lams, cfg, args.epsilon, jobs=args.jobs)
    diagnostics.write_sweep_csv(rows, out / "sweep.csv")
    run = scen.build()
    manifest = {
        "command": "sweep",
        "scenario": scen.name,
        "n": scen.n,
        "d": scen.d,
        "t": scen.t,
        "dt": cfg.dt,
        "mode": cfg.mode,
        "lambdas": lams,
        "seed": args.seed,
        "epsilon_target": args.epsilon,
        "slope": diagnostics.fit_slope_kept(rows),
        "lambda_required": lambda_for(run.regime, run.penalty_inputs(args.epsilon)).lam,
        "artifacts": ["sweep.csv"],
    }
    _manifest(out / "manifest.json", manifest)
    bad = [r for r in rows if r.error is not None]
    if bad:
        print(f"solver failure at lambda={bad[0].lam:g}: {bad[0].error}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def emulation_domains(max_qubits: int = 14) -> list[tuple[str, object]]:
    """Built-in domains exercised by the emulation check."""
    doms = [
        ("wall-d1n4", build_grid(1, 4, WallDirichlet())),
        ("wall-d1n8", build_grid(1, 8, WallDirichlet())),
        ("wall-d2n4", build_grid(2, 4, WallDirichlet())),
        ("wall-d2n8", build_grid(2, 8, WallDirichlet())),
        ("neumann-d1n8", build_grid(1, 8, WallNeumannInward())),
        ("neumann-d2n8", build_grid(2, 8, WallNeumannInward())),
        (
            "mixed-d1n8",
            build_grid(
                1,
                8,
                CustomSpec(
                    entries=(
                        ((0,), Region.DIRICHLET, ()),
                        ((7,), Region.NEUMANN, (((6,),))),
                    )
                ),
            ),
        ),
        (
            "robin-d1n8",
            build_grid(
                1,
                8,
                CustomSpec(
                    entries=(((6,), Region.ROBIN, ((7,), (5,))),),
                    robin_coeffs=(1.0, 1.0),
                ),
            ),
        ),
    ]
    out = []
    for name, dom in doms:
        if circuits.layout_for(dom).total <= max_qubits:
            out.append((name, dom))
    return out


def _expected_exp(domain, theta, v):
    out = np.asarray(v, dtype=complex)
    if domain.dirichlet_indices.size:
        out = projectors.exp_apply(projectors.dirichlet_projector(domain), -1j * theta, out)
    if domain.neumann_indices.size:
        out = projectors.exp_apply(projectors.neumann_projector(domain), -1j * theta, out)
    if domain.robin_indices.size:
        alpha, beta = domain.robin_coeffs
        out = projectors.exp_apply(
            projectors.robin_projector(domain, alpha, beta), -1j * theta, out
        )
    return out


def emulate_check(max_qubits: int = 14, thetas_per_domain: int = 10,
                  seed: int = 7) -> float:
    """Max deviation of every combined construction against the projector
    exponential over random angles and random states."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, dom in emulation_domains(max_qubits):
        S = 1 << circuits.layout_for(dom).state_qubits
        for _ in range(thetas_per_domain):
            theta = float(rng.uniform(0.0, 4.0 * np.pi))
            op = circuits.hamsim_combined(dom, theta)
            v = rng.standard_normal(S) + 1j * rng.standard_normal(S)
            v /= np.linalg.norm(v)
            got = op.apply_state(v)
            want = np.zeros(S, dtype=complex)
            grid_reg = op.machine.reg_of_grid
            want_grid = _expected_exp(dom, theta, v[grid_reg])
            want[grid_reg] = want_grid
            outside = np.setdiff1d(np.arange(S), grid_reg)
            want[outside] = v[outside]
            worst = max(worst, float(np.max(np.abs(got - want))))
    return worst


def cmd_emulate(args) -> int:
    dev = emulate_check(max_qubits=args.qubits_guard)
    print(f"max deviation vs projector exponential: {dev:.3e}")
    return EXIT_OK if dev <= 1e-12 else 1


def cmd_kubo_study(args) -> int:
    zetas = [float(z) for z in args.zetas.split(",")]
    domain = build_grid(1, args.n, WallDirichlet())
    gen = laplacian_fd(domain, 1.0, spacing=1.0)
    proj = projectors.dirichlet_projector(domain)
    v0 = scenarios.gaussian_initial(domain)
    setup = kubo.KuboSetup(
        V=gen, zeta=zetas[0], observable=proj, v0=v0, t=args.t, h_projector=proj
    )
    rows = kubo.order_study(setup, zetas)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kubo.write_study_csv(rows, out / "kubo_study.csv")
    print("zeta        residual      ratio")
    for r in rows:
        ratio = "-" if r.ratio is None else f"{r.ratio:.3f}"
        print(f"{r.zeta:<11g} {r.residual:<13.6e} {ratio}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    overhead = resources.heat_overhead(args.n, args.d, args.t, args.beta)
    v_max = float(args.n) ** (args.d / 2.0)
    b_l1 = args.t * v_max
    eps = float(args.n) ** (-args.d / 2.0)
    a_norm = 4.0 * args.d * float(args.n) ** (2 * args.d)
    lam_i = v_max**2 * a_norm / eps
    xi_i = lam_i * (1.0 + 2.0 * b_l1 / v_max + (b_l1 / v_max) ** 2)
    est = resources.lchs_steps(
        alpha_A=a_norm, t=args.t, v0_norm=v_max, B_L1=b_l1,
        vT_norm=np.sqrt(2.0 * v_max * b_l1), eps=eps, beta=args.beta,
        Lambda_I=lam_i, Xi_I=xi_i,
    )
    report = resources.estimate_to_json(est)
    if args.out:
        Path(args.out).write_text(report + "\n")
    print(report)
    assert abs(est.gate_overhead_log - overhead) < 1e-12
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="penproj", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("scenario", choices=scenarios.SCENARIO_NAMES)
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--t", type=float, default=None)
        sp.add_argument("--dt", type=float, default=None)
        sp.add_argument("--out", default="out")
        sp.add_argument("--mode", choices=("direct", "interaction"), default="direct")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--epsilon", type=float, default=1e-2,
                        help="target used for the pre-asymptotic flag")
        sp.add_argument("--save-every", type=int, default=None)

    run_p = sub.add_parser("run", help="evolve one scenario")
    common(run_p)
    run_p.add_argument("--lambda", dest="lam", type=float, default=1e4)
    run_p.add_argument("--lambdas", default=None, help="comma list; adds a sweep")
    run_p.set_defaults(fn=cmd_run)

    sweep_p = sub.add_parser("sweep", help="penalty sweep with bound column")
    common(sweep_p)
    sweep_p.add_argument("--lambdas", required=True)
    sweep_p.set_defaults(fn=cmd_sweep)

    em = sub.add_parser("emulate", help="verify the circuit emulations")
    em.add_argument("--domain", default="all")
    em.add_argument("--qubits-guard", type=int, default=14)
    em.set_defaults(fn=cmd_emulate)

    ks = sub.add_parser("kubo-study", help="first-order response order study")
    ks.add_argument("--zetas", default="1e-2,5e-3,2.5e-3")
    ks.add_argument("--n", type=int, default=8)
    ks.add_argument("--t", type=float, default=1.0)
    ks.add_argument("--out", default="out")
    ks.set_defaults(fn=cmd_kubo_study)

    es = sub.add_parser("estimate", help="resource report for the heat benchmark")
    es.add_argument("equation", choices=("heat",))
    es.add_argument("--n", type=int, default=32)
    es.add_argument("--d", type=int, default=2)
    es.add_argument("--t", type=float, default=1.0)
    es.add_argument("--beta", type=float, default=0.9)
    es.add_argument("--out", default=None)
    es.set_defaults(fn=cmd_estimate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PenProjError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
