"""Built-in experiment scenarios with the reference figure parameters."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import projectors
from .errors import InvalidSpec
from .grid import (
    CircleDirichlet,
    Domain,
    Region,
    WallDirichlet,
    WallNeumannInward,
    build_grid,
)
from .homogenize import ConstrainedProblem, shift_dirichlet
from .operators import Forcing, Generator, constant_forcing, laplacian_fd, spectral_norm, wave_block
from .penalty import PenaltyInputs, Regime
from .projectors import Projector

__all__ = ["Scenario", "ScenarioRun", "SCENARIO_NAMES", "get_scenario",
           "gaussian_initial", "tent_boundary_data", "point_source"]

GAUSSIAN_SIGMA = 0.125  # fraction of the unit box
POINT_SOURCE_VALUE = 298.0
CIRCLE_RADIUS = 0.5
WAVE_SUPPORT_RADIUS_SQ = 0.1


def _constrained_support(domain: Domain) -> np.ndarray:
    """Indices where compliant data must vanish: every constrained point and
    every swap partner of a derivative constraint."""
    idx = set(np.flatnonzero(domain.flags != int(Region.INTERIOR)).tolist())
    for j, nbrs in domain.neighbors.items():
        idx.add(j)
        idx.update(nbrs)
    return np.array(sorted(idx), dtype=np.intp)


def gaussian_initial(domain: Domain, sigma: float = GAUSSIAN_SIGMA) -> np.ndarray:
    """Centered isotropic Gaussian of height 1, cut off on the constrained
    support so the initial state satisfies the constraints exactly."""
    x = domain.coordinates()
    r2 = ((x - 0.5) ** 2).sum(axis=1)
    v = np.exp(-r2 / (2.0 * sigma**2)).astype(complex)
    v[_constrained_support(domain)] = 0.0
    return v


def tent_boundary_data(domain: Domain) -> np.ndarray:
    """Boundary values (1 - y) * tent(x) on the value-constrained points."""
    if domain.d != 2:
        raise InvalidSpec("tent boundary data is two-dimensional")
    x = domain.coordinates()
    tent = np.where(x[:, 0] <= 0.5, x[:, 0], 1.0 - x[:, 0])
    g = np.zeros(domain.size, dtype=complex)
    idx = domain.dirichlet_indices
    g[idx] = ((1.0 - x[:, 1]) * tent)[idx]
    return g


def point_source(domain: Domain, horizon: float,
                 value: float = POINT_SOURCE_VALUE) -> Forcing:
    """Constant source at the center element."""
    vec = np.zeros(domain.size, dtype=complex)
    center = domain.flatten((domain.n // 2,) * domain.d)
    vec[center] = value
    return constant_forcing(vec, horizon)


@dataclass(frozen=True, eq=False)
class ScenarioRun:
    domain: Domain
    problem: ConstrainedProblem
    measure_projector: Projector
    regime: Regime
    _inputs_template: PenaltyInputs

    def penalty_inputs(self, epsilon: float) -> PenaltyInputs:
        return replace(self._inputs_template, epsilon=epsilon)


@dataclass(frozen=True)
class Scenario:
    """Named experiment with overridable grid and stepping parameters."""

    name: str
    n: int
    t: float
    dt: float
    lambdas: tuple = (1e2, 1e3, 1e4, 1e5)
    d: int = 2
    diffusion: float = 4.0
    c2: float = 1.0

    def build(self) -> ScenarioRun:
        builder = _BUILDERS[self.name]
        return builder(self)


def _measured_norm(gen: Generator) -> float:
    return spectral_norm(gen, tol=1e-6)


def _heat_run(sc: Scenario, spec, measure_region: Region) -> ScenarioRun:
    domain = build_grid(sc.d, sc.n, spec)
    gen = laplacian_fd(domain, sc.diffusion)
    if measure_region is Region.NEUMANN:
        proj = projectors.neumann_projector(domain)
    else:
        proj = projectors.dirichlet_projector(domain)
    v0 = gaussian_initial(domain)
    forcing = point_source(domain, sc.t)
    problem = ConstrainedProblem(
        generator=gen, forcing=forcing, projector=proj, initial=v0, horizon=sc.t
    )
    inputs = PenaltyInputs(
        v_max=float(np.linalg.norm(v0)),
        A0_norm=_measured_norm(gen),
        t=sc.t,
        epsilon=1.0,
        B=forcing.B,
        B_L1=forcing.B_L1,
    )
    return ScenarioRun(domain, problem, proj, Regime.STABLE_INHOMOGENEOUS, inputs)


def _build_heat_zero(sc: Scenario) -> ScenarioRun:
    return _heat_run(sc, WallDirichlet(), Region.DIRICHLET)


def _build_heat_circle(sc: Scenario) -> ScenarioRun:
    return _heat_run(sc, CircleDirichlet(CIRCLE_RADIUS), Region.DIRICHLET)


def _build_heat_neumann(sc: Scenario) -> ScenarioRun:
    return _heat_run(sc, WallNeumannInward(), Region.NEUMANN)


def _build_heat_nonzero(sc: Scenario) -> ScenarioRun:
    domain = build_grid(sc.d, sc.n, WallDirichlet())
    gen = laplacian_fd(domain, sc.diffusion)
    proj = projectors.dirichlet_projector(domain)
    g = tent_boundary_data(domain)
    v0 = gaussian_initial(domain) + g
    base = ConstrainedProblem(
        generator=gen,
        forcing=point_source(domain, sc.t),
        projector=proj,
        initial=v0,
        horizon=sc.t,
        g=lambda t: g,
    )
    zero = np.zeros_like(g)
    shifted = shift_dirichlet(base, lambda t: g, lambda t: zero)
    inputs = PenaltyInputs(
        v_max=float(np.linalg.norm(shifted.initial)),
        A0_norm=_measured_norm(gen),
        t=sc.t,
        epsilon=1.0,
        B=shifted.forcing.B,
        B_L1=shifted.forcing.B_L1,
    )
    return ScenarioRun(domain, shifted, proj, Regime.STABLE_INHOMOGENEOUS, inputs)


def wave_initial(domain: Domain) -> np.ndarray:
    """Small sine/cosine displacement-velocity pair supported on a disk
    around the box center (coordinates taken relative to the center)."""
    x = domain.coordinates() - 0.5
    r2 = (x**2).sum(axis=1)
    support = r2 <= WAVE_SUPPORT_RADIUS_SQ
    u = 0.001 * np.prod(np.sin(x), axis=1) * support
    w = 0.01 * np.prod(np.cos(x), axis=1) * support
    return np.concatenate([u, w]).astype(complex)


def _build_wave_circle(sc: Scenario) -> ScenarioRun:
    domain = build_grid(sc.d, sc.n, CircleDirichlet(CIRCLE_RADIUS))
    lap = laplacian_fd(domain, 1.0)
    gen = wave_block(lap, sc.c2)
    N = domain.size
    idx = domain.dirichlet_indices
    # penalty on both blocks, error measured on the displacement block only
    proj = projectors.point_set_projector(np.concatenate([idx, idx + N]), 2 * N)
    measure = projectors.point_set_projector(idx, 2 * N)
    v0 = wave_initial(domain)
    v0[np.concatenate([idx, idx + N])] = 0.0
    problem = ConstrainedProblem(
        generator=gen,
        forcing=Forcing(eval=lambda t: np.zeros(2 * N, dtype=complex), B=0.0, B_L1=0.0),
        projector=proj,
        initial=v0,
        horizon=sc.t,
    )
    inputs = PenaltyInputs(
        v_max=float(np.linalg.norm(v0)),
        A0_norm=_measured_norm(gen),
        t=sc.t,
        epsilon=1.0,
    )
    return ScenarioRun(domain, problem, measure, Regime.STABLE_HOMOGENEOUS, inputs)


_BUILDERS = {
    "heat-dirichlet-zero": _build_heat_zero,
    "heat-dirichlet-nonzero": _build_heat_nonzero,
    "heat-circle": _build_heat_circle,
    "heat-neumann": _build_heat_neumann,
    "wave-circle": _build_wave_circle,
}

_DEFAULTS = {
    "heat-dirichlet-zero": dict(n=32, t=1.0, dt=1e-5),
    "heat-dirichlet-nonzero": dict(n=32, t=1.0, dt=1e-5),
    "heat-circle": dict(n=32, t=1.0, dt=1e-5),
    "heat-neumann": dict(n=16, t=2.0, dt=1e-3, lambdas=(1e3, 1e4, 1e5)),
    "wave-circle": dict(n=32, t=1.0, dt=1e-4, lambdas=(1e3, 1e4, 1e5)),
}

SCENARIO_NAMES = tuple(_DEFAULTS)


def get_scenario(name: str, **overrides) -> Scenario:
    if name not in _DEFAULTS:
        raise KeyError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")
    params = dict(_DEFAULTS[name])
    params.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario(name=name, **params)
