"""Shifting non-zero constraint data to zero, and the ghost-point alternative."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import projectors
from .errors import UnsupportedSupport
from .grid import Domain
from .operators import Forcing, Generator
from .projectors import Projector

__all__ = [
    "ConstrainedProblem",
    "shift_dirichlet",
    "ghost_points",
    "load_boundary_data",
    "neumann_consistency_check",
]


@dataclass(frozen=True, eq=False)
class ConstrainedProblem:
    """Evolution problem plus its constraint projector and boundary data.

    ``g`` maps time to the target constraint values (supported on the
    constrained subspace, zero for homogeneous problems).  ``unshift`` maps a
    solved state back to the original variables when the problem was produced
    by a homogenization transform.  ``slack`` is the tolerated initial
    constraint residual.
    """

    generator: Generator
    forcing: Forcing
    projector: Projector
    initial: np.ndarray
    horizon: float
    g: callable | None = None
    unshift: callable | None = None
    slack: float = 1e-10

    def compliance_residual(self) -> float:
        """|| P v0 - g(0) ||; should not exceed ``slack``."""
        target = self.g(0.0) if self.g is not None else 0.0
        return float(np.linalg.norm(projectors.apply(self.projector, self.initial) - target))

    def forcing_is_feasible(self, samples: int = 3) -> bool:
        ts = np.linspace(0.0, self.horizon, samples)
        return all(
            np.linalg.norm(projectors.apply(self.projector, self.forcing.eval(t))) < 1e-12
            for t in ts
        )


def _sample_forcing_bounds(eval_fn, horizon: float, samples: int = 33) -> tuple[float, float]:
    # sampled max with a 10% safety factor; trapezoid for the L1 bound
    ts = np.linspace(0.0, horizon, samples)
    norms = np.array([np.linalg.norm(eval_fn(t)) for t in ts])
    return float(norms.max() * 1.1), float(np.trapezoid(norms, ts) * 1.1)


def shift_dirichlet(p: ConstrainedProblem, g, g_dot) -> ConstrainedProblem:
    """Rewrite value constraints P v = g(t) as a zero-constraint problem.

    The shifted variable v' = v - g obeys v'(t)' = A v' + b'(t) with
    b'(t) = A(t) g(t) - g'(t) + b(t), and the returned problem records the
    inverse map v = v' + g(t).
    """
    proj = p.projector
    for ts in (0.0, p.horizon / 2.0, p.horizon):
        gv = np.asarray(g(ts), dtype=complex)
        if np.linalg.norm(projectors.complement_apply(proj, gv)) > 1e-10 * max(
            1.0, np.linalg.norm(gv)
        ):
            raise UnsupportedSupport("boundary data has support outside the constrained region")
        # finite-difference consistency of the supplied derivative
        delta = max(p.horizon, 1.0) * 1e-6
        lo, hi = max(ts - delta, 0.0), ts + delta
        fd = (np.asarray(g(hi)) - np.asarray(g(lo))) / (hi - lo)
        if np.linalg.norm(fd - np.asarray(g_dot(ts))) > 1e-3 * max(1.0, np.linalg.norm(fd)):
            raise UnsupportedSupport("g_dot inconsistent with finite differences of g")

    gen = p.generator
    base = p.forcing

    def b_shifted(t):
        return gen.apply(t, np.asarray(g(t), dtype=complex)) - np.asarray(g_dot(t)) + base.eval(t)

    B, B_L1 = _sample_forcing_bounds(b_shifted, p.horizon)
    shifted_initial = np.asarray(p.initial, dtype=complex) - np.asarray(g(0.0), dtype=complex)

    def unshift(t, v):
        return v + np.asarray(g(t), dtype=complex)

    return ConstrainedProblem(
        generator=gen,
        forcing=Forcing(eval=b_shifted, B=B, B_L1=B_L1),
        projector=proj,
        initial=shifted_initial,
        horizon=p.horizon,
        g=None,
        unshift=unshift,
        slack=p.slack,
    )


def ghost_points(p: ConstrainedProblem, g: np.ndarray, domain: Domain) -> ConstrainedProblem:
    """Impose constant values through dummy variables and swap constraints.

    The state grows by one slot per value-constrained point; the dummies hold
    the target values and stay decoupled from the generator, and a swap-network
    projector pairs each constrained point with its dummy.  The constrained
    points' own generator rows are handed to the constraint as well (their
    values reach the interior through the generator columns): keeping those
    rows active would push the pair mean at a rate the penalty cannot
    suppress, since the swap projector only rotates the difference mode.
    Restricting the solved state to the first N coordinates enforces the
    value constraint.
    """
    g = np.asarray(g, dtype=complex)
    idx = domain.dirichlet_indices
    N = p.generator.dim
    m = len(idx)
    gen = p.generator

    def apply(t, v):
        out = np.zeros_like(np.asarray(v, dtype=complex))
        out[:N] = gen.apply(t, v[:N])
        out[idx] = 0.0
        return out

    def apply_adjoint(t, v):
        adj = gen.apply_adjoint if gen.apply_adjoint is not None else gen.apply
        masked = np.asarray(v[:N], dtype=complex).copy()
        masked[idx] = 0.0
        out = np.zeros_like(np.asarray(v, dtype=complex))
        out[:N] = adj(t, masked)
        return out

    aug_gen = Generator(
        dim=N + m,
        apply=apply,
        is_time_dependent=gen.is_time_dependent,
        norm_bound=gen.norm_bound,
        mu_R_max=gen.mu_R_max,
        mu_min=gen.mu_min,
        apply_adjoint=apply_adjoint,
    )
    pairs = [(int(j), N + slot) for slot, j in enumerate(idx)]
    aug_proj = projectors.swap_network_projector(pairs, N + m)

    base = p.forcing

    def aug_forcing(t):
        out = np.zeros(N + m, dtype=complex)
        out[:N] = base.eval(t)
        return out

    initial = np.zeros(N + m, dtype=complex)
    initial[:N] = p.initial
    initial[N:] = g[idx]

    def unshift(t, v):
        return np.asarray(v)[:N]

    return ConstrainedProblem(
        generator=aug_gen,
        forcing=Forcing(eval=aug_forcing, B=base.B, B_L1=base.B_L1),
        projector=aug_proj,
        initial=initial,
        horizon=p.horizon,
        g=None,
        unshift=unshift,
        slack=p.slack,
    )


def load_boundary_data(domain: Domain, source) -> np.ndarray:
    """Boundary data from JSON ({"indices": [[...]], "values": [...]}) or a
    named built-in ("tent")."""
    import json

    if source == "tent":
        from .scenarios import tent_boundary_data

        return tent_boundary_data(domain)
    data = json.loads(source) if isinstance(source, str) else source
    g = np.zeros(domain.size, dtype=complex)
    if len(data["indices"]) != len(data["values"]):
        raise ValueError("indices and values must have equal length")
    for j, val in zip(data["indices"], data["values"]):
        g[domain.flatten(j)] = val
    return g


def neumann_consistency_check(domain: Domain, h_data: np.ndarray,
                              laplacian_integral: float, tol: float = 1e-8) -> bool:
    """Discrete solvability condition for a pure derivative-constraint problem:
    the surface sum of the flux data must match the volume sum of the
    second-derivative field."""
    h_data = np.asarray(h_data)
    idx = domain.neumann_indices
    values = h_data[idx] if h_data.shape == (domain.size,) else h_data
    surface = float(np.sum(values)) * domain.spacing ** (domain.d - 1)
    return abs(surface - laplacian_integral) <= tol
