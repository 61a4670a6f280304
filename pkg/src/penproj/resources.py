"""Quantum ODE-solver resource formulas evaluated at constant factor one.

These report scaling shapes, not calibrated gate counts; every JSON report
carries that convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import InvalidBeta

__all__ = [
    "ResourceEstimate",
    "lchs_steps",
    "heat_overhead",
    "norm_lower_bound",
    "estimate_to_json",
]

CONSTANT_FACTOR_NOTE = "all formulas evaluated with constant factor 1"


@dataclass(frozen=True)
class ResourceEstimate:
    M: float
    M_prime: float
    hamt_queries: float
    stateprep_queries: float
    gate_overhead_log: float
    parameters: dict


def _check_beta(beta: float) -> None:
    if not (0.0 < beta <= 1.0):
        raise InvalidBeta(f"beta must lie in (0, 1], got {beta}")


def lchs_steps(alpha_A: float, t: float, v0_norm: float, B_L1: float,
               vT_norm: float, eps: float, beta: float,
               Lambda_I: float, Xi_I: float,
               alpha_A0: float | None = None) -> ResourceEstimate:
    """Quadrature node counts and query counts for the solver.

    ``alpha_A0`` is the block-encoding normalization entering the query
    count; it defaults to ``alpha_A`` (the penalty shows up only in the
    inhomogeneous node count, not in the query complexity).
    """
    _check_beta(beta)
    if min(v0_norm, vT_norm, eps, t) <= 0:
        raise ValueError("norms, eps and t must be positive")
    if alpha_A0 is None:
        alpha_A0 = alpha_A
    power = 1.0 + 1.0 / beta
    M = alpha_A * t * math.log((v0_norm + B_L1) / (vT_norm * eps)) ** power
    M_prime = t * (Lambda_I + Xi_I) * math.log((1.0 + B_L1) / (vT_norm * eps)) ** power
    hamt = ((v0_norm + B_L1) / vT_norm) * alpha_A0 * t * math.log(1.0 / eps) ** power
    stateprep = (v0_norm + B_L1) / vT_norm
    return ResourceEstimate(
        M=M,
        M_prime=M_prime,
        hamt_queries=hamt,
        stateprep_queries=stateprep,
        gate_overhead_log=math.log(M_prime) if M_prime > 0 else float("-inf"),
        parameters={
            "alpha_A": alpha_A,
            "alpha_A0": alpha_A0,
            "t": t,
            "v0_norm": v0_norm,
            "B_L1": B_L1,
            "vT_norm": vT_norm,
            "eps": eps,
            "beta": beta,
            "Lambda_I": Lambda_I,
            "Xi_I": Xi_I,
            "convention": CONSTANT_FACTOR_NOTE,
        },
    )


def heat_overhead(n: int, d: int, t: float, beta: float = 0.9) -> float:
    """Gate-overhead figure log(M') for the discrete heat benchmark.

    Substitutions: generator norm 4 d n^(2d) (three-point stencil on the
    rescaled 1/(n-1) grid), v_max = n^(d/2), time-integrated forcing
    t n^(d/2), target error n^(-d/2), and a final-norm stand-in
    sqrt(2 v_max B_L1) from the solution-norm lower bound with the decay
    exponential dropped.
    """
    _check_beta(beta)
    if n < 2 or d < 1 or t <= 0:
        raise ValueError("need n >= 2, d >= 1, t > 0")
    v_max = float(n) ** (d / 2.0)
    b_l1 = t * v_max
    eps = float(n) ** (-d / 2.0)
    a_norm = 4.0 * d * float(n) ** (2 * d)
    lambda_i = v_max**2 * a_norm / eps
    xi_i = lambda_i * (1.0 + 2.0 * b_l1 / v_max + (b_l1 / v_max) ** 2)
    vt_norm = math.sqrt(2.0 * v_max * b_l1)
    est = lchs_steps(
        alpha_A=a_norm, t=t, v0_norm=v_max, B_L1=b_l1, vT_norm=vt_norm,
        eps=eps, beta=beta, Lambda_I=lambda_i, Xi_I=xi_i,
    )
    return est.gate_overhead_log


def norm_lower_bound(v0_norm: float, b_l1: float, mu_min: float,
                     D: float, t: float) -> float:
    """Final-norm lower bound 2 e^{D mu_min t} ||v0|| ||b||_{L1[0;t]} for
    positive-data diffusive flow (mu_min <= 0 is the bare stencil
    eigenvalue, D the diffusion coefficient)."""
    if mu_min > 0:
        raise ValueError("mu_min must be non-positive")
    if D <= 0:
        raise ValueError("D must be positive")
    return 2.0 * math.exp(D * mu_min * t) * v0_norm * b_l1


def estimate_to_json(est: ResourceEstimate) -> str:
    data = asdict(est)
    data["overhead_log2"] = est.gate_overhead_log / math.log(2.0)
    return json.dumps(data, sort_keys=True)
