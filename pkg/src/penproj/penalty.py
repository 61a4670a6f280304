"""Penalty strength selection and interaction-frame smoothness factors.

Every formula keeps its explicit constant; nothing here is asymptotic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DivisionByZero, InvalidRegimeInputs

__all__ = [
    "Regime",
    "PenaltyInputs",
    "PenaltySpec",
    "lambda_for",
    "bound_given_lambda",
    "smoothness_factors",
]


class Regime(str, Enum):
    STABLE_HOMOGENEOUS = "stable_homogeneous"
    STABLE_INHOMOGENEOUS = "stable_inhomogeneous"
    NON_STABLE = "non_stable"
    TIME_DEPENDENT = "time_dependent"
    TIME_DEPENDENT_INHOMOGENEOUS = "time_dependent_inhomogeneous"


@dataclass(frozen=True)
class PenaltyInputs:
    """Quantities entering the penalty-strength requirements.

    ``anticomm_norm`` is max_t || P A(t) + A(t)^dagger P || for the
    time-dependent regimes.  ``frobenius_norm``, ``im_mu_max`` and
    ``re_mu_min`` only feed the time-dependent smoothness factor and default
    to the spectral data when omitted.
    """

    v_max: float
    A0_norm: float
    t: float
    epsilon: float
    B: float = 0.0
    B_L1: float = 0.0
    mu_R_max: float = 0.0
    anticomm_norm: float = 0.0
    frobenius_norm: float | None = None
    im_mu_max: float = 0.0
    re_mu_min: float | None = None

    def validate(self) -> None:
        if self.epsilon <= 0:
            raise InvalidRegimeInputs("epsilon must be positive")
        for name in ("v_max", "A0_norm", "t", "B", "B_L1", "anticomm_norm"):
            if getattr(self, name) < 0:
                raise InvalidRegimeInputs(f"{name} must be non-negative")


@dataclass(frozen=True)
class PenaltySpec:
    lam: float
    regime: Regime
    inputs: PenaltyInputs


def _requirement_numerator(regime: Regime, p: PenaltyInputs) -> float:
    """The regime's requirement written as lambda >= numerator / epsilon,
    equivalently the guaranteed squared constraint error numerator / lambda."""
    v, A, t = p.v_max, p.A0_norm, p.t
    if regime is Regime.STABLE_HOMOGENEOUS:
        return 2.0 * v**2 * A
    if regime is Regime.STABLE_INHOMOGENEOUS:
        return 2.0 * A * (v**2 + 2.0 * v * t * p.B + t**2 * p.B**2)
    if regime is Regime.NON_STABLE:
        if not (0.0 < p.mu_R_max < math.inf):
            raise InvalidRegimeInputs("non-stable regime needs 0 < mu_R_max < inf")
        return v**2 * A * (1.0 + math.exp(2.0 * p.mu_R_max * t))
    if regime is Regime.TIME_DEPENDENT:
        return t * v**2 * p.anticomm_norm
    if regime is Regime.TIME_DEPENDENT_INHOMOGENEOUS:
        return (t**2 / 2.0) * (v**2 + 2.0 * v * p.B_L1 + p.B_L1**2) * p.anticomm_norm
    raise InvalidRegimeInputs(f"unknown regime {regime!r}")


def lambda_for(regime: Regime, inputs: PenaltyInputs) -> PenaltySpec:
    """Smallest penalty strength guaranteeing squared constraint error
    <= epsilon under the regime's assumptions."""
    regime = Regime(regime)
    inputs.validate()
    lam = _requirement_numerator(regime, inputs) / inputs.epsilon
    return PenaltySpec(lam=lam, regime=regime, inputs=inputs)


def bound_given_lambda(regime: Regime, inputs: PenaltyInputs, lam: float) -> float:
    """Squared constraint error guaranteed at a given penalty strength
    (the requirement formula solved for epsilon)."""
    if lam <= 0:
        raise InvalidRegimeInputs("lambda must be positive")
    return _requirement_numerator(Regime(regime), inputs) / lam


def smoothness_factors(regime: Regime, inputs: PenaltyInputs,
                       omega_max: float = 0.0) -> tuple[float, float]:
    """Interaction-frame smoothness factors (dynamics, forcing).

    Constant generators give v_max^2 ||A|| / eps; time-dependent ones pick up
    the Frobenius norm times the horizon term plus the oscillation-to-decay
    ratio.  The forcing factor multiplies the bracket (1 + B/v_max)^2 and, for
    time-dependent forcing, adds the largest represented frequency.
    """
    regime = Regime(regime)
    inputs.validate()
    v, A, t, eps = inputs.v_max, inputs.A0_norm, inputs.t, inputs.epsilon
    time_dependent = regime in (Regime.TIME_DEPENDENT, Regime.TIME_DEPENDENT_INHOMOGENEOUS)

    if time_dependent:
        frob = inputs.frobenius_norm if inputs.frobenius_norm is not None else A
        ratio = 0.0
        if inputs.im_mu_max != 0.0:
            if not inputs.re_mu_min:
                raise DivisionByZero("oscillation ratio needs a non-zero re_mu_min")
            ratio = abs(inputs.im_mu_max) / abs(inputs.re_mu_min)
        lambda_i = frob * (t * v**2 / eps + ratio)
    else:
        lambda_i = v**2 * A / eps

    if inputs.B == 0.0:
        xi_i = lambda_i
    else:
        if v == 0.0:
            raise DivisionByZero("forcing factor undefined for v_max = 0 with B > 0")
        xi_i = (v**2 * A / eps) * (1.0 + 2.0 * inputs.B / v + (inputs.B / v) ** 2)
    if omega_max:
        xi_i += omega_max
    return lambda_i, xi_i
