"""Numerical verification of the generalized linear-response formula for
non-Hermitian, time-dependent, inhomogeneous dynamics.

The primary entry point is the strong-perturbation orientation: unperturbed
generator -i P (a projector phase rotation), perturbation the system matrix,
strength the inverse penalty.  A general dense-propagator path is provided
for small problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import projectors
from .errors import NonFinite, QuadratureUnderResolved
from .operators import Forcing, Generator, assemble_dense
from .projectors import Projector

__all__ = ["KuboSetup", "ResponseParts", "exact_delta", "kubo_first_order",
           "order_study", "StudyRow", "write_study_csv"]

_GENERAL_DENSE_GUARD = 64
_MIN_NODES = 64
_SAMPLES_PER_PERIOD = 20


@dataclass(frozen=True, eq=False)
class KuboSetup:
    """Perturbed dynamics v' = (H + zeta V) v + b with observable P.

    ``h_projector`` selects the strong-perturbation orientation H = -i P_c;
    otherwise ``H`` is a general (time-independent) generator handled with
    dense propagators.  ``oscillation_rate`` is the fastest phase rate of the
    unperturbed evolution, used to size the quadrature grid.
    """

    V: Generator
    zeta: float
    observable: Projector | np.ndarray
    v0: np.ndarray
    t: float
    h_projector: Projector | None = None
    H: Generator | None = None
    forcing: Forcing | None = None
    nodes: int | None = None
    oscillation_rate: float = 1.0

    def __post_init__(self):
        if (self.h_projector is None) == (self.H is None):
            raise ValueError("provide exactly one of h_projector or H")
        if self.H is not None and self.H.dim > _GENERAL_DENSE_GUARD:
            raise ValueError(f"general-H path limited to dim <= {_GENERAL_DENSE_GUARD}")

    @property
    def dim(self) -> int:
        return len(self.v0)

    def strength_ratio(self) -> float:
        """zeta ||V|| relative to the unperturbed scale (documentation only)."""
        return self.zeta * self.V.norm_bound / max(1.0, self.oscillation_rate)


def _observable_apply(P, v):
    if isinstance(P, Projector):
        return projectors.apply(P, v)
    return np.asarray(P) @ v


def _required_nodes(setup: KuboSetup) -> int:
    return max(_MIN_NODES,
               math.ceil(_SAMPLES_PER_PERIOD * setup.oscillation_rate * setup.t / (2 * math.pi)))


def _h_dense(setup: KuboSetup) -> np.ndarray:
    if setup.h_projector is not None:
        return -1j * projectors.dense(setup.h_projector)
    return assemble_dense(setup.H)


def _expectation(P, v) -> complex:
    return complex(np.vdot(v, _observable_apply(P, v)) / np.vdot(v, v))


def _solve_constant(A: np.ndarray, v0: np.ndarray, b: np.ndarray | None, t: float) -> np.ndarray:
    """Exact solution of v' = A v + b for constant A, b via an augmented
    exponential; machine-precision reference."""
    n = len(v0)
    if b is None or not np.any(b):
        return scipy.linalg.expm(A * t) @ v0
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = A
    aug[:n, n] = b
    state = np.concatenate([v0, [1.0]])
    return (scipy.linalg.expm(aug * t) @ state)[:n]


def exact_delta(setup: KuboSetup) -> complex:
    """<P(t)> - <P>_0 by solving the perturbed and unperturbed dynamics,
    each normalized by its own solution norm."""
    H = _h_dense(setup)
    V = assemble_dense(setup.V)
    b = setup.forcing.eval(0.0) if setup.forcing is not None else None
    if setup.forcing is not None and setup.forcing.B > 0:
        ts = np.linspace(0.0, setup.t, 5)
        if any(np.linalg.norm(setup.forcing.eval(s) - b) > 0 for s in ts):
            raise ValueError("exact_delta supports constant forcing only")
    v_pert = _solve_constant(H + setup.zeta * V, np.asarray(setup.v0, dtype=complex), b, setup.t)
    v_unpert = _solve_constant(H, np.asarray(setup.v0, dtype=complex), b, setup.t)
    if not (np.all(np.isfinite(v_pert)) and np.all(np.isfinite(v_unpert))):
        raise NonFinite("dense reference solve produced non-finite values")
    return _expectation(setup.observable, v_pert) - _expectation(setup.observable, v_unpert)


@dataclass(frozen=True)
class ResponseParts:
    """First-order prediction in both bracket conventions, plus the
    cumulative-perturbation form recorded for transparency.

    ``anticommutator`` propagates the single perturbation insertion with the
    unperturbed evolution and subtracts the normalization drift; it is the
    value verified to leave an O(zeta^2) remainder.  ``commutator`` replaces
    the modified anticommutator X Y + Y^dagger X by X Y - Y^dagger X on the
    same structure.  ``cumulative`` integrates the accumulated perturbation
    against the two-time density without the propagator insertion (the
    bound-oriented rearrangement used by the penalty lemmas).
    """

    anticommutator: complex
    commutator: complex
    cumulative: complex


def _unperturbed_grid(setup: KuboSetup, ts: np.ndarray) -> np.ndarray:
    """Unperturbed solutions W(s) = T_s(v0 delta + b) on the grid."""
    v0 = np.asarray(setup.v0, dtype=complex)
    n = len(ts)
    if setup.h_projector is not None:
        P = setup.h_projector
        rotated = np.empty((n, len(v0)), dtype=complex)
        if setup.forcing is not None and setup.forcing.B > 0:
            integrand = np.array(
                [projectors.exp_apply(P, 1j * s, setup.forcing.eval(s)) for s in ts]
            )
            cum = np.zeros_like(integrand)
            for i in range(1, n):
                cum[i] = cum[i - 1] + 0.5 * (ts[i] - ts[i - 1]) * (integrand[i] + integrand[i - 1])
        else:
            cum = np.zeros((n, len(v0)), dtype=complex)
        for i, s in enumerate(ts):
            rotated[i] = projectors.exp_apply(P, -1j * s, v0 + cum[i])
        return rotated
    H = assemble_dense(setup.H)
    step = scipy.linalg.expm(H * (ts[1] - ts[0]))
    out = np.empty((n, len(v0)), dtype=complex)
    if setup.forcing is not None and setup.forcing.B > 0:
        out[0] = v0
        for i in range(1, n):
            dt = ts[i] - ts[i - 1]
            # trapezoid on the Duhamel integral, propagator-exact otherwise
            out[i] = step @ out[i - 1] + 0.5 * dt * (
                setup.forcing.eval(ts[i]) + step @ setup.forcing.eval(ts[i - 1])
            )
    else:
        out[0] = v0
        for i in range(1, n):
            out[i] = step @ out[i - 1]
    return out


def _propagated_insertion(setup: KuboSetup, ts: np.ndarray, W: np.ndarray) -> np.ndarray:
    """integral of T_{t-s} V(s) W(s) ds: the perturbation inserted once and
    carried to the final time by the unperturbed evolution."""
    n = len(ts)
    if setup.h_projector is not None:
        P = setup.h_projector
        integrand = np.array(
            [projectors.exp_apply(P, 1j * s, setup.V.apply(s, W[i])) for i, s in enumerate(ts)]
        )
        cum = np.zeros(W.shape[1], dtype=complex)
        for i in range(1, n):
            cum += 0.5 * (ts[i] - ts[i - 1]) * (integrand[i] + integrand[i - 1])
        return projectors.exp_apply(P, -1j * setup.t, cum)
    H = assemble_dense(setup.H)
    inv_step = scipy.linalg.expm(-H * (ts[1] - ts[0]))
    inv = np.eye(W.shape[1], dtype=complex)
    integrand = np.empty_like(W)
    for i, s in enumerate(ts):
        integrand[i] = inv @ setup.V.apply(s, W[i])
        inv = inv_step @ inv
    cum = np.zeros(W.shape[1], dtype=complex)
    for i in range(1, n):
        cum += 0.5 * (ts[i] - ts[i - 1]) * (integrand[i] + integrand[i - 1])
    return scipy.linalg.expm(H * setup.t) @ cum


def evaluate_response(setup: KuboSetup) -> ResponseParts:
    """First-order response by quadrature on the unperturbed-evolution grid."""
    needed = _required_nodes(setup)
    nodes = setup.nodes if setup.nodes is not None else needed
    if nodes < needed:
        raise QuadratureUnderResolved(f"need at least {needed} nodes, got {nodes}")
    ts = np.linspace(0.0, setup.t, nodes + 1)
    W = _unperturbed_grid(setup, ts)
    W_t = W[-1]
    denom = float(np.vdot(W_t, W_t).real)
    P = setup.observable
    PW_t = _observable_apply(P, W_t)
    p0 = complex(np.vdot(W_t, PW_t) / np.vdot(W_t, W_t))

    v1 = _propagated_insertion(setup, ts, W)
    left = np.vdot(W_t, _observable_apply(P, v1))
    right = np.vdot(v1, PW_t)
    drift = np.vdot(W_t, v1) + np.vdot(v1, W_t)
    scale = setup.zeta / denom
    anti = scale * (left + right - p0 * drift)
    comm = scale * (left - right - p0 * (np.vdot(W_t, v1) - np.vdot(v1, W_t)))

    # cumulative-perturbation form, as stated alongside the penalty lemmas
    cum_vals = np.empty(len(ts), dtype=complex)
    for i, s in enumerate(ts):
        vbar_w = (setup.t - s) * setup.V.apply(s, W[i])
        cum_vals[i] = np.vdot(W_t, _observable_apply(P, vbar_w)) + np.vdot(vbar_w, PW_t)
    cumulative = scale * np.trapezoid(cum_vals, ts)
    return ResponseParts(
        anticommutator=complex(anti),
        commutator=complex(comm),
        cumulative=complex(cumulative),
    )


def kubo_first_order(setup: KuboSetup) -> complex:
    """First-order prediction of <P(t)> - <P>_0 (modified anticommutator)."""
    return evaluate_response(setup).anticommutator


@dataclass(frozen=True)
class StudyRow:
    zeta: float
    exact: complex
    predicted: complex
    predicted_commutator: complex
    predicted_cumulative: complex
    residual: float
    ratio: float | None


def order_study(setup: KuboSetup, zetas) -> list[StudyRow]:
    """Residuals of the first-order prediction over a strength list; the
    ratio column holds residual(previous) / residual(current)."""
    rows: list[StudyRow] = []
    prev = None
    for z in zetas:
        s = KuboSetup(
            V=setup.V, zeta=float(z), observable=setup.observable, v0=setup.v0,
            t=setup.t, h_projector=setup.h_projector, H=setup.H,
            forcing=setup.forcing, nodes=setup.nodes,
            oscillation_rate=setup.oscillation_rate,
        )
        exact = exact_delta(s)
        parts = evaluate_response(s)
        residual = abs(exact - parts.anticommutator)
        ratio = None if prev is None else (prev / residual if residual > 0 else math.inf)
        rows.append(StudyRow(zeta=float(z), exact=exact, predicted=parts.anticommutator,
                             predicted_commutator=parts.commutator,
                             predicted_cumulative=parts.cumulative,
                             residual=residual, ratio=ratio))
        prev = residual
    return rows


def write_study_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("zeta,exact,predicted,predicted_commutator,predicted_cumulative,residual,ratio\n")
        for r in rows:
            ratio = "" if r.ratio is None else f"{r.ratio:.17g}"
            fh.write(
                f"{r.zeta:.17g},{r.exact.real:.17g},{r.predicted.real:.17g},"
                f"{r.predicted_commutator.real:.17g},{r.predicted_cumulative.real:.17g},"
                f"{r.residual:.17g},{ratio}\n"
            )
