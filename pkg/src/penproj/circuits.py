"""Desk-scale statevector emulation of the fast-forwarded projector circuits.

Register order (most to least significant): state, boundary flag (2 qubits),
per-axis offset register (2 bits per axis, two's complement), one ancilla.
All constructions are verified against the exact projector exponential.

The derivative-constraint evolution uses a symmetric ancilla sandwich
(Hadamard, controlled swap network, Hadamard, controlled phase, Hadamard,
controlled swap network, Hadamard): the closing half uncomputes the ancilla,
so the measure-and-discard step sees outcome 0 deterministically and the
induced map on the state register is exactly the projector exponential.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import projectors
from .errors import NonCommutingRobin, TooManyQubits, ZeroOverlap
from .grid import Domain, Region, unflatten_index
from .projectors import Projector

__all__ = [
    "RegisterLayout",
    "layout_for",
    "EmulatedOp",
    "boundary_oracle",
    "swap_unitary",
    "hamsim_dirichlet",
    "hamsim_neumann",
    "hamsim_robin",
    "hamsim_combined",
    "enforce_input",
    "EnforceResult",
    "gates_to_json",
]

QUBIT_GUARD = 22
_SQRT_HALF = 1.0 / math.sqrt(2.0)
_BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class RegisterLayout:
    d: int
    n: int
    bits_per_axis: int
    offset_bits_per_axis: int
    state_qubits: int
    bdry_qubits: int
    zeta_qubits: int
    ancilla_qubits: int

    @property
    def total(self) -> int:
        return self.state_qubits + self.bdry_qubits + self.zeta_qubits + self.ancilla_qubits


def _max_pair_span(domain: Domain) -> int:
    span = 0
    for j, nbrs in domain.neighbors.items():
        members = (j, *nbrs) if len(nbrs) == 1 else nbrs
        ca = unflatten_index(members[0], domain.n, domain.d)
        cb = unflatten_index(members[-1], domain.n, domain.d)
        span = max(span, max(abs(a - b) for a, b in zip(ca, cb)))
    return span


def layout_for(domain: Domain, guard: int = QUBIT_GUARD) -> RegisterLayout:
    bits = max(1, math.ceil(math.log2(domain.n)))
    span = _max_pair_span(domain)
    # two's complement wide enough for the largest signed pair offset;
    # two bits per axis for plain two-point stencils
    offset_bits = max(2, math.ceil(math.log2(2 * span + 1))) if span else 0
    layout = RegisterLayout(
        d=domain.d,
        n=domain.n,
        bits_per_axis=bits,
        offset_bits_per_axis=offset_bits,
        state_qubits=domain.d * bits,
        bdry_qubits=2,
        zeta_qubits=offset_bits * domain.d,
        ancilla_qubits=1,
    )
    if layout.total > guard:
        raise TooManyQubits(f"{layout.total} qubits exceed the guard of {guard}")
    return layout


class _Machine:
    """Index bookkeeping for the full register and the primitive gates."""

    def __init__(self, domain: Domain, layout: RegisterLayout):
        self.domain = domain
        self.layout = layout
        D = 1 << layout.total
        idx = np.arange(D, dtype=np.intp)
        self.anc = idx & 1
        rest = idx >> 1
        zmask = (1 << layout.zeta_qubits) - 1
        self.zeta = rest & zmask
        rest >>= layout.zeta_qubits
        self.bdry = rest & 3
        self.state = rest >> 2
        self.D = D

        S = 1 << layout.state_qubits
        self.S = S
        self.reg_of_grid = np.empty(domain.size, dtype=np.intp)
        self.grid_of_reg = np.full(S, -1, dtype=np.intp)
        flag = np.zeros(S, dtype=np.int64)
        bits = layout.bits_per_axis
        for g in range(domain.size):
            coords = unflatten_index(g, domain.n, domain.d)
            s = 0
            for c in coords:
                s = (s << bits) | c
            self.reg_of_grid[g] = s
            self.grid_of_reg[s] = g
            flag[s] = int(domain.flags[g])
        self.flag = flag

    def pack(self, state, bdry, zeta, anc):
        lay = self.layout
        return (((state << 2 | bdry) << lay.zeta_qubits | zeta) << 1) | anc

    # --- primitive actions -------------------------------------------------

    def permute(self, psi, new_idx, mask=None):
        out = psi.copy() if mask is not None else np.empty_like(psi)
        if mask is None:
            out[new_idx] = psi
        else:
            out[new_idx[mask]] = psi[mask]
        return out

    def obdry(self, psi, sign, mask=None):
        new_bdry = (self.bdry + sign * self.flag[self.state]) & 3
        return self.permute(psi, self.pack(self.state, new_bdry, self.zeta, self.anc), mask)

    def obdry_after_swap(self, psi, partner, mask=None):
        # uncompute the flag of the pre-swap index, i.e. of the swap partner
        new_bdry = (self.bdry - self.flag[partner[self.state]]) & 3
        return self.permute(psi, self.pack(self.state, new_bdry, self.zeta, self.anc), mask)

    def zeta_xor(self, psi, code_table, mask=None):
        new_zeta = self.zeta ^ code_table[self.state]
        return self.permute(psi, self.pack(self.state, self.bdry, new_zeta, self.anc), mask)

    def cadd(self, psi, mask=None):
        lay = self.layout
        bits = lay.bits_per_axis
        obits = lay.offset_bits_per_axis
        coord_mask = (1 << bits) - 1
        omask = (1 << obits) - 1
        half = 1 << (obits - 1)
        new_state = np.zeros_like(self.state)
        for axis in range(lay.d):
            shift = bits * (lay.d - 1 - axis)
            coord = (self.state >> shift) & coord_mask
            zshift = obits * (lay.d - 1 - axis)
            code = (self.zeta >> zshift) & omask
            signed = np.where(code < half, code, code - (1 << obits))
            coord = (coord + signed) & coord_mask
            new_state |= coord << shift
        return self.permute(psi, self.pack(new_state, self.bdry, self.zeta, self.anc), mask)

    def phase_where(self, psi, cond, phase):
        out = psi.copy()
        out[cond] = out[cond] * phase
        return out

    def had_anc(self, psi):
        view = psi.reshape(-1, 2)
        out = np.empty_like(view)
        out[:, 0] = (view[:, 0] + view[:, 1]) * _SQRT_HALF
        out[:, 1] = (view[:, 0] - view[:, 1]) * _SQRT_HALF
        return out.reshape(-1)

    def swap_tables(self, pairs_grid):
        """Partner permutation and offset-code tables for a disjoint pair set
        given in flat grid indices."""
        lay = self.layout
        partner = np.arange(self.S, dtype=np.intp)
        code_out = np.zeros(self.S, dtype=np.intp)
        obits = lay.offset_bits_per_axis
        omask = (1 << obits) - 1
        for a_g, b_g in pairs_grid:
            a, b = self.reg_of_grid[a_g], self.reg_of_grid[b_g]
            partner[a], partner[b] = b, a
            ca = unflatten_index(int(a_g), self.domain.n, self.domain.d)
            cb = unflatten_index(int(b_g), self.domain.n, self.domain.d)
            code_a = code_b = 0
            for axis in range(lay.d):
                off = cb[axis] - ca[axis]
                zshift = obits * (lay.d - 1 - axis)
                code_a |= (off & omask) << zshift
                code_b |= (-off & omask) << zshift
            code_out[a], code_out[b] = code_a, code_b
        code_neg_out = code_out[partner]
        return partner, code_out, code_neg_out


class EmulatedOp:
    """A gate sequence on the full register with a per-gate log.

    ``apply_state`` embeds a state-register vector with all ancillary
    registers at zero, runs the sequence, emulates any measure-and-discard
    by checking that the measurement branches agree, and returns the state
    register content.
    """

    def __init__(self, name, machine, steps, gates, measured=False):
        self.name = name
        self.machine = machine
        self.steps = steps
        self.gates = gates
        self.measured = measured
        self.last_outcome_probs = None

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def apply_full(self, psi: np.ndarray) -> np.ndarray:
        for step in self.steps:
            psi = step(psi)
        return psi

    def _embed(self, v_state: np.ndarray) -> np.ndarray:
        m = self.machine
        psi = np.zeros(m.D, dtype=complex)
        base = m.pack(np.arange(m.S, dtype=np.intp), 0, 0, 0)
        psi[base] = np.asarray(v_state, dtype=complex)
        return psi

    def _extract(self, psi: np.ndarray, anc_value: int | None = None) -> np.ndarray:
        m = self.machine
        sel = (m.bdry == 0) & (m.zeta == 0)
        sel &= m.anc == (0 if anc_value is None else anc_value)
        out = np.zeros(m.S, dtype=complex)
        out[m.state[sel]] = psi[sel]
        if anc_value is None:
            leak = float(np.linalg.norm(psi[~sel]) ** 2)
            if leak > 1e-24:
                raise ValueError(
                    f"{self.name}: ancillary registers not restored (leak {leak:.3e})"
                )
        return out

    def apply_state(self, v_state: np.ndarray) -> np.ndarray:
        m = self.machine
        psi = self.apply_full(self._embed(v_state))
        if not self.measured:
            return self._extract(psi)
        # measure-and-discard on the ancilla: both branch projections must
        # carry the same pure state
        branches, probs = [], []
        for outcome in (0, 1):
            b = self._extract(psi, anc_value=outcome)
            p = float(np.vdot(b, b).real)
            branches.append(b)
            probs.append(p)
        self.last_outcome_probs = tuple(probs)
        total = math.sqrt(sum(probs))
        live = [b / math.sqrt(p) for b, p in zip(branches, probs) if p > 1e-20]
        if len(live) == 2 and np.linalg.norm(live[0] - live[1]) > _BRANCH_TOL:
            raise ValueError(f"{self.name}: measurement branches disagree")
        return live[0] * total


def _log(gates, gate, targets, controls=(), param=None):
    gates.append({"gate": gate, "targets": list(targets), "controls": list(controls),
                  "param": param})


def boundary_oracle(domain: Domain) -> EmulatedOp:
    """Permutation writing the region flag of the state index into the
    boundary register (addition mod 4, so the adjoint subtracts)."""
    m = _Machine(domain, layout_for(domain))
    gates = []
    _log(gates, "O_bdry", ["bdry"], ["state"])
    return EmulatedOp("boundary_oracle", m, [lambda psi: m.obdry(psi, +1)], gates)


def boundary_oracle_adjoint(domain: Domain) -> EmulatedOp:
    m = _Machine(domain, layout_for(domain))
    gates = []
    _log(gates, "O_bdry_dag", ["bdry"], ["state"])
    return EmulatedOp("boundary_oracle_dag", m, [lambda psi: m.obdry(psi, -1)], gates)


def _swap_sequence(m: _Machine, pairs_grid, gates, control=()):
    """The oracle / offset-load / controlled-add / uncompute realization of
    the swap network, optionally controlled on the ancilla."""
    partner, code_out, code_neg_out = m.swap_tables(pairs_grid)
    mask = (m.anc == 1) if control else None
    steps = [
        lambda psi: m.obdry(psi, +1, mask),
        lambda psi: m.zeta_xor(psi, code_out, mask),
        lambda psi: m.cadd(psi, mask),
        lambda psi: m.zeta_xor(psi, code_neg_out, mask),
        lambda psi: m.obdry_after_swap(psi, partner, mask),
    ]
    _log(gates, "O_bdry", ["bdry"], ["state", *control])
    _log(gates, "O_zeta", ["zeta"], ["state", "bdry", *control])
    _log(gates, "CADD", ["state"], ["zeta", *control])
    _log(gates, "O_zeta_dag", ["zeta"], ["state", "bdry", *control])
    _log(gates, "O_bdry_dag", ["bdry"], ["state", *control])
    return steps


def swap_unitary(domain: Domain) -> EmulatedOp:
    """The swap network S as a permutation, built through the offset-register
    arithmetic path (not by transposing directly)."""
    proj = projectors.neumann_projector(domain)
    m = _Machine(domain, layout_for(domain))
    gates = []
    steps = _swap_sequence(m, proj.pairs, gates)
    return EmulatedOp("swap_unitary", m, steps, gates)


def _phase_flag_steps(m: _Machine, flag_value: int, theta: float, gates):
    phase = np.exp(-1j * theta)
    steps = [
        lambda psi: m.obdry(psi, +1),
        lambda psi: m.phase_where(psi, m.bdry == flag_value, phase),
        lambda psi: m.obdry(psi, -1),
    ]
    _log(gates, "O_bdry", ["bdry"], ["state"])
    _log(gates, "phase", ["state"], [f"bdry=={flag_value}"], param=theta)
    _log(gates, "O_bdry_dag", ["bdry"], ["state"])
    return steps


def hamsim_dirichlet(domain: Domain, theta: float) -> EmulatedOp:
    """Diagonal phase e^{-i theta} on the value-constrained basis states."""
    projectors.dirichlet_projector(domain)  # validates the region is non-empty
    m = _Machine(domain, layout_for(domain))
    gates = []
    steps = _phase_flag_steps(m, int(Region.DIRICHLET), theta, gates)
    return EmulatedOp("hamsim_dirichlet", m, steps, gates)


def _sandwich_steps(m: _Machine, pairs_grid, theta: float, gates):
    """Ancilla sandwich realizing exp(-i theta (I - S)/2) on the pair set."""
    phase = np.exp(-1j * theta)
    steps = []
    _log(gates, "H", ["anc"])
    steps.append(m.had_anc)
    steps += _swap_sequence(m, pairs_grid, gates, control=("anc",))
    _log(gates, "H", ["anc"])
    steps.append(m.had_anc)
    _log(gates, "phase", ["state"], ["anc"], param=theta)
    steps.append(lambda psi: m.phase_where(psi, m.anc == 1, phase))
    _log(gates, "H", ["anc"])
    steps.append(m.had_anc)
    steps += _swap_sequence(m, pairs_grid, gates, control=("anc",))
    _log(gates, "H", ["anc"])
    steps.append(m.had_anc)
    _log(gates, "measure_discard", ["anc"])
    return steps


def hamsim_neumann(domain: Domain, theta: float) -> EmulatedOp:
    """Measure-and-discard channel equal to the derivative-constraint
    projector exponential."""
    proj = projectors.neumann_projector(domain)
    m = _Machine(domain, layout_for(domain))
    gates = []
    steps = _sandwich_steps(m, proj.pairs, theta, gates)
    return EmulatedOp("hamsim_neumann", m, steps, gates, measured=True)


def hamsim_robin(domain: Domain, theta: float, alpha: float, beta: float) -> EmulatedOp:
    """Product of the value phase (angle alpha theta) and the derivative
    sandwich (angle beta theta) on the combined-constraint region."""
    proj = projectors.robin_projector(domain, alpha, beta)
    if set(proj.point_indices.tolist()) & set(proj.pairs.ravel().tolist()):
        raise NonCommutingRobin(
            "value points overlap the swapped indices; use outside ghost points"
        )
    m = _Machine(domain, layout_for(domain))
    gates = []
    steps = _phase_flag_steps(m, int(Region.ROBIN), alpha * theta, gates)
    steps += _sandwich_steps(m, proj.pairs, beta * theta, gates)
    return EmulatedOp("hamsim_robin", m, steps, gates, measured=True)


def hamsim_combined(domain: Domain, theta: float,
                    alpha: float | None = None, beta: float | None = None) -> EmulatedOp:
    """Dispatch per region flag: value phase, derivative sandwich, and the
    combined-constraint product where present."""
    m = _Machine(domain, layout_for(domain))
    gates = []
    steps = []
    if domain.dirichlet_indices.size:
        steps += _phase_flag_steps(m, int(Region.DIRICHLET), theta, gates)
    measured = False
    if domain.neumann_indices.size:
        proj = projectors.neumann_projector(domain)
        steps += _sandwich_steps(m, proj.pairs, theta, gates)
        measured = True
    if domain.robin_indices.size:
        if alpha is None or beta is None:
            alpha, beta = domain.robin_coeffs
        proj = projectors.robin_projector(domain, alpha, beta)
        if set(proj.point_indices.tolist()) & set(proj.pairs.ravel().tolist()):
            raise NonCommutingRobin(
                "value points overlap the swapped indices; use outside ghost points"
            )
        steps += _phase_flag_steps(m, int(Region.ROBIN), alpha * theta, gates)
        if beta != 0.0:
            steps += _sandwich_steps(m, proj.pairs, beta * theta, gates)
            measured = True
    if not steps:
        raise ValueError("domain has no constrained region")
    return EmulatedOp("hamsim_combined", m, steps, gates, measured=measured)


@dataclass(frozen=True)
class EnforceResult:
    state: np.ndarray
    success_prob: float
    repetitions: int


def _reflection_apply(P: Projector, v: np.ndarray) -> np.ndarray:
    # I - 2P, unitary for idempotent Hermitian P
    return v - 2.0 * projectors.apply(P, v)


def enforce_input(state: np.ndarray, P: Projector, target: str) -> EnforceResult:
    """Hadamard / controlled-reflection / Hadamard gadget with post-selection.

    ``target`` picks the ancilla outcome: "constrained_subspace" keeps the
    projected component, "feasible_subspace" its complement.  Amplitude
    amplification is emulated by reporting the repetition count, not by
    iterating.
    """
    if target not in ("constrained_subspace", "feasible_subspace"):
        raise ValueError(f"unknown target {target!r}")
    v = np.asarray(state, dtype=complex)
    # branch amplitudes of the gadget: outcome 1 carries P v, outcome 0 (I-P) v
    reflected = _reflection_apply(P, v)
    branch1 = 0.5 * (v - reflected)
    branch0 = 0.5 * (v + reflected)
    chosen = branch1 if target == "constrained_subspace" else branch0
    prob = float(np.vdot(chosen, chosen).real)
    if math.sqrt(prob) < 1e-14:
        raise ZeroOverlap(f"target component norm {math.sqrt(prob):.3e} below 1e-14")
    return EnforceResult(
        state=chosen / math.sqrt(prob),
        success_prob=prob,
        repetitions=math.ceil(1.0 / math.sqrt(prob)),
    )


def gates_to_json(op: EmulatedOp) -> str:
    return json.dumps(op.gates)
