"""Constraint projectors: fast application and exact exponential action.

Value constraints are diagonal point-set projectors.  Derivative constraints
are swap-network projectors (I - S)/2 built from disjoint transpositions.
Robin terms combine a scaled point part with a scaled swap part; they are
Hermitian but generally not idempotent, so their exponential is only taken
through the commuting product form, which requires the value points and the
swapped indices to be disjoint.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ComplexCoefficients,
    DimMismatch,
    EmptyRegion,
    InvalidNeighborSets,
    InvalidPairs,
    NonIdempotent,
)
from .grid import Domain, Region, validate_neighbor_sets

__all__ = [
    "Projector",
    "dirichlet_projector",
    "neumann_projector",
    "robin_projector",
    "interface_projector",
    "point_set_projector",
    "swap_network_projector",
    "sum_projector",
    "apply",
    "complement_apply",
    "exp_apply",
    "constraint_norm",
    "dense",
    "export_dense_text",
]

_DENSE_GUARD = 4096


@dataclass(frozen=True, eq=False)
class Projector:
    """Penalty projector in one of four shapes.

    kind "point_set": P v = v on ``point_indices``, zero elsewhere.
    kind "swap_network": P = (I - S)/2 with S the product of the disjoint
    transpositions in ``pairs``.
    kind "robin": alpha * point part + (beta/2)(I - S); not idempotent in
    general and exempted from the idempotence invariant.
    kind "sum": sum of orthogonal-image idempotent terms.
    """

    kind: str
    dim: int
    point_indices: np.ndarray | None = None
    pairs: np.ndarray | None = None
    alpha: float = 0.0
    beta: float = 0.0
    terms: tuple = field(default_factory=tuple)


def _as_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    flat = arr.ravel()
    if len(np.unique(flat)) != flat.size:
        raise InvalidPairs("swap pairs must be disjoint transpositions")
    if (arr[:, 0] == arr[:, 1]).any():
        raise InvalidPairs("a pair cannot swap an index with itself")
    return arr


def point_set_projector(indices, dim: int) -> Projector:
    idx = np.unique(np.asarray(indices, dtype=np.intp))
    if idx.size == 0:
        raise EmptyRegion("point-set projector over an empty index set")
    if idx.min() < 0 or idx.max() >= dim:
        raise DimMismatch("point indices outside [0, dim)")
    return Projector(kind="point_set", dim=dim, point_indices=idx)


def swap_network_projector(pairs, dim: int) -> Projector:
    arr = _as_pairs(pairs)
    if arr.size and (arr.min() < 0 or arr.max() >= dim):
        raise DimMismatch("pair indices outside [0, dim)")
    return Projector(kind="swap_network", dim=dim, pairs=arr)


def sum_projector(terms) -> Projector:
    terms = tuple(terms)
    if not terms:
        raise EmptyRegion("sum projector needs at least one term")
    dim = terms[0].dim
    if any(t.dim != dim for t in terms):
        raise DimMismatch("sum terms act on different dimensions")
    return Projector(kind="sum", dim=dim, terms=terms)


def dirichlet_projector(domain: Domain) -> Projector:
    idx = domain.dirichlet_indices
    if idx.size == 0:
        raise EmptyRegion("domain has no value-constrained points")
    return point_set_projector(idx, domain.size)


def neumann_projector(domain: Domain) -> Projector:
    """Swap-network projector for the two-point derivative constraints."""
    report = validate_neighbor_sets(domain)
    if not report.ok:
        raise InvalidNeighborSets(
            f"{len(report.violations)} neighbor-set violations; {report.suggestion}"
        )
    idx = domain.neumann_indices
    if idx.size == 0:
        raise EmptyRegion("domain has no derivative-constrained points")
    pairs = []
    for j in idx:
        nbrs = domain.neighbors[int(j)]
        if len(nbrs) != 1:
            raise InvalidNeighborSets(
                f"point {int(j)} has {len(nbrs)} neighbors; only two-point stencils are supported"
            )
        pairs.append((int(j), nbrs[0]))
    return swap_network_projector(pairs, domain.size)


def robin_projector(domain: Domain, alpha, beta) -> Projector:
    """alpha * value part + beta * derivative part on the Robin region.

    A one-neighbor set swaps the constrained point with its neighbor; a
    two-neighbor set swaps the two neighbors (the outside-ghost form that
    keeps both parts commuting).
    """
    if isinstance(alpha, complex) or isinstance(beta, complex):
        raise ComplexCoefficients("Robin coefficients must be real")
    idx = domain.robin_indices
    if idx.size == 0:
        raise EmptyRegion("domain has no Robin points")
    pairs = []
    for j in idx:
        nbrs = domain.neighbors[int(j)]
        if len(nbrs) == 1:
            pairs.append((int(j), nbrs[0]))
        elif len(nbrs) == 2:
            pairs.append(tuple(nbrs))
        else:
            raise InvalidNeighborSets(f"Robin point {int(j)} needs one or two neighbors")
    return Projector(
        kind="robin",
        dim=domain.size,
        point_indices=np.asarray(idx, dtype=np.intp),
        pairs=_as_pairs(pairs),
        alpha=float(alpha),
        beta=float(beta),
    )


def interface_projector(pairs, dim: int, gamma: float = 1.0) -> Projector:
    """Swap-network projector enforcing equality across subdomain pairs.

    Only gamma = 1 keeps (I - gamma S)/2 an orthogonal projection, so other
    couplings are rejected.
    """
    if gamma != 1.0:
        raise InvalidPairs("only gamma = 1 interface coupling is supported")
    return swap_network_projector(pairs, dim)


def _swap(pairs: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = v.copy()
    out[pairs[:, 0]] = v[pairs[:, 1]]
    out[pairs[:, 1]] = v[pairs[:, 0]]
    return out


def _check_dim(p: Projector, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (p.dim,):
        raise DimMismatch(f"vector of shape {v.shape} against projector dim {p.dim}")
    return v


def apply(p: Projector, v: np.ndarray) -> np.ndarray:
    v = _check_dim(p, v)
    if p.kind == "point_set":
        out = np.zeros_like(v)
        out[p.point_indices] = v[p.point_indices]
        return out
    if p.kind == "swap_network":
        return (v - _swap(p.pairs, v)) / 2.0
    if p.kind == "robin":
        out = (p.beta / 2.0) * (v - _swap(p.pairs, v))
        out = out.astype(np.result_type(out, v))
        out[p.point_indices] += p.alpha * v[p.point_indices]
        return out
    return sum(apply(t, v) for t in p.terms)


def complement_apply(p: Projector, v: np.ndarray) -> np.ndarray:
    v = _check_dim(p, v)
    return v - apply(p, v)


def _robin_parts_disjoint(p: Projector) -> bool:
    return not (set(p.point_indices.tolist()) & set(p.pairs.ravel().tolist()))


def exp_apply(p: Projector, xi: complex, v: np.ndarray) -> np.ndarray:
    """Exact e^{xi P} v via the orthogonal-projection identity.

    For idempotent Hermitian kinds this is (I - P) v + e^xi P v.  Robin kinds
    use the commuting product of the value and derivative exponentials, which
    requires disjoint index sets.
    """
    v = _check_dim(p, v)
    if p.kind == "robin":
        if not _robin_parts_disjoint(p):
            raise NonIdempotent(
                "Robin value points overlap the swapped indices; the product "
                "exponential needs the outside-ghost-point construction"
            )
        out = v.astype(complex)
        if p.beta != 0.0:
            psw = (out - _swap(p.pairs, out)) / 2.0
            out = out + (cmath.exp(xi * p.beta) - 1.0) * psw
        if p.alpha != 0.0:
            out[p.point_indices] *= cmath.exp(xi * p.alpha)
        return out
    return v + (cmath.exp(xi) - 1.0) * apply(p, v)


def constraint_norm(p: Projector, v: np.ndarray) -> float:
    """l2 norm of v over the constrained subspace, sqrt(<v, P v>)."""
    v = _check_dim(p, v)
    val = np.vdot(v, apply(p, v)).real
    return float(np.sqrt(max(val, 0.0)))


def dense(p: Projector) -> np.ndarray:
    """Dense matrix of the projector, for oracle comparisons."""
    if p.dim > _DENSE_GUARD:
        raise DimMismatch(f"dense export guarded at dim <= {_DENSE_GUARD}")
    out = np.zeros((p.dim, p.dim), dtype=complex)
    basis = np.zeros(p.dim, dtype=complex)
    for i in range(p.dim):
        basis[:] = 0.0
        basis[i] = 1.0
        out[:, i] = apply(p, basis)
    return out


def export_dense_text(p: Projector, path) -> None:
    """Coordinate-format text dump of the dense projector for cross-checks."""
    mat = dense(p)
    rows, cols = np.nonzero(np.abs(mat) > 0)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate complex general\n")
        fh.write(f"{mat.shape[0]} {mat.shape[1]} {len(rows)}\n")
        for i, j in zip(rows, cols):
            z = mat[i, j]
            fh.write(f"{i + 1} {j + 1} {z.real:.17g} {z.imag:.17g}\n")
