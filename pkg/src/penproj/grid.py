"""Discrete computational domain: region classification and neighbor sets.

A domain is an ``n**d`` grid over the unit box whose indices are split into
an unconstrained interior, value-constrained points, derivative-constrained
points (each carrying a neighbor set used by the two-point difference), and
combined value/derivative points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import InvalidSpec, OutOfBounds

__all__ = [
    "Region",
    "Domain",
    "WallDirichlet",
    "WallNeumannInward",
    "CircleDirichlet",
    "CustomSpec",
    "build_grid",
    "classify",
    "validate_neighbor_sets",
    "ValidationReport",
    "flatten_index",
    "unflatten_index",
    "domain_to_json",
    "domain_from_json",
]


class Region(IntEnum):
    """Region flag, numbered exactly as the boundary oracle reports it."""

    INTERIOR = 0
    DIRICHLET = 1
    NEUMANN = 2
    ROBIN = 3


_REGION_NAMES = {
    Region.INTERIOR: "interior",
    Region.DIRICHLET: "dirichlet",
    Region.NEUMANN: "neumann",
    Region.ROBIN: "robin",
}
_REGION_FROM_NAME = {v: k for k, v in _REGION_NAMES.items()}


def flatten_index(j, n: int) -> int:
    """Row-major flat index (first coordinate slowest)."""
    idx = 0
    for c in j:
        idx = idx * n + int(c)
    return idx


def unflatten_index(idx: int, n: int, d: int) -> tuple:
    coords = []
    for _ in range(d):
        coords.append(idx % n)
        idx //= n
    return tuple(reversed(coords))


# Boundary specifications accepted by build_grid.


@dataclass(frozen=True)
class WallDirichlet:
    """Value constraints on every point touching the box walls."""


@dataclass(frozen=True)
class WallNeumannInward:
    """Two-point derivative constraints pairing wall points with their
    axis-inward neighbor; corners and one point next to each corner are
    skipped so neighbor sets stay disjoint."""


@dataclass(frozen=True)
class CircleDirichlet:
    """Value constraints outside a circle around the box center."""

    radius: float


@dataclass(frozen=True)
class CustomSpec:
    """Explicit (index, region, neighbors) entries; interior elsewhere."""

    entries: tuple
    robin_coeffs: tuple | None = None


@dataclass(frozen=True, eq=False)
class Domain:
    """Immutable grid with per-index region flags and neighbor sets.

    ``flags`` is a flat int8 array of length ``n**d`` holding Region codes;
    ``neighbors`` maps the flat index of each derivative-constrained point to
    a tuple of flat neighbor indices.
    """

    d: int
    n: int
    flags: np.ndarray
    neighbors: dict
    robin_coeffs: tuple | None = None

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def spacing(self) -> float:
        # unit box [0, 1]^d
        return 1.0 / (self.n - 1)

    def indices_of(self, region: Region) -> np.ndarray:
        return np.flatnonzero(self.flags == int(region))

    @property
    def interior_indices(self) -> np.ndarray:
        return self.indices_of(Region.INTERIOR)

    @property
    def dirichlet_indices(self) -> np.ndarray:
        return self.indices_of(Region.DIRICHLET)

    @property
    def neumann_indices(self) -> np.ndarray:
        return self.indices_of(Region.NEUMANN)

    @property
    def robin_indices(self) -> np.ndarray:
        return self.indices_of(Region.ROBIN)

    def coordinates(self) -> np.ndarray:
        """Grid point positions in the unit box, shape (n**d, d)."""
        axes = np.indices((self.n,) * self.d).reshape(self.d, -1).T
        return axes * self.spacing

    def unflatten(self, idx: int) -> tuple:
        return unflatten_index(idx, self.n, self.d)

    def flatten(self, j) -> int:
        return flatten_index(j, self.n)


def _check_entry(d: int, n: int, j, region: Region, neighbors) -> None:
    if len(j) != d or any(not (0 <= c < n) for c in j):
        raise InvalidSpec(f"index {j} outside [0, {n - 1}]^{d}")
    if region in (Region.NEUMANN, Region.ROBIN):
        if not neighbors:
            raise InvalidSpec(f"{_REGION_NAMES[region]} point {j} has an empty neighbor set")
        for k in neighbors:
            if len(k) != d or any(not (0 <= c < n) for c in k):
                raise InvalidSpec(f"neighbor {k} of {j} outside the grid")
            if any(abs(a - b) > 1 for a, b in zip(j, k)):
                raise InvalidSpec(f"neighbor {k} of {j} farther than one step per axis")
            if tuple(k) == tuple(j):
                raise InvalidSpec(f"point {j} cannot neighbor itself")
    elif neighbors:
        raise InvalidSpec(f"{_REGION_NAMES[region]} point {j} must not carry neighbors")


def build_grid(d: int, n: int, boundary_spec) -> Domain:
    """Build a domain for one of the boundary specifications.

    Built-in specs always produce admissible neighbor sets.  Custom specs are
    checked for structural validity (bounds, distance, duplicates); the two
    swap-exclusion rules are left to ``validate_neighbor_sets`` so that
    deliberately conflicting domains can be constructed and diagnosed.
    """
    if d < 1 or n < 2:
        raise InvalidSpec(f"need d >= 1 and n >= 2, got d={d}, n={n}")

    flags = np.zeros(n**d, dtype=np.int8)
    neighbors: dict[int, tuple] = {}
    robin_coeffs = None

    coords = np.indices((n,) * d).reshape(d, -1)
    extreme = (coords == 0) | (coords == n - 1)

    if isinstance(boundary_spec, WallDirichlet):
        flags[extreme.any(axis=0)] = int(Region.DIRICHLET)

    elif isinstance(boundary_spec, CircleDirichlet):
        h = 1.0 / (n - 1)
        dist2 = ((coords * h - 0.5) ** 2).sum(axis=0)
        flags[dist2 >= boundary_spec.radius**2] = int(Region.DIRICHLET)

    elif isinstance(boundary_spec, WallNeumannInward):
        if d > 2:
            raise InvalidSpec("wall_neumann_inward supports d in {1, 2}")
        n_extreme = extreme.sum(axis=0)
        skipped = set()
        if d == 2:
            # Next to each corner, the point reached along axis 0 is dropped
            # so the shared inward neighbor is claimed only once.
            for a in (0, n - 1):
                for b in (0, n - 1):
                    step = 1 if a == 0 else -1
                    skipped.add(flatten_index((a + step, b), n))
        for idx in np.flatnonzero(n_extreme == 1):
            if int(idx) in skipped:
                continue
            j = unflatten_index(int(idx), n, d)
            axis = next(ax for ax in range(d) if j[ax] in (0, n - 1))
            k = list(j)
            k[axis] += 1 if j[axis] == 0 else -1
            flags[idx] = int(Region.NEUMANN)
            neighbors[int(idx)] = (flatten_index(k, n),)
        if d == 1:
            for j0, k0 in ((0, 1), (n - 1, n - 2)):
                flags[j0] = int(Region.NEUMANN)
                neighbors[j0] = (k0,)

    elif isinstance(boundary_spec, CustomSpec):
        seen = set()
        for j, region, nbrs in boundary_spec.entries:
            region = Region(region)
            nbrs = tuple(tuple(k) for k in (nbrs or ()))
            _check_entry(d, n, tuple(j), region, nbrs)
            idx = flatten_index(j, n)
            if idx in seen:
                raise InvalidSpec(f"duplicate entry for index {tuple(j)}")
            seen.add(idx)
            flags[idx] = int(region)
            if nbrs:
                neighbors[idx] = tuple(flatten_index(k, n) for k in nbrs)
        robin_coeffs = boundary_spec.robin_coeffs
        if (flags == int(Region.ROBIN)).any() and robin_coeffs is None:
            robin_coeffs = (1.0, 1.0)

    else:
        raise InvalidSpec(f"unknown boundary spec {boundary_spec!r}")

    return Domain(d=d, n=n, flags=flags, neighbors=neighbors, robin_coeffs=robin_coeffs)


def classify(domain: Domain, j) -> Region:
    """Region flag of a multi-index, as the boundary oracle would report it."""
    if len(j) != domain.d or any(not (0 <= c < domain.n) for c in j):
        raise OutOfBounds(f"index {tuple(j)} outside [0, {domain.n - 1}]^{domain.d}")
    return Region(int(domain.flags[flatten_index(j, domain.n)]))


RULE_CONSTRAINED_NEIGHBOR = "neighbor-under-derivative-constraint"
RULE_SHARED_NEIGHBOR = "neighbor-shared-between-constraints"


@dataclass(frozen=True)
class Violation:
    rule: str
    points: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def suggestion(self) -> str:
        return "" if self.ok else "refine locally around the conflicting points"


def validate_neighbor_sets(domain: Domain) -> ValidationReport:
    """Check the two exclusion rules that make the swap network admissible.

    Rule one: a neighbor used in a difference formula must not itself carry
    a derivative constraint.  Rule two: neighbor sets of distinct constrained
    points must be disjoint.  One violation is reported per unordered
    conflict.
    """
    constrained = sorted(domain.neighbors)
    cset = set(constrained)
    violations = []
    seen_pairs = set()
    for j in constrained:
        for k in domain.neighbors[j]:
            if k in cset:
                key = (min(j, k), max(j, k))
                if key not in seen_pairs:
                    seen_pairs.add(key)
                    violations.append(Violation(RULE_CONSTRAINED_NEIGHBOR, key))
    for a_pos, j in enumerate(constrained):
        sj = set(domain.neighbors[j])
        for k in constrained[a_pos + 1 :]:
            if sj & set(domain.neighbors[k]):
                violations.append(Violation(RULE_SHARED_NEIGHBOR, (j, k)))
    return ValidationReport(tuple(violations))


def domain_to_json(domain: Domain) -> str:
    entries = []
    for idx in np.flatnonzero(domain.flags != int(Region.INTERIOR)):
        idx = int(idx)
        entries.append(
            {
                "index": list(domain.unflatten(idx)),
                "region": _REGION_NAMES[Region(int(domain.flags[idx]))],
                "neighbors": [list(domain.unflatten(k)) for k in domain.neighbors.get(idx, ())],
            }
        )
    robin = None
    if domain.robin_coeffs is not None:
        robin = {"alpha": domain.robin_coeffs[0], "beta": domain.robin_coeffs[1]}
    return json.dumps({"d": domain.d, "n": domain.n, "regions": entries, "robin": robin})


def domain_from_json(text: str) -> Domain:
    data = json.loads(text)
    entries = tuple(
        (tuple(e["index"]), _REGION_FROM_NAME[e["region"]], tuple(tuple(k) for k in e["neighbors"]))
        for e in data["regions"]
    )
    robin = data.get("robin")
    coeffs = (robin["alpha"], robin["beta"]) if robin else None
    return build_grid(data["d"], data["n"], CustomSpec(entries=entries, robin_coeffs=coeffs))
