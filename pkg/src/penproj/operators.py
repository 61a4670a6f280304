"""Sparse discrete generators and spectral estimates.

The unconstrained generators used here keep the periodic-form stencil; all
boundary behavior comes from the penalty projector added by the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NoConvergence
from .grid import Domain

__all__ = [
    "Generator",
    "Forcing",
    "laplacian_fd",
    "wave_block",
    "spectral_norm",
    "anticommutator_norm",
    "zero_forcing",
    "constant_forcing",
    "assemble_dense",
    "export_dense_text",
]

_DENSE_GUARD = 4096


@dataclass(frozen=True, eq=False)
class Generator:
    """Linear operator with sparse action and norm metadata.

    ``apply(t, v)`` returns A(t) v.  ``norm_bound`` dominates the spectral
    norm over the horizon; ``mu_R_max`` is the largest real part among the
    eigenvalues (<= 0 flags a stable generator); ``mu_min`` is the most
    negative eigenvalue where known.  ``apply_adjoint`` is needed for
    singular-value estimates of non-Hermitian actions.
    """

    dim: int
    apply: callable
    is_time_dependent: bool = False
    norm_bound: float = 0.0
    mu_R_max: float = 0.0
    mu_min: float | None = None
    apply_adjoint: callable | None = None
    sparse_rows: object | None = None


@dataclass(frozen=True, eq=False)
class Forcing:
    """Inhomogeneity b(t) with sup-norm and time-integrated-norm bounds."""

    eval: callable
    B: float
    B_L1: float


def zero_forcing(dim: int) -> Forcing:
    z = np.zeros(dim, dtype=complex)
    return Forcing(eval=lambda t: z, B=0.0, B_L1=0.0)


def constant_forcing(vec: np.ndarray, horizon: float) -> Forcing:
    vec = np.asarray(vec, dtype=complex)
    norm = float(np.linalg.norm(vec))
    return Forcing(eval=lambda t: vec, B=norm, B_L1=norm * horizon)


def laplacian_fd(domain: Domain, diffusion: float, spacing: float | None = None,
                 stencil: str = "three_point_periodic") -> Generator:
    """D times the d-dimensional periodic three-point Laplacian."""
    if stencil != "three_point_periodic":
        raise ValueError(f"unknown stencil {stencil!r}")
    if diffusion <= 0:
        raise ValueError("diffusion must be positive")
    h = domain.spacing if spacing is None else spacing
    if h <= 0:
        raise ValueError("spacing must be positive")
    d, n = domain.d, domain.n
    scale = diffusion / h**2
    shape = (n,) * d

    def apply(t, v):
        grid = np.asarray(v).reshape(shape)
        out = -2.0 * d * grid
        for axis in range(d):
            out = out + np.roll(grid, 1, axis=axis) + np.roll(grid, -1, axis=axis)
        return (scale * out).reshape(-1)

    bound = 4.0 * d * diffusion / h**2
    return Generator(
        dim=n**d,
        apply=apply,
        norm_bound=bound,
        mu_R_max=0.0,
        mu_min=-bound,
        apply_adjoint=apply,  # symmetric
        sparse_rows=_periodic_laplacian_csr(n, d, scale) if n**d <= _DENSE_GUARD else None,
    )


def _periodic_laplacian_csr(n: int, d: int, scale: float):
    """Compressed-row form of the scaled periodic stencil, for cross-checks."""
    import scipy.sparse as sp

    one_d = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n), format="lil")
    one_d[0, n - 1] = 1.0
    one_d[n - 1, 0] = 1.0
    total = sp.csr_matrix((n**d, n**d))
    for axis in range(d):
        factors = [sp.identity(n, format="csr")] * d
        factors[axis] = one_d.tocsr()
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        total = total + term
    return (scale * total).tocsr()


def wave_block(L: Generator, c2: float) -> Generator:
    """Block system [[0, I], [c^2 L, 0]] for the second-order wave form.

    With a negative-semidefinite L the eigenvalues are purely imaginary,
    so mu_R_max stays 0.
    """
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    N = L.dim

    def apply(t, v):
        v = np.asarray(v)
        if v.shape != (2 * N,):
            raise DimMismatch(f"expected length {2 * N}, got {v.shape}")
        u, w = v[:N], v[N:]
        return np.concatenate([w, c2 * L.apply(t, u)])

    def apply_adjoint(t, v):
        u, w = np.asarray(v)[:N], np.asarray(v)[N:]
        return np.concatenate([c2 * L.apply(t, w), u])

    return Generator(
        dim=2 * N,
        apply=apply,
        is_time_dependent=L.is_time_dependent,
        norm_bound=max(1.0, c2 * L.norm_bound),
        mu_R_max=0.0,
        apply_adjoint=apply_adjoint,
    )


def _power_iterate(step, dim: int, tol: float, max_iter: int, seed: int) -> float:
    """Largest magnitude of a positive-semidefinite action via power iteration.

    ``step(v)`` must apply a Hermitian PSD operator; the return value is the
    square root of its spectral radius estimate.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    prev = np.inf
    for _ in range(max_iter):
        w = step(v)
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 0.0
        if abs(est - prev) <= tol * max(est, 1e-300):
            return float(np.sqrt(est))
        prev = est
        v = w / est
    raise NoConvergence(f"power iteration did not reach tol={tol} in {max_iter} steps")


def spectral_norm(g: Generator, t: float = 0.0, tol: float = 1e-6,
                  max_iter: int = 10000, seed: int = 0) -> float:
    """Power-iteration estimate of ||A(t)|| with a deterministic seed."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    adj = g.apply_adjoint if g.apply_adjoint is not None else g.apply

    def step(v):
        return adj(t, g.apply(t, v))

    return _power_iterate(step, g.dim, tol, max_iter, seed)


def anticommutator_norm(g: Generator, P, times, tol: float = 1e-6,
                        max_iter: int = 10000, seed: int = 0) -> float:
    """max over sampled times of || P A(t) + A(t)^dagger P ||.

    The composed operator is Hermitian, so the norm is the square root of the
    spectral radius of its square.
    """
    from . import projectors

    times = list(times)
    if not times:
        raise ValueError("times must be non-empty")
    adj = g.apply_adjoint if g.apply_adjoint is not None else g.apply
    best = 0.0
    for t in times:
        def m(v):
            return projectors.apply(P, g.apply(t, v)) + adj(t, projectors.apply(P, v))

        def step(v):
            return m(m(v))

        best = max(best, _power_iterate(step, g.dim, tol, max_iter, seed))
    return best


def assemble_dense(g: Generator, t: float = 0.0) -> np.ndarray:
    if g.dim > _DENSE_GUARD:
        raise DimMismatch(f"dense assembly guarded at dim <= {_DENSE_GUARD}")
    out = np.zeros((g.dim, g.dim), dtype=complex)
    basis = np.zeros(g.dim, dtype=complex)
    for i in range(g.dim):
        basis[:] = 0.0
        basis[i] = 1.0
        out[:, i] = g.apply(t, basis)
    return out


def export_dense_text(g: Generator, path, t: float = 0.0) -> None:
    """Coordinate-format text dump of the dense assembly for cross-checks."""
    mat = assemble_dense(g, t)
    rows, cols = np.nonzero(np.abs(mat) > 0)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate complex general\n")
        fh.write(f"{mat.shape[0]} {mat.shape[1]} {len(rows)}\n")
        for i, j in zip(rows, cols):
            z = mat[i, j]
            fh.write(f"{i + 1} {j + 1} {z.real:.17g} {z.imag:.17g}\n")
