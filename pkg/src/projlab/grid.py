"""Quadrature grids, sine-basis transforms, L^p norms, and operator-norm bounds.

The reference square [0, pi]^2 is discretized by a tensor Gauss-Legendre
grid.  Fields are scalar samples at the nodes; coefficient vectors hold
double-sine coefficients for the modes sin(mx)sin(ny), m, n <= M, stored
row-major in m.  The basis is kept unnormalized (raw products of sines);
the 4/pi^2 normalization lives in ``analyze`` alone.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import DEFAULT_SEED
from . import domain_map as dm

PI = math.pi


@dataclass(frozen=True, eq=False)
class QuadGrid:
    """Tensor Gauss-Legendre quadrature on [0, pi]^2.

    Nodes are ordered x-major: node index i*n_1d + j holds (x_i, y_j).
    """

    n_1d: int
    x1d: np.ndarray
    w1d: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    W: np.ndarray

    @property
    def n_nodes(self):
        return self.n_1d * self.n_1d


@dataclass(eq=False)
class Field:
    """Scalar samples at the nodes of a quadrature grid."""

    values: np.ndarray
    grid: QuadGrid

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError("field length must match the grid node count")

    def dump_csv(self, path):
        """Write 'x,y,value' rows."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y,value\n")
            for x, y, v in zip(self.grid.X, self.grid.Y, self.values):
                fh.write(f"{x!r},{y!r},{v!r}\n")


@dataclass(eq=False)
class CoeffVector:
    """Dense double-sine coefficients c[m-1, n-1] for modes m, n <= M."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.coeffs.shape[1]:
            raise ValueError("coefficients must form a square M x M array")

    @property
    def M(self):
        return self.coeffs.shape[0]

    def flat(self):
        return self.coeffs.reshape(-1)

    @classmethod
    def zeros(cls, M, dtype=float):
        return cls(np.zeros((M, M), dtype=dtype))

    @classmethod
    def unit(cls, m, n, M):
        c = np.zeros((M, M))
        c[m - 1, n - 1] = 1.0
        return cls(c)

    def dump_csv(self, path):
        """Write 'm,n,coefficient' rows."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("m,n,coefficient\n")
            M = self.M
            for m in range(1, M + 1):
                for n in range(1, M + 1):
                    fh.write(f"{m},{n},{self.coeffs[m - 1, n - 1]!r}\n")


def make_grid(n_1d: int) -> QuadGrid:
    """Tensor Gauss-Legendre nodes and weights mapped to [0, pi] per axis."""
    if n_1d < 4:
        raise ValueError("n_1d must be >= 4")
    t, w = np.polynomial.legendre.leggauss(n_1d)
    x1d = (t + 1.0) * (PI / 2.0)
    w1d = w * (PI / 2.0)
    X = np.repeat(x1d, n_1d)
    Y = np.tile(x1d, n_1d)
    W = np.repeat(w1d, n_1d) * np.tile(w1d, n_1d)
    return QuadGrid(n_1d=n_1d, x1d=x1d, w1d=w1d, X=X, Y=Y, W=W)


def mode_eigenvalues(M: int) -> np.ndarray:
    """m^2 + n^2 for all modes <= M, flattened in coefficient order."""
    k = np.arange(1, M + 1)
    return (k[:, None] ** 2 + k[None, :] ** 2).reshape(-1).astype(float)


def basis_matrix(grid: QuadGrid, M: int) -> np.ndarray:
    """(n_nodes, M^2) matrix of mode values sin(mx)sin(ny) at the nodes."""
    k = np.arange(1, M + 1)
    Sx = np.sin(np.outer(grid.x1d, k))
    Sy = np.sin(np.outer(grid.x1d, k))
    U = np.einsum("im,jn->ijmn", Sx, Sy)
    return U.reshape(grid.n_nodes, M * M)


def gradient_matrices(grid: QuadGrid, M: int):
    """(n_nodes, M^2) matrices of the mode gradients.

    d/dx sin(mx)sin(ny) = m cos(mx)sin(ny) and symmetrically in y.
    """
    k = np.arange(1, M + 1)
    Sx = np.sin(np.outer(grid.x1d, k))
    Cx = np.cos(np.outer(grid.x1d, k)) * k[None, :]
    Gx = np.einsum("im,jn->ijmn", Cx, Sx).reshape(grid.n_nodes, M * M)
    Gy = np.einsum("im,jn->ijmn", Sx, Cx).reshape(grid.n_nodes, M * M)
    return Gx, Gy


def eval_mode(mode, grid: QuadGrid) -> Field:
    """Pointwise sin(mx)sin(ny) at the grid nodes, unnormalized."""
    return Field(np.sin(mode.m * grid.X) * np.sin(mode.n * grid.Y), grid)


def analyze(f: Field, M: int) -> CoeffVector:
    """Double-sine coefficients of a field: c_{mn} = (4/pi^2) <u_mn, f>.

    Requires n_1d >= 2M so that the quadrature resolves all retained modes.
    """
    if f.grid.n_1d < 2 * M:
        raise ValueError(
            f"grid with n_1d={f.grid.n_1d} under-resolves M={M} (need n_1d >= 2M)"
        )
    U = basis_matrix(f.grid, M)
    c = (4.0 / PI**2) * (U.T @ (f.grid.W * f.values))
    return CoeffVector(c.reshape(M, M))


def synthesize(coeffs: CoeffVector, grid: QuadGrid) -> Field:
    """Pointwise sum of sin(mx)sin(ny) weighted by the coefficients."""
    U = basis_matrix(grid, coeffs.M)
    return Field(U @ coeffs.flat(), grid)


def lp_norm(f: Field, p) -> float:
    """Weighted L^p norm over the square; p = inf gives the max of |values|."""
    if p == math.inf:
        return float(np.abs(f.values).max())
    p = float(p)
    if p < 1.0:
        raise ValueError("p must be >= 1 or inf")
    return float((f.grid.W @ np.abs(f.values) ** p) ** (1.0 / p))


def q_phi_inner(u: Field, v: Field, pmap) -> float:
    """The target-domain inner product on the reference square.

    Q_phi[u, v] = sum of weights * u * v * |det Dphi|; reduces to the plain
    L^2 inner product for the identity map.
    """
    if u.grid is not v.grid:
        raise ValueError("fields must share a quadrature grid")
    det = np.abs(dm.jacobian_entries(pmap, u.grid.X, u.grid.Y)[4])
    return float(np.sum(u.grid.W * u.values * v.values * det))


class LinearFieldOperator:
    """A linear map on node-value arrays with its weighted-L^2 adjoint.

    ``adjoint=None`` declares the operator self-adjoint with respect to the
    quadrature-weighted inner product.
    """

    def __init__(self, apply, adjoint=None):
        self._apply = apply
        self._adjoint = adjoint

    def apply(self, values):
        return self._apply(values)

    def adjoint(self, values):
        if self._adjoint is None:
            return self._apply(values)
        return self._adjoint(values)

    def __sub__(self, other):
        return LinearFieldOperator(
            lambda v: self.apply(v) - other.apply(v),
            lambda v: self.adjoint(v) - other.adjoint(v),
        )


def _dual_vector(values, p):
    """Entrywise duality map |v|^{p-1} sign(v); pairs v to its norming functional."""
    return np.sign(values) * np.abs(values) ** (p - 1.0)


def _weighted_norm(values, w, p):
    return float((w @ np.abs(values) ** p) ** (1.0 / p))


def estimate_opnorm_p(
    op,
    p,
    grid: QuadGrid,
    restarts: int = 8,
    iters: int = 60,
    seed: int = DEFAULT_SEED,
) -> float:
    """Lower bound for the L^p -> L^p operator norm by duality-map power iteration.

    Iterates x <- dual_q(A* dual_p(A x)) in the quadrature-weighted norms;
    every recorded value ||A x||_p / ||x||_p is a certified lower bound, and
    the best over ``restarts`` seeded random starts is returned.  Exact
    p-norms are intractable in general, so callers must treat the result as
    a lower bound only.  Deterministic for a fixed seed.
    """
    p = float(p)
    if not (1.0 < p < math.inf):
        raise ValueError("p must lie in (1, inf)")
    q = p / (p - 1.0)
    if isinstance(op, tuple):
        op = LinearFieldOperator(*op)
    rng = np.random.default_rng(seed)
    w = grid.W
    best = 0.0
    for _ in range(restarts):
        x = rng.standard_normal(grid.n_nodes)
        x /= _weighted_norm(x, w, p)
        prev = None
        for _ in range(iters):
            y = op.apply(x)
            gamma = _weighted_norm(y, w, p)
            if gamma > best:
                best = gamma
            if gamma < 1e-300:
                break
            if prev is not None and abs(gamma - prev) <= 1e-13 * gamma:
                break
            prev = gamma
            z = op.adjoint(_dual_vector(y / gamma, p))
            x = _dual_vector(z, q)
            nx = _weighted_norm(x, w, p)
            if nx < 1e-300:
                break
            x /= nx
    return best
