"""Sine-basis Galerkin discretization of the pulled-back inverse Laplacian.

Everything lives on the reference square: the perturbed domain's operators
are conjugated back through the map phi, so the stiffness matrix carries the
coefficient A_phi = Dphi^{-1} Dphi^{-T} |det Dphi| and the mass matrix the
weight |det Dphi|,

    S[jk]  = sum over nodes of  w * (grad u_j)^T A_phi (grad u_k)
    Mw[jk] = sum over nodes of  w * u_j u_k |det Dphi|.

The generalized problem S v = lam Mw v then reproduces the perturbed
Dirichlet eigenvalues, while the coefficient-space solve S y = Mw c realizes
the pulled-back inverse operator.  For the identity map both matrices are
diagonal and the unperturbed spectrum m^2 + n^2 drops out exactly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import domain_map as dm
from . import grid as gr
from .errors import AdmissibilityError, NumericalError


@dataclass(eq=False)
class GalerkinPair:
    """Stiffness and weighted-mass matrices for one map at truncation M."""

    S: np.ndarray
    Mw: np.ndarray
    M: int
    map_label: str
    grid: gr.QuadGrid
    det: np.ndarray  # |det Dphi| at the grid nodes, reused downstream

    def dump_csv(self, path, which="S"):
        """Write 'row,col,value' triplets for offline inspection."""
        matrix = self.S if which == "S" else self.Mw
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("row,col,value\n")
            rows, cols = matrix.shape
            for i in range(rows):
                for j in range(cols):
                    fh.write(f"{i},{j},{matrix[i, j]!r}\n")


@dataclass(eq=False)
class EigenBasis:
    """Lowest generalized eigenpairs, Q_phi-orthonormal (v^T Mw v = I)."""

    eigenvalues: np.ndarray
    vectors: np.ndarray  # (M^2, count)
    M: int
    map_label: str

    @property
    def count(self):
        return self.eigenvalues.shape[0]


def assemble(pmap, M: int, grid: gr.QuadGrid) -> GalerkinPair:
    """Assemble S and Mw for a map; requires n_1d >= 2M + 4 oversampling."""
    if grid.n_1d < 2 * M + 4:
        raise ValueError(
            f"grid n_1d={grid.n_1d} under-resolves assembly at M={M} "
            f"(need n_1d >= 2M + 4 = {2 * M + 4})"
        )
    data = dm.jacobian_grid(pmap, grid.X, grid.Y)
    det = data["det"]
    if det.min() <= 0.0:
        raise AdmissibilityError(
            f"map {pmap.label!r} not admissible on the quadrature grid: "
            f"min det Dphi = {det.min():.3e}"
        )
    A = data["A"]
    a11 = A[:, 0, 0]
    a12 = A[:, 0, 1]
    a22 = A[:, 1, 1]
    w = grid.W

    U = gr.basis_matrix(grid, M)
    Gx, Gy = gr.gradient_matrices(grid, M)

    Mw = U.T @ (U * (w * det)[:, None])
    cross = Gx.T @ (Gy * (w * a12)[:, None])
    S = (
        Gx.T @ (Gx * (w * a11)[:, None])
        + cross
        + cross.T
        + Gy.T @ (Gy * (w * a22)[:, None])
    )
    return GalerkinPair(S=S, Mw=Mw, M=M, map_label=pmap.label, grid=grid, det=det)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Gauge: make the first coefficient of significant size positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.argmax(np.abs(col) > 1e-8 * np.abs(col).max())
        if col[idx] < 0:
            out[:, j] = -col
    return out


def solve_eigen(pair: GalerkinPair, k: int) -> EigenBasis:
    """Lowest k generalized eigenpairs of (S, Mw), Q_phi-orthonormalized."""
    if k < 1 or k > pair.M**2:
        raise ValueError(f"k must lie in [1, {pair.M ** 2}]")
    try:
        vals, vecs = scipy.linalg.eigh(pair.S, pair.Mw)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise AdmissibilityError(
            f"mass matrix for {pair.map_label!r} is not positive definite: {exc}"
        ) from exc
    if vals[0] <= 0.0:
        raise NumericalError(
            f"nonpositive leading eigenvalue {vals[0]:.3e} for {pair.map_label!r}"
        )
    return EigenBasis(
        eigenvalues=vals[:k].copy(),
        vectors=_fix_signs(vecs[:, :k]),
        M=pair.M,
        map_label=pair.map_label,
    )


def apply_T(coeffs: gr.CoeffVector) -> gr.CoeffVector:
    """Inverse Laplacian of the reference square: c_{mn} -> c_{mn}/(m^2+n^2)."""
    M = coeffs.M
    lam = gr.mode_eigenvalues(M).reshape(M, M)
    return gr.CoeffVector(coeffs.coeffs / lam)


def apply_T_phi(coeffs: gr.CoeffVector, pair: GalerkinPair) -> gr.CoeffVector:
    """Pulled-back inverse operator: solve S y = Mw c (SPD Cholesky solve)."""
    if coeffs.M != pair.M:
        raise ValueError("coefficient truncation does not match the assembled pair")
    rhs = pair.Mw @ coeffs.flat()
    try:
        factor = scipy.linalg.cho_factor(pair.S)
        y = scipy.linalg.cho_solve(factor, rhs)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"stiffness solve failed: {exc}") from exc
    return gr.CoeffVector(y.reshape(pair.M, pair.M))
