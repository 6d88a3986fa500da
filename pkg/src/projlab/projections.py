"""The three partial-sum projections and their perturbation comparison.

For a non-splitting index set F the lab exposes

  * the reference projection      P_F  f = sum over F of <u_j, f> u_j,
  * the pulled-back projection    P_F^phi f = sum over F of Q_phi[v_j, f] v_j,
  * the target-domain projection  (realized through its pullback, see
    ``transfer_projection``),

where v_j are Q_phi-orthonormal eigenfields of the pulled-back operator.
F is matched across spectra by its positions in the canonical eigenvalue
listing; positions must cover whole near-degenerate clusters on the
perturbed side or a SplittingError fires (the contour formula behind these
projections cannot separate equal eigenvalues).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import DEFAULT_SEED
from . import domain_map as dm
from . import galerkin as ga
from . import grid as gr
from . import lattice
from .errors import SplittingError

# relative spacing below which two perturbed eigenvalues count as one cluster
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class ProjectionReport:
    """Measured projection distance next to the theory's bound ingredients."""

    map_label: str
    F_label: str
    p: float
    measured_diff_norm: float
    bound_value: float
    inf_det: float
    sup_one_minus_det: float
    kappa: float
    C_F_phi: float

    CSV_HEADER = (
        "map_label,F_label,p,measured,inf_det,sup_one_minus_det,kappa,C_F_phi"
    )

    def csv_row(self) -> str:
        return (
            f"{self.map_label},{self.F_label},{self.p!r},"
            f"{self.measured_diff_norm!r},{self.inf_det!r},"
            f"{self.sup_one_minus_det!r},{self.kappa!r},{self.C_F_phi!r}"
        )


def coeff_mask(F: lattice.IndexSet, M: int) -> np.ndarray:
    """Boolean (M, M) mask of F's modes; rejects modes above the truncation."""
    mask = np.zeros((M, M), dtype=bool)
    for mode in F:
        if mode.m > M or mode.n > M:
            raise ValueError(
                f"mode ({mode.m},{mode.n}) of {F.label} exceeds truncation M={M}"
            )
        mask[mode.m - 1, mode.n - 1] = True
    return mask


def project_F(coeffs: gr.CoeffVector, F: lattice.IndexSet) -> gr.CoeffVector:
    """Reference projection in coefficient space: zero outside F."""
    mask = coeff_mask(F, coeffs.M)
    return gr.CoeffVector(np.where(mask, coeffs.coeffs, 0.0))


def matched_positions(F, basis: ga.EigenBasis, cluster_tol: float = CLUSTER_TOL):
    """Listing positions of F, validated against the perturbed spectrum.

    Raises SplittingError if F splits the reference spectrum, if a
    near-degenerate perturbed cluster straddles the position boundary, or if
    the basis holds too few eigenpairs to check the boundary.
    """
    if lattice.splits(F):
        raise SplittingError(f"{F.label} splits the reference spectrum")
    positions = lattice.listing_positions(F, max_index=max(basis.M, 8))
    if not positions:
        return positions
    if max(positions) + 1 >= basis.count:
        raise ValueError(
            f"basis holds {basis.count} eigenpairs; need at least "
            f"{max(positions) + 2} to bound {F.label}"
        )
    lam = basis.eigenvalues
    inside = set(positions)
    for i in positions:
        for j in (i - 1, i + 1):
            if j < 0 or j in inside:
                continue
            if abs(lam[i] - lam[j]) < cluster_tol * max(abs(lam[i]), 1.0):
                raise SplittingError(
                    f"{F.label} cuts a perturbed cluster: positions {i},{j} "
                    f"carry eigenvalues {lam[i]!r}, {lam[j]!r}"
                )
    return positions


def _basis_fields(basis: ga.EigenBasis, positions, grid: gr.QuadGrid) -> np.ndarray:
    U = gr.basis_matrix(grid, basis.M)
    return U @ basis.vectors[:, list(positions)]


def project_F_phi(field: gr.Field, F, basis: ga.EigenBasis, pmap) -> gr.Field:
    """Pulled-back projection P_F^phi f = sum Q_phi[v_j, f] v_j."""
    positions = matched_positions(F, basis)
    Phi = _basis_fields(basis, positions, field.grid)
    det = np.abs(dm.jacobian_entries(pmap, field.grid.X, field.grid.Y)[4])
    coefs = Phi.T @ (field.grid.W * det * field.values)
    return gr.Field(Phi @ coefs, field.grid)


def transfer_projection(pulled_back: gr.Field, F, basis, pmap) -> gr.Field:
    """Target-domain projection of g, realized on the reference grid.

    For g on the deformed domain with pullback f = g o phi, the projection
    of g expands in the deformed eigenfunctions; composing that expansion
    with phi gives exactly the pulled-back projection of f, so everything is
    computed on the reference square.  Push the result (and its norms)
    forward with ``pushforward_lp_norm``.
    """
    return project_F_phi(pulled_back, F, basis, pmap)


def pushforward_lp_norm(field: gr.Field, pmap, p) -> float:
    """L^p norm of field o phi^{-1} over phi(Omega), by change of variables."""
    det = np.abs(dm.jacobian_entries(pmap, field.grid.X, field.grid.Y)[4])
    if p == math.inf:
        return float(np.abs(field.values).max())
    p = float(p)
    if p < 1.0:
        raise ValueError("p must be >= 1 or inf")
    return float((field.grid.W @ (np.abs(field.values) ** p * det)) ** (1.0 / p))


def reference_projection_operator(F, grid: gr.QuadGrid, M: int):
    """P_F as a self-adjoint operator on node values (analysis route)."""
    mask = coeff_mask(F, M).reshape(-1)
    U = gr.basis_matrix(grid, M)[:, mask]
    scale = 4.0 / math.pi**2

    def apply(values):
        return U @ (scale * (U.T @ (grid.W * values)))

    return gr.LinearFieldOperator(apply)


def pulled_back_projection_operator(F, basis: ga.EigenBasis, pmap, grid: gr.QuadGrid):
    """P_F^phi as an operator on node values, with its weighted-L^2 adjoint."""
    positions = matched_positions(F, basis)
    Phi = _basis_fields(basis, positions, grid)
    det = np.abs(dm.jacobian_entries(pmap, grid.X, grid.Y)[4])

    def apply(values):
        return Phi @ (Phi.T @ (grid.W * det * values))

    def adjoint(values):
        return det * (Phi @ (Phi.T @ (grid.W * values)))

    return gr.LinearFieldOperator(apply, adjoint)


def eigenfunction_norm_sum(basis, positions, pmap, grid, p) -> float:
    """sum over F of ||u_j||_p ||u_j||_q on the deformed domain.

    Norms of the deformed eigenfunctions are computed by change of
    variables from their pullbacks, avoiding any target-domain mesh.
    """
    q = p / (p - 1.0)
    Phi = _basis_fields(basis, positions, grid)
    total = 0.0
    for j in range(Phi.shape[1]):
        f = gr.Field(Phi[:, j], grid)
        total += pushforward_lp_norm(f, pmap, p) * pushforward_lp_norm(f, pmap, q)
    return total


def projection_diff_report(
    F,
    pmap,
    p,
    M: int,
    grid: gr.QuadGrid,
    restarts: int = 8,
    iters: int = 60,
    seed: int = DEFAULT_SEED,
    sample_density: int = 128,
) -> ProjectionReport:
    """Measure ||P_F - P_F^phi|| on L^p and assemble the bound's ingredients.

    The measured norm is a lower-bound estimate; the bound value is the
    theoretical right-hand side with its unknown absolute constant set to 1,
    reported for side-by-side inspection rather than asserted.
    """
    p = float(p)
    if not (1.0 < p < math.inf):
        raise ValueError("p must lie in (1, inf)")
    split_list = lattice.splits(F)
    if split_list:
        raise SplittingError(f"{F.label} splits {[s[0] for s in split_list]}")

    pair = ga.assemble(pmap, M, grid)
    positions = lattice.listing_positions(F, max_index=max(M, 8))
    basis = ga.solve_eigen(pair, min(max(positions) + 4, M * M))

    P_ref = reference_projection_operator(F, grid, M)
    P_phi = pulled_back_projection_operator(F, basis, pmap, grid)
    measured = gr.estimate_opnorm_p(
        P_ref - P_phi, p, grid, restarts=restarts, iters=iters, seed=seed
    )

    metrics = dm.admissibility_metrics(pmap, sample_density)
    cfphi = (metrics.sup_det / metrics.inf_det) * eigenfunction_norm_sum(
        basis, positions, pmap, grid, p
    )
    bound = cfphi * (metrics.sup_one_minus_det + metrics.kappa) / metrics.inf_det
    return ProjectionReport(
        map_label=pmap.label,
        F_label=F.label,
        p=p,
        measured_diff_norm=measured,
        bound_value=bound,
        inf_det=metrics.inf_det,
        sup_one_minus_det=metrics.sup_one_minus_det,
        kappa=metrics.kappa,
        C_F_phi=cfphi,
    )
