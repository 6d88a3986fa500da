"""Resolvent multipliers, radial cutoffs, contours, and contour projections.

The resolvent of the reference inverse operator acts diagonally on sine
coefficients via the rational symbol

    sigma_z(m, n) = (m^2+n^2) / (1 - z (m^2+n^2)) = 1 / (mu - z),  mu = 1/(m^2+n^2).

Viewed as a radial function of xi in the plane, sigma_z has a pole circle at
|xi| = 1/sqrt(z) for real z in a spectral gap; a C^2 radial cutoff rho_z
(quintic smoothstep ramps) kills an annulus around it while staying exactly 1
at every lattice radius, and chi_z = sigma_z * rho_z is the bounded symbol
whose Mihlin-type constant

    A = max_{|alpha| <= 2} sup |xi|^{|alpha|} |d^alpha chi_z(xi)|

is estimated on a log-polar sample grid.

Contour projections integrate the resolvent over a cycle of circles, one per
eigenvalue cluster, each reaching halfway into the local gap; the trapezoid
rule then converges geometrically with a comfortable rate, which a single
circle around the whole window cannot achieve once inverse eigenvalues crowd
together.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import galerkin as ga
from . import grid as gr
from . import lattice
from ._smoothstep import smoothstep_c2
from .errors import NumericalError, SplittingError

PI = math.pi


def sigma_z(mode, z) -> complex:
    """The resolvent symbol at one lattice mode; errors at the pole z = 1/(m^2+n^2)."""
    lam = mode.eigenvalue
    denom = 1.0 - complex(z) * lam
    if abs(denom) < 1e-12 * max(1.0, abs(z) * lam):
        raise NumericalError(f"sigma pole: z = {z!r} hits eigenvalue {lam}")
    return lam / denom


@dataclass(frozen=True)
class MultiplierSymbol:
    """chi_z = sigma_z * rho_z as a radial symbol with analytic derivatives.

    ``annulus_center`` is None when the cutoff is inactive (rho = 1), which
    is the right reading for Re z <= 0 where sigma_z has no real pole.
    """

    z: complex
    annulus_center: float | None
    eps_width: float
    flat_inner: float
    flat_outer: float

    def rho(self, r):
        """Radial cutoff value with first and second derivatives."""
        r = np.asarray(r, dtype=float)
        if self.annulus_center is None:
            one = np.ones_like(r)
            zero = np.zeros_like(r)
            return one, zero, zero
        c, eps = self.annulus_center, self.eps_width
        r_lo, r_hi = self.flat_inner, self.flat_outer
        w_down = (c - eps) - r_lo
        w_up = r_hi - (c + eps)
        s_down, ds_down, dds_down = smoothstep_c2((r - r_lo) / w_down)
        s_up, ds_up, dds_up = smoothstep_c2((r - (c + eps)) / w_up)
        # rho = 1 - s_down + s_up on the dip region, clamped by the flats
        val = 1.0 - s_down + s_up
        d1 = -ds_down / w_down + ds_up / w_up
        d2 = -dds_down / w_down**2 + dds_up / w_up**2
        return val, d1, d2

    def sigma_radial(self, r):
        """sigma(r) = r^2/(1 - z r^2) with first and second derivatives."""
        r = np.asarray(r, dtype=float)
        z = complex(self.z)
        denom = 1.0 - z * r * r
        val = r * r / denom
        d1 = 2.0 * r / denom**2
        d2 = 2.0 / denom**2 + 8.0 * z * r * r / denom**3
        return val, d1, d2

    def chi_radial(self, r):
        """chi(r) = sigma(r) rho(r) with derivatives; identically 0 in the dead zone."""
        r = np.asarray(r, dtype=float)
        rho, drho, ddrho = self.rho(r)
        dead = rho == 0.0
        safe = np.where(dead, 0.0, r)
        sig, dsig, ddsig = self.sigma_radial(safe)
        val = np.where(dead, 0.0, sig * rho)
        d1 = np.where(dead, 0.0, dsig * rho + sig * drho)
        d2 = np.where(dead, 0.0, ddsig * rho + 2.0 * dsig * drho + sig * ddrho)
        return val, d1, d2

    def chi(self, x, y):
        """chi_z at planar points (x, y)."""
        r = np.hypot(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self.chi_radial(r)[0]

    def chi_partials(self, x, y):
        """All partial derivatives of chi through second order, by chain rule.

        Returns a dict keyed by multi-index (i, j) = (d/dx)^i (d/dy)^j.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        val, d1, d2 = self.chi_radial(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            cx = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)
            cy = np.where(r > 0, y / np.where(r > 0, r, 1.0), 0.0)
            inv_r = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
        return {
            (0, 0): val,
            (1, 0): d1 * cx,
            (0, 1): d1 * cy,
            (2, 0): d2 * cx * cx + d1 * cy * cy * inv_r,
            (0, 2): d2 * cy * cy + d1 * cx * cx * inv_r,
            (1, 1): (d2 - d1 * inv_r) * cx * cy,
        }


def plain_symbol(z) -> MultiplierSymbol:
    """sigma_z alone (cutoff inactive); only sensible away from real poles."""
    return MultiplierSymbol(
        z=complex(z), annulus_center=None, eps_width=0.0, flat_inner=0.0, flat_outer=0.0
    )


def build_cutoff(z, window: lattice.SpectrumWindow) -> MultiplierSymbol:
    """Radial cutoff for the gap above a spectrum window.

    The symbol is 1 up to sqrt(lam_max) + delta and from sqrt(lam_next) -
    delta on (delta a quarter of the frequency gap), dips to 0 on a dead
    annulus around the pole radius 1/sqrt(Re z), and ramps with quintic
    smoothsteps in between.  The dead-zone half-width is half the distance
    from the pole radius to the nearer flat edge, so the geometry stays
    valid for any z whose pole radius lies strictly between the flats.
    """
    z = complex(z)
    if z.real <= 0.0:
        return plain_symbol(z)
    s_lo = math.sqrt(window.distinct_values_inside[-1])
    s_hi = math.sqrt(window.value_above)
    gap = s_hi - s_lo
    if gap <= 0:
        raise ValueError("window has an empty frequency gap")
    delta = gap / 4.0
    r_lo = s_lo + delta
    r_hi = s_hi - delta
    center = 1.0 / math.sqrt(z.real)
    if not (r_lo < center < r_hi):
        raise NumericalError(
            f"pole radius {center:.6f} outside the flat window ({r_lo:.6f}, {r_hi:.6f})"
        )
    eps = 0.5 * min(center - r_lo, r_hi - center)
    return MultiplierSymbol(
        z=z, annulus_center=center, eps_width=eps, flat_inner=r_lo, flat_outer=r_hi
    )


def _sample_radii(symbol: MultiplierSymbol, n_radial: int):
    r_max = 40.0
    if symbol.annulus_center is not None:
        r_max = max(r_max, 3.0 * symbol.flat_outer)
    radii = np.geomspace(1e-2, r_max, n_radial)
    if symbol.annulus_center is not None:
        c, eps = symbol.annulus_center, symbol.eps_width
        band = n_radial // 2
        down = np.linspace(symbol.flat_inner, c - eps, band)
        up = np.linspace(c + eps, symbol.flat_outer, band)
        radii = np.unique(np.concatenate([radii, down, up]))
    return radii


def mihlin_constant(symbol: MultiplierSymbol, n_radial: int = 400, n_angular: int = 17):
    """Sampled estimate of max_{|alpha|<=2} sup |xi|^{|alpha|} |d^alpha chi(xi)|.

    Log-polar sampling, refined linearly across the cutoff's ramp bands.
    Angles cover one quadrant (the symbol is radial); 17 points include the
    axis and diagonal directions where the second-order terms peak.
    """
    radii = _sample_radii(symbol, n_radial)
    angles = np.linspace(0.0, PI / 2.0, n_angular)
    R, T = np.meshgrid(radii, angles, indexing="ij")
    X = (R * np.cos(T)).ravel()
    Y = (R * np.sin(T)).ravel()
    weight = np.hypot(X, Y)
    partials = symbol.chi_partials(X, Y)
    best = 0.0
    for (i, j), values in partials.items():
        order = i + j
        term = np.abs(values) * weight**order
        best = max(best, float(np.nanmax(term)))
    return best


@dataclass(frozen=True)
class Contour:
    """A cycle of circles enclosing chosen inverse eigenvalues.

    ``nodes``/``weights`` concatenate the trapezoid rules of all component
    circles (weights include the dz factor), so a contour integral is just
    sum(weights * f(nodes)) for any integrand f.
    """

    nodes: np.ndarray
    weights: np.ndarray
    enclosed_mu: tuple
    clearance: float
    circles: tuple
    nodes_per_circle: int

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))

    def winding_number(self, point) -> complex:
        return self.integrate(1.0 / (self.nodes - point)) / (2.0j * PI)


def contour_from_groups(inside_groups, outside_values, nodes_per_circle: int) -> Contour:
    """One trapezoid circle per group, reaching halfway into the local gap.

    ``inside_groups`` is a list of lists of real values (each group is one
    eigenvalue cluster, on the inverse-eigenvalue axis); ``outside_values``
    are the poles the cycle must exclude.
    """
    if nodes_per_circle < 4:
        raise ValueError("need at least 4 nodes per circle")
    outside = np.asarray(sorted(outside_values), dtype=float)
    groups = [np.asarray(sorted(g), dtype=float) for g in inside_groups if len(g)]
    if not groups:
        raise ValueError("no values to enclose")
    circles = []
    for k, group in enumerate(groups):
        lo, hi = group[0], group[-1]
        center = 0.5 * (lo + hi)
        half_range = 0.5 * (hi - lo)
        others = [v for j, g in enumerate(groups) if j != k for v in g]
        rivals = np.concatenate([outside, np.asarray(others)]) if len(others) else outside
        if rivals.size == 0:
            d_out = max(2.0 * half_range, abs(center))
        else:
            d_out = float(np.abs(rivals - center).min())
        if d_out <= half_range:
            raise SplittingError(
                f"cluster around {center!r} overlaps an excluded value "
                f"(spread {half_range!r} vs nearest outside {d_out!r})"
            )
        radius = 0.5 * (half_range + d_out)
        circles.append((center, radius))

    theta = 2.0 * PI * np.arange(nodes_per_circle) / nodes_per_circle
    unit = np.exp(1j * theta)
    nodes = []
    weights = []
    for center, radius in circles:
        nodes.append(center + radius * unit)
        weights.append((2.0 * PI / nodes_per_circle) * 1j * radius * unit)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)

    all_poles = np.concatenate([outside] + groups) if outside.size else np.concatenate(groups)
    clearance = min(
        float(np.abs(np.abs(all_poles - c) - r).min()) for c, r in circles
    )
    enclosed = tuple(float(v) for g in groups for v in g)
    return Contour(
        nodes=nodes,
        weights=weights,
        enclosed_mu=enclosed,
        clearance=clearance,
        circles=tuple(circles),
        nodes_per_circle=nodes_per_circle,
    )


def build_contour(
    window: lattice.SpectrumWindow,
    perturbed_eigenvalues=None,
    nodes: int = 64,
) -> Contour:
    """Cycle enclosing the window's inverse eigenvalues of both spectra.

    One circle per distinct reference eigenvalue; each encloses the
    reference mu and, when a perturbed spectrum is supplied, the perturbed
    partners at the window's listing positions.  Raises SplittingError when
    a perturbed value escapes its gap (the perturbation is too large for
    the window).
    """
    listing = lattice.enumerate_modes(
        max(window.max_index, lattice._required_index(window.value_above) + 1)
    )
    lam_listing = [mode.eigenvalue for mode in listing]
    positions = list(window.positions)

    groups = {}
    for pos in positions:
        value = lam_listing[pos]
        groups.setdefault(value, []).append(1.0 / value)

    horizon = 4.0 * window.value_above
    outside = {
        1.0 / value
        for value in sorted(set(lam_listing))
        if value <= horizon and value not in groups
    }

    if perturbed_eigenvalues is not None:
        lam_pert = np.asarray(perturbed_eigenvalues, dtype=float)
        if len(lam_pert) <= max(positions) + 1:
            raise ValueError(
                f"need at least {max(positions) + 2} perturbed eigenvalues, "
                f"got {len(lam_pert)}"
            )
        for pos in positions:
            groups[lam_listing[pos]].append(1.0 / lam_pert[pos])
        for pos, lam in enumerate(lam_pert):
            if pos not in positions:
                outside.add(1.0 / lam)

    ordered = [groups[value] for value in sorted(groups)]
    return contour_from_groups(ordered, sorted(outside), nodes)


def resolvent_matrix(z, pair: ga.GalerkinPair | None = None, M: int | None = None):
    """Matrix of (T - z)^{-1} on coefficient space.

    Unperturbed (pair=None): diagonal 1/(mu - z).  Perturbed: the pulled-back
    operator is S^{-1} Mw, so the resolvent solves (Mw - z S) Y = S.
    """
    if pair is None:
        if M is None:
            raise ValueError("M is required for the unperturbed resolvent")
        mu = 1.0 / gr.mode_eigenvalues(M)
        denom = mu - complex(z)
        if np.abs(denom).min() < 1e-10:
            raise NumericalError(f"z = {z!r} is within 1e-10 of an eigenvalue")
        return np.diag(1.0 / denom)
    lhs = pair.Mw.astype(complex) - complex(z) * pair.S
    try:
        return scipy.linalg.solve(lhs, pair.S.astype(complex))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"resolvent solve failed at z = {z!r}: {exc}") from exc


def apply_resolvent(
    coeffs: gr.CoeffVector, z, pair: ga.GalerkinPair | None = None
) -> gr.CoeffVector:
    """(T - z)^{-1} applied to a coefficient vector (complex output)."""
    if pair is None:
        M = coeffs.M
        mu = 1.0 / gr.mode_eigenvalues(M)
        denom = mu - complex(z)
        if np.abs(denom).min() < 1e-10:
            raise NumericalError(f"z = {z!r} is within 1e-10 of an eigenvalue")
        return gr.CoeffVector((coeffs.flat() / denom).reshape(M, M))
    if coeffs.M != pair.M:
        raise ValueError("coefficient truncation does not match the assembled pair")
    lhs = pair.Mw.astype(complex) - complex(z) * pair.S
    rhs = pair.S @ coeffs.flat().astype(complex)
    try:
        y = scipy.linalg.solve(lhs, rhs)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"resolvent solve failed at z = {z!r}: {exc}") from exc
    return gr.CoeffVector(y.reshape(pair.M, pair.M))


@dataclass(frozen=True)
class KatoResult:
    """Contour projection with its quadrature diagnostics."""

    matrix: np.ndarray
    imag_magnitude: float
    nodes_per_circle: int


def kato_projection(
    contour: Contour,
    pair: ga.GalerkinPair | None = None,
    M: int | None = None,
    verify: bool = False,
) -> KatoResult:
    """P = Re( -(1/2 pi i) sum of weights * (T - z)^{-1} ) over the cycle.

    The imaginary part of the sum is pure quadrature noise for these
    real-symmetric problems and is recorded as a diagnostic.  With
    ``verify=True`` the node count is doubled and a change above 1e-8
    raises NumericalError (under-resolved quadrature).
    """
    if contour.clearance <= 0:
        raise ValueError("contour clearance must be positive")
    size = (pair.M if pair is not None else M) ** 2
    total = np.zeros((size, size), dtype=complex)
    for z, w in zip(contour.nodes, contour.weights):
        total += w * resolvent_matrix(z, pair=pair, M=M)
    total *= -1.0 / (2.0j * PI)
    result = KatoResult(
        matrix=total.real.copy(),
        imag_magnitude=float(np.abs(total.imag).max()),
        nodes_per_circle=contour.nodes_per_circle,
    )
    if verify:
        refined = _with_nodes(contour, 2 * contour.nodes_per_circle)
        again = kato_projection(refined, pair=pair, M=M, verify=False)
        drift = float(np.abs(again.matrix - result.matrix).max())
        if drift > 1e-8:
            raise NumericalError(
                f"contour quadrature under-resolved: doubling nodes moved the "
                f"projection by {drift:.3e}"
            )
    return result


def _with_nodes(contour: Contour, nodes_per_circle: int) -> Contour:
    theta = 2.0 * PI * np.arange(nodes_per_circle) / nodes_per_circle
    unit = np.exp(1j * theta)
    nodes = []
    weights = []
    for center, radius in contour.circles:
        nodes.append(center + radius * unit)
        weights.append((2.0 * PI / nodes_per_circle) * 1j * radius * unit)
    return Contour(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        enclosed_mu=contour.enclosed_mu,
        clearance=contour.clearance,
        circles=contour.circles,
        nodes_per_circle=nodes_per_circle,
    )


def direct_projection_matrix(positions, basis: ga.EigenBasis, pair: ga.GalerkinPair):
    """Spectral-projection oracle: sum over F of v_j (Mw v_j)^T."""
    V = basis.vectors[:, list(positions)]
    return V @ (pair.Mw @ V).T


def unperturbed_projection_matrix(F: lattice.IndexSet, M: int):
    """0/1 diagonal matrix of the reference projection in coefficient space."""
    from .projections import coeff_mask

    return np.diag(coeff_mask(F, M).reshape(-1).astype(float))
