"""Perturbation maps phi = id + (f, g) on the square [0, pi]^2.

A map carries vectorized evaluators for the displacement components f, g and
all their partial derivatives through second order.  From the Jacobian
Dphi we form, pointwise,

    A = Dphi^{-1} Dphi^{-T} |det Dphi|        (pulled-back Dirichlet coefficient)
    M = A - I                                 (deviation from the identity)

together with admissibility metrics: determinant extrema, W^{1,inf} and
W^{2,inf} distances from the identity, and the constant kappa bounding the
entries of M and its two divergence rows.  The entries of A are always
computed numerically from Dphi (2x2 inverse via LAPACK), never from printed
closed forms.

Shipped family evaluators are global smooth formulas, so finite-difference
probes may sample up to ~pi/1024 outside the closed square.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._smoothstep import smoothstep_c4
from .errors import AdmissibilityError

PI = math.pi

FD_STEP = PI / 1024.0


@dataclass(frozen=True)
class PerturbationMap:
    """phi(x, y) = (x + f(x, y), y + g(x, y)) with analytic partials."""

    label: str
    f: Callable
    g: Callable
    f_x: Callable
    f_y: Callable
    g_x: Callable
    g_y: Callable
    f_xx: Callable
    f_xy: Callable
    f_yy: Callable
    g_xx: Callable
    g_xy: Callable
    g_yy: Callable

    def apply(self, x, y):
        """Image point(s) phi(x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return x + self.f(x, y), y + self.g(x, y)


@dataclass(frozen=True)
class JacobianData:
    """Pointwise Jacobian package: J = Dphi, det, A and M = A - I."""

    J: np.ndarray
    det: float
    A: np.ndarray
    M: np.ndarray


@dataclass(frozen=True)
class AdmissibilityMetrics:
    inf_det: float
    sup_det: float
    sup_one_minus_det: float
    w1inf_dist: float
    w2inf_dist: float
    kappa: float
    sample_density: int
    label: str


def jacobian_entries(pmap: PerturbationMap, x, y):
    """Jacobian entries j11, j12, j21, j22 and det at the given points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    j11 = 1.0 + pmap.f_x(x, y)
    j12 = pmap.f_y(x, y)
    j21 = pmap.g_x(x, y)
    j22 = 1.0 + pmap.g_y(x, y)
    det = j11 * j22 - j12 * j21
    return j11, j12, j21, j22, det


def jacobian_grid(pmap: PerturbationMap, x, y):
    """Batched A_phi and M_phi over arrays of points.

    Returns a dict with keys 'det', 'A' (..., 2, 2) and 'M' (..., 2, 2).
    Raises AdmissibilityError if any |det| falls below 1e-12.
    """
    j11, j12, j21, j22, det = jacobian_entries(pmap, x, y)
    absdet = np.abs(det)
    if absdet.size and absdet.min() < 1e-12:
        raise AdmissibilityError(
            f"map {pmap.label!r} is degenerate: min |det Dphi| = {absdet.min():.3e}"
        )
    J = np.stack(
        [np.stack([j11, j12], axis=-1), np.stack([j21, j22], axis=-1)], axis=-2
    )
    inv = np.linalg.inv(J)
    A = np.einsum("...ij,...kj->...ik", inv, inv) * absdet[..., None, None]
    M = A - np.eye(2)
    return {"det": det, "A": A, "M": M, "J": J}


def jacobian_at(pmap: PerturbationMap, point) -> JacobianData:
    """Jacobian data at a single point; errors on a singular Jacobian."""
    x, y = point
    data = jacobian_grid(pmap, np.asarray([x], dtype=float), np.asarray([y], dtype=float))
    return JacobianData(
        J=data["J"][0], det=float(data["det"][0]), A=data["A"][0], M=data["M"][0]
    )


def _m_entries(pmap, x, y):
    data = jacobian_grid(pmap, x, y)
    M = data["M"]
    return M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]


def divergence_rows_fd(pmap: PerturbationMap, x, y, h: float = FD_STEP):
    """(a_x + b_y, c_x + d_y) for M = [[a, b], [c, d]] by centered differences."""
    a_e, b_e, c_e, d_e = _m_entries(pmap, x + h, y)
    a_w, b_w, c_w, d_w = _m_entries(pmap, x - h, y)
    a_n, b_n, c_n, d_n = _m_entries(pmap, x, y + h)
    a_s, b_s, c_s, d_s = _m_entries(pmap, x, y - h)
    a_x = (a_e - a_w) / (2 * h)
    c_x = (c_e - c_w) / (2 * h)
    b_y = (b_n - b_s) / (2 * h)
    d_y = (d_n - d_s) / (2 * h)
    return a_x + b_y, c_x + d_y


def divergence_rows_analytic(pmap: PerturbationMap, x, y):
    """Same divergence rows via the chain rule on the 2x2 adjugate algebra.

    Used to cross-check the finite-difference route; requires the analytic
    second partials every shipped family provides.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    j11, j12, j21, j22, det = jacobian_entries(pmap, x, y)
    f_xx, f_xy, f_yy = pmap.f_xx(x, y), pmap.f_xy(x, y), pmap.f_yy(x, y)
    g_xx, g_xy, g_yy = pmap.g_xx(x, y), pmap.g_xy(x, y), pmap.g_yy(x, y)

    det_x = f_xx * j22 + j11 * g_xy - f_xy * j21 - j12 * g_xx
    det_y = f_xy * j22 + j11 * g_yy - f_yy * j21 - j12 * g_xy

    # A11 = (j22^2 + j12^2)/det, A12 = -(j22 j21 + j11 j12)/det,
    # A22 = (j11^2 + j21^2)/det  (orientation-preserving: det > 0)
    n11 = j22 * j22 + j12 * j12
    n12 = -(j22 * j21 + j11 * j12)
    n22 = j11 * j11 + j21 * j21

    a_x = (2 * j22 * g_xy + 2 * j12 * f_xy) / det - n11 * det_x / det**2
    b_y = (
        -(g_yy * j21 + j22 * g_xy + f_xy * j12 + j11 * f_yy) / det
        - n12 * det_y / det**2
    )
    c_x = (
        -(g_xy * j21 + j22 * g_xx + f_xx * j12 + j11 * f_xy) / det
        - n12 * det_x / det**2
    )
    d_y = (2 * j11 * f_xy + 2 * j21 * g_xy) / det - n22 * det_y / det**2
    return a_x + b_y, c_x + d_y


def admissibility_metrics(pmap: PerturbationMap, sample_density: int = 128):
    """Grid extrema of the map's deviation metrics (a lower bound on the sup).

    Sampled on an inclusive uniform sample_density x sample_density grid;
    kappa's divergence rows use centered differences with step pi/1024.
    """
    if sample_density < 16:
        raise ValueError("sample_density must be >= 16")
    axis = np.linspace(0.0, PI, sample_density)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    x = X.ravel()
    y = Y.ravel()

    j11, j12, j21, j22, det = jacobian_entries(pmap, x, y)
    if det.min() <= 0.0:
        raise AdmissibilityError(
            f"map {pmap.label!r} not admissible: min det Dphi = {det.min():.3e}"
        )

    disp = max(np.abs(pmap.f(x, y)).max(), np.abs(pmap.g(x, y)).max())
    first = max(
        np.abs(j11 - 1.0).max(),
        np.abs(j12).max(),
        np.abs(j21).max(),
        np.abs(j22 - 1.0).max(),
    )
    second = max(
        np.abs(pmap.f_xx(x, y)).max(),
        np.abs(pmap.f_xy(x, y)).max(),
        np.abs(pmap.f_yy(x, y)).max(),
        np.abs(pmap.g_xx(x, y)).max(),
        np.abs(pmap.g_xy(x, y)).max(),
        np.abs(pmap.g_yy(x, y)).max(),
    )
    w1 = max(disp, first)
    w2 = max(w1, second)

    a, b, c, d = _m_entries(pmap, x, y)
    row1, row2 = divergence_rows_fd(pmap, x, y)
    kappa = max(
        np.abs(a).max(),
        np.abs(b).max(),
        np.abs(c).max(),
        np.abs(d).max(),
        np.abs(row1).max(),
        np.abs(row2).max(),
    )

    return AdmissibilityMetrics(
        inf_det=float(det.min()),
        sup_det=float(det.max()),
        sup_one_minus_det=float(np.abs(1.0 - det).max()),
        w1inf_dist=float(w1),
        w2inf_dist=float(w2),
        kappa=float(kappa),
        sample_density=sample_density,
        label=pmap.label,
    )


def _const(value):
    def evaluate(x, y):
        return np.full_like(np.asarray(x, dtype=float), value)

    return evaluate


_ZERO = _const(0.0)


def family_identity() -> PerturbationMap:
    """The identity map: zero displacement, all partials zero."""
    return PerturbationMap(
        label="identity",
        f=_ZERO, g=_ZERO,
        f_x=_ZERO, f_y=_ZERO, g_x=_ZERO, g_y=_ZERO,
        f_xx=_ZERO, f_xy=_ZERO, f_yy=_ZERO,
        g_xx=_ZERO, g_xy=_ZERO, g_yy=_ZERO,
    )


def family_affine(a: float, b: float) -> PerturbationMap:
    """phi(x, y) = (a x, b y), mapping the square onto [0, pi a] x [0, pi b]."""
    if a <= 0 or b <= 0:
        raise ValueError("affine coefficients must be positive")

    def f(x, y):
        return (a - 1.0) * np.asarray(x, dtype=float)

    def g(x, y):
        return (b - 1.0) * np.asarray(y, dtype=float)

    return PerturbationMap(
        label=f"affine(a={a:g},b={b:g})",
        f=f, g=g,
        f_x=_const(a - 1.0), f_y=_ZERO, g_x=_ZERO, g_y=_const(b - 1.0),
        f_xx=_ZERO, f_xy=_ZERO, f_yy=_ZERO,
        g_xx=_ZERO, g_xy=_ZERO, g_yy=_ZERO,
    )


def family_conformal_quadratic(eps: float) -> PerturbationMap:
    """phi(z) = z + eps z^2 as a map of the plane: f = eps(x^2 - y^2), g = 2 eps xy."""
    if abs(eps) >= 1.0 / (4.0 * PI):
        raise ValueError(f"|eps| must be < 1/(4 pi) ~ {1/(4*PI):.4f} for injectivity")

    e = float(eps)

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return e * (x * x - y * y)

    def g(x, y):
        return 2.0 * e * np.asarray(x, dtype=float) * np.asarray(y, dtype=float)

    def f_x(x, y):
        return 2.0 * e * np.asarray(x, dtype=float) + 0.0 * np.asarray(y, dtype=float)

    def f_y(x, y):
        return -2.0 * e * np.asarray(y, dtype=float) + 0.0 * np.asarray(x, dtype=float)

    def g_x(x, y):
        return 2.0 * e * np.asarray(y, dtype=float) + 0.0 * np.asarray(x, dtype=float)

    def g_y(x, y):
        return 2.0 * e * np.asarray(x, dtype=float) + 0.0 * np.asarray(y, dtype=float)

    return PerturbationMap(
        label=f"conformal(eps={eps:g})",
        f=f, g=g,
        f_x=f_x, f_y=f_y, g_x=g_x, g_y=g_y,
        f_xx=_const(2.0 * e), f_xy=_ZERO, f_yy=_const(-2.0 * e),
        g_xx=_ZERO, g_xy=_const(2.0 * e), g_yy=_ZERO,
    )


# taper geometry for the bump family: zero outside [m0, pi-m0], one on
# [m1, pi-m1], smooth ramps in between; ramps kept wide so the composed
# eigenfunctions stay well inside the resolved sine band at M ~ 16
_BUMP_SUPPORT_MARGIN = 0.20
_BUMP_FLAT_MARGIN = 1.20


def _taper(u):
    """1D taper t(u) with values (t, t', t'').

    C^4 ramps: composed eigenfunctions keep fast-decaying sine tails, which
    the spectral Galerkin solves downstream rely on.
    """
    m0, m1 = _BUMP_SUPPORT_MARGIN, _BUMP_FLAT_MARGIN
    w = m1 - m0
    u = np.asarray(u, dtype=float)
    s_lo, ds_lo, dds_lo = smoothstep_c4((u - m0) / w)
    s_hi, ds_hi, dds_hi = smoothstep_c4((PI - m0 - u) / w)
    t = s_lo * s_hi
    dt = ds_lo / w * s_hi - s_lo * ds_hi / w
    ddt = dds_lo / w**2 * s_hi - 2.0 * ds_lo * ds_hi / w**2 + s_lo * dds_hi / w**2
    return t, dt, ddt


def family_bump(eps: float, center=(PI / 2.0, PI / 2.0), width: float = 0.8):
    """Interior Gaussian bump displacement f = g = eps * G * taper.

    G is a Gaussian of the given width centered at ``center``; the taper is
    1 on the flat interior (including the center, so the displacement peaks
    at exactly eps there) and drops smoothly to 0 before the boundary, so
    the map fixes a neighborhood of the boundary of the square.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    cx, cy = float(center[0]), float(center[1])
    flat = _BUMP_FLAT_MARGIN
    if not (flat <= cx <= PI - flat and flat <= cy <= PI - flat):
        raise ValueError("bump center must lie in the flat interior of the taper")
    e = float(eps)
    w2 = width * width

    def parts(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        G = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / w2)
        Gx = -2.0 * (x - cx) / w2 * G
        Gy = -2.0 * (y - cy) / w2 * G
        Gxx = (-2.0 / w2 + 4.0 * (x - cx) ** 2 / w2**2) * G
        Gyy = (-2.0 / w2 + 4.0 * (y - cy) ** 2 / w2**2) * G
        Gxy = 4.0 * (x - cx) * (y - cy) / w2**2 * G
        tx, dtx, ddtx = _taper(x)
        ty, dty, ddty = _taper(y)
        return G, Gx, Gy, Gxx, Gxy, Gyy, tx, dtx, ddtx, ty, dty, ddty

    def f(x, y):
        G, *_rest = parts(x, y)
        tx = _rest[5]
        ty = _rest[8]
        return e * G * tx * ty

    def f_x(x, y):
        G, Gx, Gy, Gxx, Gxy, Gyy, tx, dtx, ddtx, ty, dty, ddty = parts(x, y)
        return e * (Gx * tx + G * dtx) * ty

    def f_y(x, y):
        G, Gx, Gy, Gxx, Gxy, Gyy, tx, dtx, ddtx, ty, dty, ddty = parts(x, y)
        return e * tx * (Gy * ty + G * dty)

    def f_xx(x, y):
        G, Gx, Gy, Gxx, Gxy, Gyy, tx, dtx, ddtx, ty, dty, ddty = parts(x, y)
        return e * (Gxx * tx + 2.0 * Gx * dtx + G * ddtx) * ty

    def f_yy(x, y):
        G, Gx, Gy, Gxx, Gxy, Gyy, tx, dtx, ddtx, ty, dty, ddty = parts(x, y)
        return e * tx * (Gyy * ty + 2.0 * Gy * dty + G * ddty)

    def f_xy(x, y):
        G, Gx, Gy, Gxx, Gxy, Gyy, tx, dtx, ddtx, ty, dty, ddty = parts(x, y)
        return e * (Gxy * tx * ty + Gx * tx * dty + Gy * dtx * ty + G * dtx * dty)

    pmap = PerturbationMap(
        label=f"bump(eps={eps:g},cx={cx:g},cy={cy:g},w={width:g})",
        f=f, g=f,
        f_x=f_x, f_y=f_y, g_x=f_x, g_y=f_y,
        f_xx=f_xx, f_xy=f_xy, f_yy=f_yy,
        g_xx=f_xx, g_xy=f_xy, g_yy=f_yy,
    )
    # admissibility guard: the determinant must stay positive
    axis = np.linspace(0.0, PI, 48)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    _, _, _, _, det = jacobian_entries(pmap, X.ravel(), Y.ravel())
    if det.min() <= 0.0:
        raise AdmissibilityError(
            f"bump eps={eps:g} too large: min det Dphi = {det.min():.3e}"
        )
    return pmap
