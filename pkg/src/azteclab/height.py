"""Limiting expected height function and the complex Burgers' equation checks.

Smooth regions take a closed form linear in the global coordinates; rough
regions integrate the derivative of the action along an arc between the two
conjugate critical points.  The winding-number helper realizes the argument
principle identities used by the height development.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import (
    NeighborhoodLeavesRough,
    NonIntegerWinding,
    NotRough,
    UnsupportedRegion,
)
from .kernels import Contour, arc_through, circle, contour_integrate
from .model import WeightSpec
from .spectral import SpectralData, log_derivative_rho1, rho_pair
from .phases import classify, f_prime, l_map


def smooth_level_count(sd: SpectralData, ell: int) -> int:
    """n_ell: half the number of discriminant roots >= x_{2 ell - 1}."""
    x = sd.roots_x[2 * ell - 1]
    tol = 1e-9 * (1.0 + abs(x))
    cnt = int(np.sum(sd.roots_s >= x - tol))
    if cnt % 2 != 0:
        raise ValueError(f"odd root count {cnt} above band edge {x}")
    return cnt // 2


def height_limit(spec: WeightSpec, sd: SpectralData, chi: float, eta: float,
                 tol: float = 1e-9) -> float:
    """Limit of the rescaled expected height at (chi, eta).

    Smooth component ell: -(eta-1)/2 + (chi/k)(n_ell - k).  Rough with
    chi >= 0: the arc integral of the first-sheet action derivative from
    conj(z1) up to the upper-half-plane critical point z1.  Rough with
    chi < 0 uses the reflection h(chi) = -(eta-1) - h(-chi) (the published
    formula covers chi > 0 only; the reflected complement matches Monte
    Carlo and is continuous against the smooth closed form).
    """
    pp = classify(sd, chi, eta)
    if pp.label in ("frozen", "boundary_fr"):
        raise UnsupportedRegion(f"({chi},{eta}) is {pp.label}")
    k = sd.k
    if pp.label in ("smooth", "boundary_rs"):
        n_ell = smooth_level_count(sd, pp.component)
        return -0.5 * (eta - 1.0) + (chi / k) * (n_ell - k)

    if chi < 0:
        return -(eta - 1.0) - height_limit(spec, sd, -chi, eta, tol=tol)

    z = pp.z1
    z1 = complex(z.real, abs(z.imag)) if abs(z.imag) > 1e-12 \
        else complex(z.real, 1e-13)
    x_r = max(2.0, 1.0 + 0.75 * abs(z1 - 1.0))
    arc = arc_through(z1, x_r)

    def integrand(w):
        return f_prime(spec, sd, 1, chi, eta, w)

    val, _, _ = contour_integrate(integrand, arc, tol=tol, M0=64)
    h = complex(val) / (1j * math.pi * k) * (-1.0)
    if abs(h.imag) > 1e-7:
        raise ArithmeticError(f"rough height came out non-real: {h}")
    return h.real


def height_gradient(spec: WeightSpec, sd: SpectralData, chi: float, eta: float):
    """Gradient (d/dx, d/dy) of the limit height in (x, y) = (chi/k, eta/2).

    For chi >= 0 this is (arg f, -arg g)/pi with g the upper-half-plane
    critical point and f the leading eigenvalue there; chi < 0 follows from
    the reflection rule of height_limit.
    """
    if chi < 0:
        du, dv = height_gradient(spec, sd, -chi, eta)
        return (du, -2.0 - dv)
    pp = classify(sd, chi, eta)
    if not pp.is_rough:
        raise NotRough(f"({chi},{eta}) is {pp.label}")
    z = pp.z1
    z1 = complex(z.real, abs(z.imag)) if abs(z.imag) > 1e-12 \
        else complex(z.real, 1e-13)
    r1, _ = rho_pair(spec, sd, z1)
    return (cmath.phase(complex(r1)) / math.pi, -cmath.phase(z1) / math.pi)


def burgers_residual(spec: WeightSpec, sd: SpectralData, chi: float, eta: float,
                     step: float = 1e-3) -> float:
    """|f dg/dx + g df/dy| by centered differences in (x, y) = (chi/k, eta/2).

    f and g are the leading eigenvalue and the upper-half-plane critical
    point; the Burgers' equation is the chi > 0 statement.
    """
    k = sd.k

    def fg(chi_, eta_):
        pp = classify(sd, chi_, eta_)
        if not pp.is_rough:
            raise NeighborhoodLeavesRough(
                f"stencil point ({chi_},{eta_}) is {pp.label}")
        z = pp.z1
        z1 = complex(z.real, abs(z.imag)) if abs(z.imag) > 1e-12 \
            else complex(z.real, 1e-13)
        r1, _ = rho_pair(spec, sd, z1)
        return complex(r1), complex(z1)

    dchi = k * step      # dx = dchi / k
    deta = 2.0 * step    # dy = deta / 2
    f0, g0 = fg(chi, eta)
    _, g_xp = fg(chi + dchi, eta)
    _, g_xm = fg(chi - dchi, eta)
    f_yp, _ = fg(chi, eta + deta)
    f_ym, _ = fg(chi, eta - deta)
    gx = (g_xp - g_xm) / (2.0 * step)
    fy = (f_yp - f_ym) / (2.0 * step)
    return abs(f0 * gx + g0 * fy)


def winding_number(spec: WeightSpec, sd: SpectralData, c: Contour,
                   tol: float = 1e-6) -> int:
    """Winding of rho1 along a closed contour, via the argument principle."""
    def integrand(z):
        return log_derivative_rho1(spec, sd, z)

    val, _, _ = contour_integrate(integrand, c, tol=tol, M0=64)
    w = complex(val) / (2j * math.pi)
    nearest = round(w.real)
    if abs(w - nearest) > 0.01:
        raise NonIntegerWinding(f"winding estimate {w} not within 0.01 of an integer")
    return int(nearest)


def cut_contour(sd: SpectralData, idx: int, pad: float = 0.25) -> Contour:
    """A circle tightly enclosing the idx-th finite gap cut (0-based)."""
    lo, hi = sd.cuts[idx]
    span = max(hi - lo, 0.05)
    return circle(0.5 * (lo + hi), 0.5 * span + pad * span)
