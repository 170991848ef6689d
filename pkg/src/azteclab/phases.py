"""Phase classification, arctic curves and the critical-point map.

A global coordinate (chi, eta) in (-1,1)^2 is classified by the location of
the two distinguished roots of the critical polynomial: both on the positive
axis (frozen), a conjugate non-real pair or a pair on a gap cut (rough), or
four roots on one closed band (smooth).  The boundary curves are parametrized
by the logarithmic derivative of the leading eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegreeCollapse, NotRough, NotStandardModel, UnclassifiablePoint
from .model import WeightSpec
from .spectral import SpectralData, log_derivative_rho1, p0_sqrt

BOUNDARY_TOL = 1e-6


def critical_polynomial(sd: SpectralData, chi: float, eta: float) -> np.ndarray:
    """P(z; chi, eta), the degree-2k' polynomial of projected critical points."""
    if not (-1 < chi < 1 and -1 < eta < 1):
        raise ValueError(f"(chi, eta) = ({chi}, {eta}) outside (-1,1)^2")
    k = sd.k
    p0_over_z = sd.p0[1:]  # p0(0) = 0 with a simple root
    lin = np.array([-(eta + 1.0), eta - 1.0])
    A = k * k * npoly.polymul(p0_over_z, npoly.polymul(lin, lin))
    B = 4.0 * chi * chi * npoly.polymul(np.array([0.0, 1.0]),
                                        npoly.polymul(sd.log_deriv_num, sd.log_deriv_num))
    P = npoly.polysub(A, B)
    P = npoly.polytrim(P, tol=0.0)
    if len(P) - 1 != 2 * sd.k_prime:
        raise DegreeCollapse(
            f"critical polynomial degree {len(P) - 1} != 2k' = {2 * sd.k_prime}")
    return P


@dataclass(frozen=True)
class PhasePoint:
    chi: float
    eta: float
    label: str                 # "frozen" | "rough" | "smooth" | boundary labels
    component: int | None      # ell for smooth / boundary_rs
    critical_roots: np.ndarray
    z1: complex | None         # rough only: distinguished critical point

    @property
    def is_rough(self) -> bool:
        return self.label == "rough"

    @property
    def is_smooth(self) -> bool:
        return self.label == "smooth"


def _band_of(sd: SpectralData, t: float, tol: float) -> int | None:
    for ell, (lo, hi) in enumerate(sd.bands, start=1):
        if lo - tol <= t <= hi + tol:
            return ell
    return None


def _in_gap(sd: SpectralData, t: float, tol: float) -> bool:
    if t <= sd.unbounded_cut_end - tol:
        return True
    return any(lo + tol < t < hi - tol for lo, hi in sd.cuts)


def classify(sd: SpectralData, chi: float, eta: float) -> PhasePoint:
    """Phase label of a global coordinate by critical-root accounting."""
    P = critical_polynomial(sd, chi, eta)
    roots = npoly.polyroots(P)
    scale = 1.0 + float(np.max(np.abs(roots)))
    tol = BOUNDARY_TOL * scale

    real = roots[np.abs(roots.imag) <= tol]
    complex_roots = roots[np.abs(roots.imag) > tol]

    # the 2k'-2 band roots; everything left over decides the label
    band_budget = {ell: 2 for ell in range(1, sd.k_prime)}
    extras = list(complex_roots)
    band_extras: dict = {}
    for r in sorted(real.real):
        ell = _band_of(sd, r, tol)
        if ell is not None and band_budget.get(ell, 0) > 0:
            band_budget[ell] -= 1
            continue
        if ell is not None:
            band_extras.setdefault(ell, []).append(r)
            continue
        extras.append(complex(r))
    if any(v > 0 for v in band_budget.values()):
        # not enough band roots: the "extra" pair coalesced onto a band edge
        missing = [ell for ell, v in band_budget.items() if v > 0]
        raise UnclassifiablePoint(
            f"band root accounting failed at ({chi},{eta}): missing {missing}")

    for ell, rs in band_extras.items():
        if len(rs) == 2:
            if abs(rs[0] - rs[1]) <= BOUNDARY_TOL * scale:
                return PhasePoint(chi, eta, "boundary_rs", ell, roots, None)
            return PhasePoint(chi, eta, "smooth", ell, roots, None)

    pair = [complex(z) for z in extras]
    if len(pair) != 2:
        raise UnclassifiablePoint(
            f"expected a distinguished root pair at ({chi},{eta}), got {pair}")
    a, b = pair
    if abs(a.imag) > tol or abs(b.imag) > tol:
        z1 = a if a.imag > 0 else b
        return PhasePoint(chi, eta, "rough", None, roots, complex(z1))
    ar, br = sorted((a.real, b.real))
    if ar > 0 and br > 0:
        if abs(ar - br) <= BOUNDARY_TOL * scale:
            return PhasePoint(chi, eta, "boundary_fr", None, roots, None)
        return PhasePoint(chi, eta, "frozen", None, roots, None)
    if _in_gap(sd, ar, tol) and _in_gap(sd, br, tol):
        # real critical points on a gap cut: non-real on the surface (rough)
        if abs(ar - br) > BOUNDARY_TOL * scale:
            raise UnclassifiablePoint(
                f"two distinct gap roots at ({chi},{eta}): {ar}, {br}")
        return PhasePoint(chi, eta, "rough", None, roots,
                          complex(0.5 * (ar + br)))
    raise UnclassifiablePoint(
        f"cannot place root pair ({a}, {b}) at ({chi},{eta})")


def f_prime(spec: WeightSpec, sd: SpectralData, sheet: int, chi: float, eta: float, z):
    """Derivative of the action on the given sheet (1 or 2)."""
    z = np.asarray(z, dtype=complex)
    k = sd.k
    ld = log_derivative_rho1(spec, sd, z)
    if sheet == 2:
        ld = -ld
    return 0.25 * k * (eta + 1.0) / z - 0.5 * k / (z - 1.0) - 0.5 * chi * ld


def l_map(spec: WeightSpec, sd: SpectralData, chi: float, eta: float):
    """The critical point of the rough region: (z1, sheet).

    Sheet 1 representatives have Im z1 >= 0, sheet 2 ones Im z1 <= 0 (so the
    arc from conj(z1) to z1 runs downward); on a gap cut the representative is
    the limit from the correct side.
    """
    pp = classify(sd, chi, eta)
    if not pp.is_rough:
        raise NotRough(f"({chi},{eta}) is {pp.label}, not rough")
    z = pp.z1
    if abs(z.imag) < 1e-12:
        # real critical point on a gap cut: both actions degenerate there;
        # the sheet follows the sign of chi
        sheet = 1 if chi > 0 else 2
        z1 = complex(z.real, 1e-14 if sheet == 1 else -1e-14)
        return z1, sheet
    zu = complex(z.real, abs(z.imag))
    f1 = abs(complex(f_prime(spec, sd, 1, chi, eta, zu)))
    f2 = abs(complex(f_prime(spec, sd, 2, chi, eta, zu)))
    if f1 <= f2:
        return zu, 1
    return np.conj(zu), 2


def special_points(sd: SpectralData) -> dict:
    """The labeled limit points A_ell, B1, B2, C_pm of the arctic curves."""
    out = {"B1": (0.0, -1.0), "B2": (0.0, 1.0)}
    p = sd.p
    dp = npoly.polyder(p)
    slope = float(npoly.polyval(1.0, dp) / npoly.polyval(1.0, p))
    eta_c = 2.0 * slope / sd.k - 1.0
    out["C+"] = (1.0, eta_c)
    out["C-"] = (-1.0, eta_c)
    for ell, x in enumerate(sd.roots_x[1:], start=1):
        out[f"A{ell}"] = (0.0, (x + 1.0) / (x - 1.0))
    return out


def _g_and_deriv(spec: WeightSpec, sd: SpectralData, z):
    """G(z) = z rho1'/rho1 and G'(z) through the polynomial quotient."""
    z = np.asarray(z, dtype=complex)
    num = npoly.polyval(z, sd.log_deriv_num)
    dnum = npoly.polyval(z, npoly.polyder(sd.log_deriv_num))
    w = p0_sqrt(sd, z)
    dp0 = npoly.polyval(z, npoly.polyder(sd.p0))
    A = z * num
    dA = num + z * dnum
    B = (z - 1.0) * w
    dB = w + (z - 1.0) * dp0 / (2.0 * w)
    G = A / B
    dG = (dA * B - A * dB) / (B * B)
    return G, dG


def curve_point(spec: WeightSpec, sd: SpectralData, z: float):
    """(chi(z), eta(z)) of the arctic-curve parametrization (plus branch)."""
    G, dG = _g_and_deriv(spec, sd, complex(z))
    k = sd.k
    chi = k / ((z - 1.0) ** 2 * dG)
    eta = ((2.0 * G) / ((z - 1.0) * dG) + z + 1.0) / (z - 1.0)
    return complex(chi).real, complex(eta).real


@dataclass(frozen=True)
class ArcticCurves:
    frozen_boundary: np.ndarray          # closed polyline, shape (n, 2)
    smooth_boundaries: tuple             # one closed polyline per band
    points: dict                         # labeled special points


def arctic_curves(spec: WeightSpec, sd: SpectralData,
                  samples_per_curve: int = 256) -> ArcticCurves:
    """Sampled arctic curves: the frozen boundary and every smooth boundary."""
    if not spec.standard:
        raise NotStandardModel("arctic curves require the standard model")
    if samples_per_curve < 16:
        raise ValueError("need at least 16 samples per curve")
    pts = special_points(sd)

    # frozen boundary: z = t/(1-t) sweeps [0, inf); the parametrization is
    # evaluated away from z = 1 and the Taylor-limit points C_pm, B1, B2 are
    # inserted exactly, which also closes the polyline.
    ts = np.linspace(0.0, 1.0, samples_per_curve + 1)[1:-1]
    seg1 = [pts["B1"]] + [curve_point(spec, sd, t / (1 - t))
                          for t in ts if t / (1 - t) < 1 - 5e-3] + [pts["C+"]]
    seg2 = [curve_point(spec, sd, t / (1 - t))
            for t in ts if t / (1 - t) > 1 + 5e-3] + [pts["B2"]]
    plus_branch = seg1 + seg2
    minus_branch = [(-c, e) for (c, e) in plus_branch[::-1]]
    frozen = np.array(plus_branch + minus_branch[1:-1] + [plus_branch[0]])

    smooth = []
    for ell, (lo, hi) in enumerate(sd.bands, start=1):
        a_lo = (0.0, (lo + 1.0) / (lo - 1.0))
        a_hi = (0.0, (hi + 1.0) / (hi - 1.0))
        pad = (hi - lo) * 1e-4
        zs = np.linspace(lo + pad, hi - pad, samples_per_curve)
        branch = [a_lo] + [curve_point(spec, sd, z) for z in zs] + [a_hi]
        minus = [(-c, e) for (c, e) in branch[::-1]]
        smooth.append(np.array(branch + minus[1:-1] + [branch[0]]))
    return ArcticCurves(frozen_boundary=frozen, smooth_boundaries=tuple(smooth),
                        points=pts)


def smooth_component_count(sd: SpectralData) -> int:
    """Number of connected components of the smooth region: k' - 1."""
    return sd.k_prime - 1


def classify_grid(spec: WeightSpec, sd: SpectralData, n: int = 400):
    """Labels on an n x n grid of (-1,1)^2; returns (chis, etas, labels)."""
    chis = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    etas = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    codes = {"frozen": 0, "rough": 1, "smooth": 2, "boundary_fr": 3, "boundary_rs": 4}
    out = np.empty((n, n), dtype=np.int8)
    for i, chi in enumerate(chis):
        for j, eta in enumerate(etas):
            pp = classify(sd, chi, eta)
            code = codes[pp.label]
            if pp.label == "smooth":
                code = 10 + pp.component
            out[i, j] = code
    return chis, etas, out


def count_smooth_components_on_grid(labels: np.ndarray) -> int:
    """Flood-fill count of connected smooth components (4-neighborhood)."""
    smooth = labels >= 10
    seen = np.zeros_like(smooth, dtype=bool)
    n, m = smooth.shape
    comps = 0
    for i in range(n):
        for j in range(m):
            if smooth[i, j] and not seen[i, j]:
                comps += 1
                stack = [(i, j)]
                seen[i, j] = True
                while stack:
                    a, b = stack.pop()
                    for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        aa, bb = a + da, b + db
                        if 0 <= aa < n and 0 <= bb < m and smooth[aa, bb] \
                                and not seen[aa, bb]:
                            seen[aa, bb] = True
                            stack.append((aa, bb))
    return comps
