"""Contour quadrature and the three correlation-kernel evaluators.

The finite-size kernel is the double contour integral of the exact finite-N
theorem; the smooth and rough kernels are its interior limits.  All contours
are circles or circular arcs; closed circles use the (spectrally accurate)
trapezoidal rule, open arcs use trapezoid sums accelerated by Richardson
extrapolation.  Matrix powers of the symbol are always evaluated through the
eigen-decomposition with magnitude/phase-separated scalar factors so that
sizes up to N = 64 stay inside double-precision range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, NoConvergence, NoSmoothRegion, NotRough, OddN
from .model import WeightSpec
from .spectral import SpectralData, p0_sqrt, projectors, rho_pair

M_CAP = 2 ** 16
DEFAULT_TOL_FINITE = 1e-8
DEFAULT_TOL_LIMIT = 1e-9


# ---------------------------------------------------------------------------
# Contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Contour:
    """A quadrature contour: closed circle, circular arc, or polyline.

    For arcs the sweep runs from angle0 to angle1 (radians, either order);
    orientation of circles is +1 for counterclockwise.
    """

    kind: str
    center: complex = 0.0
    radius: float = 1.0
    angle0: float = 0.0
    angle1: float = 0.0
    points: tuple = field(default=())
    orientation: int = 1

    def nodes(self, M: int):
        """Quadrature nodes and weights; sum(f(z) * w) approximates the integral."""
        if self.kind == "circle":
            t = 2.0 * math.pi * np.arange(M) / M
            e = np.exp(1j * t)
            z = self.center + self.radius * e
            w = self.orientation * (2j * math.pi / M) * self.radius * e
            return z, w
        if self.kind == "arc":
            t = np.linspace(self.angle0, self.angle1, M + 1)
            e = np.exp(1j * t)
            z = self.center + self.radius * e
            dz = 1j * (self.angle1 - self.angle0) / M * self.radius * e
            w = dz.copy()
            w[0] *= 0.5
            w[-1] *= 0.5
            return z, w
        if self.kind == "polyline":
            pts = np.asarray(self.points, dtype=complex)
            segs = len(pts) - 1
            per = max(2, M // segs)
            zs, ws = [], []
            for a, b in zip(pts[:-1], pts[1:]):
                t = np.linspace(0.0, 1.0, per + 1)
                z = a + (b - a) * t
                w = np.full(per + 1, (b - a) / per, dtype=complex)
                w[0] *= 0.5
                w[-1] *= 0.5
                zs.append(z)
                ws.append(w)
            return np.concatenate(zs), np.concatenate(ws)
        raise ValueError(f"unknown contour kind {self.kind!r}")

    @property
    def closed(self) -> bool:
        return self.kind == "circle"


def circle(center, radius, orientation=1) -> Contour:
    return Contour(kind="circle", center=complex(center), radius=float(radius),
                   orientation=orientation)


def arc_through(z1: complex, x_r: float) -> Contour:
    """Circular arc from conj(z1) to z1 crossing the real axis at x_r > 1.

    The center is real by symmetry.  The sweep direction follows the sign of
    Im z1, so for Im z1 < 0 the arc runs from the upper half plane downwards.
    """
    z1 = complex(z1)
    if abs(z1.imag) < 1e-14:
        z1 = complex(z1.real, math.copysign(1e-12, z1.imag if z1.imag != 0 else 1.0))
    c = (abs(z1) ** 2 - x_r ** 2) / (2.0 * (z1.real - x_r))
    r = abs(x_r - c)
    th1 = math.atan2(z1.imag, z1.real - c)
    return Contour(kind="arc", center=c, radius=r, angle0=-th1, angle1=th1)


def contour_integrate(f, c: Contour, tol: float = 1e-9, M0: int = 32, cap: int = M_CAP):
    """Integrate a (possibly matrix-valued) function along a contour.

    ``f`` receives an array of points and must return an array whose leading
    axis matches.  The node count doubles until two successive estimates agree
    within ``tol``; open arcs additionally use Richardson extrapolation of the
    trapezoid values.  Returns (value, error_estimate, M).
    """
    M = max(8, M0)
    prev = None
    history = []
    while M <= cap:
        z, w = c.nodes(M)
        vals = np.asarray(f(z))
        est = np.tensordot(w, vals, axes=(0, 0))
        history.append(est)
        if not c.closed and len(history) >= 2:
            # Romberg acceleration of the trapezoid ladder.
            row = list(history)
            for j in range(1, len(row)):
                fac = 4.0 ** j
                row = [(fac * row[i + 1] - row[i]) / (fac - 1.0) for i in range(len(row) - 1)]
            est = row[0]
        if prev is not None:
            err = float(np.max(np.abs(est - prev)))
            if err < tol:
                return est, err, M
        prev = est
        M *= 2
    raise NoConvergence(f"contour integral did not reach tol={tol} below {cap} nodes")


# ---------------------------------------------------------------------------
# Balanced evaluation helpers
# ---------------------------------------------------------------------------

def _unit(v: np.ndarray) -> np.ndarray:
    a = np.abs(v)
    return np.where(a == 0, 1.0, v / np.where(a == 0, 1.0, a))


def _log_mag(v: np.ndarray) -> np.ndarray:
    a = np.abs(v)
    return np.log(np.where(a == 0, 1e-300, a))


@dataclass
class KernelBlock:
    """A 2x2 block of kernel values with its index metadata and error estimate."""

    values: np.ndarray
    indices: tuple
    error: float
    nodes: int = 0

    def __getitem__(self, ij):
        return self.values[ij]

    def as_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "values": [[[v.real, v.imag] for v in row] for row in self.values],
            "error": self.error,
            "nodes": self.nodes,
        }


def _eigen_tables(spec: WeightSpec, sd: SpectralData, z: np.ndarray):
    """rho values, unit phases, log magnitudes and projectors on node arrays."""
    r1, r2 = rho_pair(spec, sd, z)
    P1, P2 = projectors(spec, sd, z)
    return r1, r2, P1, P2


def phi_power(spec: WeightSpec, sd: SpectralData, z: np.ndarray, n: int) -> np.ndarray:
    """Phi(z)^n via rho1^n P1 + rho2^n P2 (pointwise, any integer n)."""
    r1, r2, P1, P2 = _eigen_tables(spec, sd, z)
    a1 = (r1 ** n)[..., None, None]
    a2 = (r2 ** n)[..., None, None]
    return a1 * P1 + a2 * P2


# ---------------------------------------------------------------------------
# Finite-size kernel
# ---------------------------------------------------------------------------

def _finite_kernel_once(spec, sd, N, m, xi, mp, xip, Mw, Mz, g1: Contour, g01: Contour,
                        chunk: int = 512):
    k = spec.k
    kN2 = k * N // 2

    # -- single-integral term (only when m > m')
    term1 = np.zeros((2, 2), dtype=complex)
    if m > mp:
        z, wt = g01.nodes(Mz)
        vals = phi_power(spec, sd, z, m - mp) * (z ** (xip - xi - 1))[:, None, None]
        term1 = np.tensordot(wt, vals, axes=(0, 0)) / (2j * math.pi)

    # -- double-integral term
    z, wtz = g01.nodes(Mz)
    w, wtw = g1.nodes(Mw)

    r1z, r2z, P1z, P2z = _eigen_tables(spec, sd, z)
    r1w, _, P1w, _ = _eigen_tables(spec, sd, w)

    # scalar factors, kept as (log magnitude, unit phase) pairs
    pz = m - N // 2
    pw = N // 2 - mp
    one_z = 1.0 - 1.0 / z
    one_w = 1.0 - 1.0 / w

    Lw = xip * _log_mag(w) + pw * _log_mag(r1w) - kN2 * _log_mag(one_w)
    Uw = _unit(w) ** xip * _unit(r1w) ** pw * _unit(one_w) ** (-kN2)
    Lz1 = (-xi - 1) * _log_mag(z) + kN2 * _log_mag(one_z) + pz * _log_mag(r1z)
    Lz2 = (-xi - 1) * _log_mag(z) + kN2 * _log_mag(one_z) - pz * _log_mag(r1z)
    Uz_base = _unit(z) ** (-xi - 1) * _unit(one_z) ** kN2
    Uz1 = Uz_base * _unit(r1z) ** pz
    Uz2 = Uz_base * _unit(r2z) ** pz

    shift = float(np.median(Lw))
    sw = np.exp(Lw - shift) * Uw * wtw
    sz1 = np.exp(Lz1 + shift) * Uz1
    sz2 = np.exp(Lz2 + shift) * Uz2
    Zmat = (sz1 * wtz)[:, None, None] * P1z + (sz2 * wtz)[:, None, None] * P2z

    acc = np.zeros((2, 2), dtype=complex)
    for a0 in range(0, Mw, chunk):
        a1 = min(a0 + chunk, Mw)
        C = 1.0 / (z[None, :] - w[a0:a1, None])
        inner = np.einsum("wz,zij->wij", C, Zmat)
        acc += np.einsum("w,wij,wjl->il", sw[a0:a1], P1w[a0:a1], inner)
    term2 = acc / (2j * math.pi) ** 2

    # The displayed 2x2 block carries the sub-height of the *second* kernel
    # argument on its row index (block-Toeplitz convention), so the matrix
    # product above is the transpose of [K(..,2xi+i; ..,2xi'+j)]_{ij}.
    return (-term1 + term2).T


def finite_kernel(spec: WeightSpec, N: int, m: int, xi: int, mp: int, xip: int,
                  tol: float = DEFAULT_TOL_FINITE, r1: float | None = None,
                  R: float | None = None, M0: int = 64, cap: int = 2 ** 13,
                  sd: SpectralData | None = None) -> KernelBlock:
    """The exact finite-size kernel block [K(2km, 2xi+i; 2km', 2xi'+j)]_{i,j}.

    Contours are gamma_1 = circle(1, r1) (w variable) and gamma_{0,1} =
    circle(0, R) with R > 1 + r1 (z variable).  Node counts double until the
    block changes by less than ``tol``.
    """
    if N % 2 != 0:
        raise OddN(f"N must be even, got {N}")
    k = spec.k
    kN2 = k * N // 2
    for (mm, xx) in ((m, xi), (mp, xip)):
        if not (0 < mm < N) or not (-kN2 <= xx <= -1):
            raise IndexOutOfRange(f"(m={mm}, xi={xx}) outside 0<m<{N}, -{kN2}<=xi<=-1")

    if sd is None:
        sd = _spectral_for_kernel(spec)
    if r1 is None or R is None:
        r1d, Rd = _default_radii(sd)
        if spec.standard and N >= 8:
            r1d, Rd = _adapted_radii(spec, sd, N, m, xi, mp, xip, r1d, Rd)
        r1 = r1 if r1 is not None else r1d
        R = R if R is not None else Rd
    if R <= 1.0 + r1:
        raise ValueError(f"need R > 1 + r1, got R={R}, r1={r1}")
    g1 = circle(1.0, r1)
    g01 = circle(0.0, R)

    M = M0
    prev = None
    while M <= cap:
        est = _finite_kernel_once(spec, sd, N, m, xi, mp, xip, M, M, g1, g01)
        if prev is not None:
            err = float(np.max(np.abs(est - prev)))
            if err < tol:
                return KernelBlock(values=est, indices=(m, xi, mp, xip), error=err, nodes=M)
        prev = est
        M *= 2
    raise NoConvergence(f"finite kernel did not converge below {cap} nodes")


def _spectral_for_kernel(spec: WeightSpec) -> SpectralData:
    from .spectral import discriminant, spectral_factorization

    if spec.standard:
        return discriminant(spec)
    return spectral_factorization(spec, strict=False)


def _default_radii(sd: SpectralData) -> tuple:
    """Contour radii that stay clear of 0, 1 and every branch point."""
    r1 = 0.4
    R = 2.5
    xs = [x for x in sd.roots_x if x < 0]
    # keep the outer circle's negative-axis crossing away from branch points
    while any(abs(R + x) < 5e-2 for x in xs) or abs(R - 1.0) < 0.5:
        R *= 1.07
    return r1, R


def _adapted_radii(spec, sd, N, m, xi, mp, xip, r1, R) -> tuple:
    """Pull the circles towards the critical point of the block's indices.

    At large N the integrand's modulus varies like exp(N * action); circles
    passing near the critical point keep its oscillation range representable.
    """
    from .phases import classify

    k = spec.k
    chi = (m + mp) / N - 1.0
    eta = 2.0 * (xi + xip) / (k * N) + 1.0
    chi = min(max(chi, -0.999), 0.999)
    eta = min(max(eta, -0.999), 0.999)
    try:
        pp = classify(sd, chi, eta)
    except Exception:
        return r1, R
    target = None
    if pp.label == "rough":
        target = abs(pp.z1)
        r1 = min(0.45, max(0.15, 0.9 * abs(pp.z1 - 1.0)))
    elif pp.label in ("smooth", "boundary_rs"):
        lo, hi = sd.bands[pp.component - 1]
        target = 0.5 * abs(lo + hi)
    if target is not None:
        R = max(1.0 + r1 + 0.1, target)
    xs = [x for x in sd.roots_x if x < 0]
    while any(abs(R + x) < 5e-2 for x in xs):
        R *= 1.04
    return r1, R


# ---------------------------------------------------------------------------
# Limiting kernels
# ---------------------------------------------------------------------------

def band_contour(sd: SpectralData, ell: int, x_r: float = 2.0) -> Contour:
    """Circle crossing the real axis at the midpoint of band ell and at x_r > 1."""
    bm = sd.band_midpoint(ell)
    return circle(0.5 * (bm + x_r), 0.5 * (x_r - bm))


def smooth_kernel(spec: WeightSpec, sd: SpectralData, ell: int,
                  kappa: int, zeta: int, kappap: int, zetap: int,
                  tol: float = DEFAULT_TOL_LIMIT, x_r: float = 2.0) -> KernelBlock:
    """Limiting kernel deep inside smooth component ell (1 <= ell <= k'-1)."""
    if sd.k_prime < 2:
        raise NoSmoothRegion("model has no smooth region (k' = 1)")
    if not (1 <= ell <= sd.k_prime - 1):
        raise IndexOutOfRange(f"ell must be in 1..{sd.k_prime - 1}, got {ell}")
    c = band_contour(sd, ell, x_r)
    dk = kappa - kappap
    dz = zetap - zeta

    def integrand(z):
        r1, r2, P1, P2 = _eigen_tables(spec, sd, z)
        if dk <= 0:
            vals = (r1 ** dk)[:, None, None] * P1
        else:
            vals = -((r2 ** dk)[:, None, None] * P2)
        return vals * (z ** (dz - 1))[:, None, None]

    val, err, M = contour_integrate(integrand, c, tol=tol, M0=64)
    return KernelBlock(values=(val / (2j * math.pi)).T,
                       indices=(kappa, zeta, kappap, zetap), error=err, nodes=M)


def rough_kernel(spec: WeightSpec, sd: SpectralData, z1: complex, chi: float,
                 kappa: int, zeta: int, kappap: int, zetap: int,
                 tol: float = DEFAULT_TOL_LIMIT, R: float | None = None,
                 x_r: float | None = None) -> KernelBlock:
    """Limiting kernel in the rough region at a point with critical point z1.

    z1 must be the first component of the critical-point map at (chi, eta):
    Im z1 > 0 when chi > 0 and Im z1 < 0 when chi <= 0 (the arc from conj(z1)
    to z1 then runs downwards, which is the Riemann-surface orientation).
    """
    dk = kappa - kappap
    dz = zetap - zeta
    coeff = (1.0 if chi <= 0 else 0.0) - (1.0 if dk > 0 else 0.0)

    val = np.zeros((2, 2), dtype=complex)
    err = 0.0
    nodes = 0
    if coeff != 0.0:
        if R is None:
            _, R = _default_radii(sd)
        g01 = circle(0.0, R)

        def closed_part(z):
            return phi_power(spec, sd, z, dk) * (z ** (dz - 1))[:, None, None]

        v1, e1, M1 = contour_integrate(closed_part, g01, tol=tol, M0=64)
        val = val + coeff * v1 / (2j * math.pi)
        err += abs(coeff) * e1
        nodes = max(nodes, M1)

    if x_r is None:
        x_r = max(2.0, 1.0 + 0.75 * abs(z1 - 1.0))
    arc = arc_through(z1, x_r)

    use_rho2 = chi <= 0

    def arc_part(z):
        r1, r2, P1, P2 = _eigen_tables(spec, sd, z)
        if use_rho2:
            vals = (r2 ** dk)[:, None, None] * P2
        else:
            vals = (r1 ** dk)[:, None, None] * P1
        return vals * (z ** (dz - 1))[:, None, None]

    v2, e2, M2 = contour_integrate(arc_part, arc, tol=tol, M0=64)
    val = val + v2 / (2j * math.pi)
    err += e2
    nodes = max(nodes, M2)
    return KernelBlock(values=val.T, indices=(kappa, zeta, kappap, zetap),
                       error=err, nodes=nodes)


def sine_reference(theta: float, u: float, x: int, y: int, gauge_sign: float = -1.0):
    """Gauged discrete sine kernel (g(x)/g(y)) sin(theta (x-y)/2) / (pi (x-y)).

    g(x) = (gauge_sign * sqrt(u))^x; the diagonal value is theta / (2 pi).
    """
    if x == y:
        return theta / (2.0 * math.pi)
    g = (gauge_sign * math.sqrt(u)) ** (x - y)
    return g * math.sin(0.5 * theta * (x - y)) / (math.pi * (x - y))
