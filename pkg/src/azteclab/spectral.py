"""Spectral analysis of the 2xk transition symbol.

Everything here is driven by the 2x2 matrix-valued symbol of one period of
transition matrices and by the discriminant polynomial built from its trace.
Polynomials are plain numpy coefficient arrays in ascending degree; all
evaluation helpers accept scalars or arrays of complex points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    DegenerateSpectrum,
    DivisionResidual,
    NotStandardModel,
    OrderingViolation,
    PoleAtZ,
    RootImagTooLarge,
    ZeroDenominator,
)
from .model import WeightSpec

CLUSTER_RTOL = 1e-7
ROOT_IMAG_RTOL = 1e-7


def trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    return npoly.polytrim(c, tol=0.0)


def _as_complex_points(z):
    z = np.asarray(z, dtype=complex)
    # A +0.0 imaginary part selects the limit from the upper half plane on
    # the branch cuts, matching the branch convention used throughout.
    neg_zero = (z.imag == 0.0) & np.signbit(z.imag)
    if np.any(neg_zero):
        z = np.where(neg_zero, z.real + 0.0j, z)
    return z


# ---------------------------------------------------------------------------
# Transition symbols and the one-period symbol product
# ---------------------------------------------------------------------------

def transition_symbol(spec: WeightSpec, m: int, half: str, z):
    """One transition symbol: half 'odd' gives the alpha/gamma factor,
    half 'even' the beta factor with its 1/(1 - 1/z) prefactor.

    m is 1-based within the period.
    """
    if not 1 <= m <= spec.k:
        raise ValueError(f"m must be in 1..k={spec.k}, got {m}")
    z = complex(z)
    if z == 0:
        raise PoleAtZ("symbols have a pole at z=0")
    a = spec.alpha[m - 1]
    b = spec.beta[m - 1]
    g = spec.gamma[m - 1]
    if half == "odd":
        return np.array([[g, a / z], [1.0 / a, 1.0 / g]], dtype=complex)
    if half == "even":
        if z == 1:
            raise PoleAtZ("even half-step has a pole at z=1")
        pref = 1.0 / (1.0 - 1.0 / z)
        return pref * np.array([[1.0, b / z], [1.0 / b, 1.0]], dtype=complex)
    raise ValueError(f"half must be 'odd' or 'even', got {half!r}")


def capital_phi_poly(spec: WeightSpec) -> list:
    """Entrywise polynomial coefficients of (z-1)^k * Phi(z).

    Each period factor is the polynomial matrix
        [[gamma*z + alpha/beta,          gamma*beta + alpha],
         [z*(1/alpha + 1/(gamma*beta)),  z/gamma + beta/alpha]],
    and the full matrix is the ordered product over m = 1..k.
    """
    prod = [[np.array([1.0]), np.array([0.0])], [np.array([0.0]), np.array([1.0])]]
    for m in range(spec.k):
        a, b, g = spec.alpha[m], spec.beta[m], spec.gamma[m]
        fac = [
            [np.array([a / b, g]), np.array([g * b + a])],
            [np.array([0.0, 1.0 / a + 1.0 / (g * b)]), np.array([b / a, 1.0 / g])],
        ]
        prod = [
            [
                trim(npoly.polyadd(npoly.polymul(prod[i][0], fac[0][j]),
                                   npoly.polymul(prod[i][1], fac[1][j])))
                for j in range(2)
            ]
            for i in range(2)
        ]
    return prod


def trace_poly(spec: WeightSpec) -> np.ndarray:
    """(z-1)^k Tr Phi(z): degree k, positive coefficients, leading coefficient 2."""
    mat = capital_phi_poly(spec)
    return trim(npoly.polyadd(mat[0][0], mat[1][1]))


def phi(spec: WeightSpec, z):
    """The 2x2 symbol Phi(z), vectorized over complex points z.

    Returns shape z.shape + (2, 2).  Poles at z = 0 and z = 1.
    """
    z = _as_complex_points(z)
    if np.any(z == 0) or np.any(z == 1):
        raise PoleAtZ("Phi has poles at z=0 and z=1")
    mat = capital_phi_poly(spec)
    den = (z - 1.0) ** spec.k
    out = np.empty(z.shape + (2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[..., i, j] = npoly.polyval(z, mat[i][j]) / den
    return out


# ---------------------------------------------------------------------------
# Discriminant polynomial and its band/cut structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralData:
    """Discriminant factorization p = q^2 p0 and derived band/cut structure."""

    k: int
    trace_poly: np.ndarray
    p: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    q: np.ndarray
    p0: np.ndarray
    roots_s: np.ndarray      # descending, length 2k-1, s_0 = 0
    roots_x: np.ndarray      # descending simple roots of p0, length 2k'-1
    k_prime: int
    log_deriv_num: np.ndarray  # q^{-1} (z-1)^{k+1} Tr Phi'(z), degree k'-1

    @property
    def bands(self) -> list:
        """Closed negative-axis bands I_ell = (x_{2ell}, x_{2ell-1}), ell=1..k'-1."""
        x = self.roots_x
        return [(x[2 * ell], x[2 * ell - 1]) for ell in range(1, self.k_prime)]

    @property
    def cuts(self) -> list:
        """Finite gap cuts [x_{2ell+1}, x_{2ell}], ell = 0..k'-2 (branch cuts)."""
        x = self.roots_x
        return [(x[2 * ell + 1], x[2 * ell]) for ell in range(self.k_prime - 1)]

    @property
    def unbounded_cut_end(self) -> float:
        """Right endpoint of the unbounded gap cut (-inf, x_{2(k'-1)}]."""
        return float(self.roots_x[-1])

    def band_midpoint(self, ell: int) -> float:
        lo, hi = self.bands[ell - 1]
        return 0.5 * (lo + hi)

    def on_cut(self, t: float, pad: float = 0.0) -> bool:
        if t > 0:
            return False
        if t <= self.unbounded_cut_end + pad:
            return True
        return any(lo - pad <= t <= hi + pad for lo, hi in self.cuts)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "k_prime": self.k_prime,
            "trace_poly": list(self.trace_poly),
            "p": list(self.p),
            "p_plus": list(self.p_plus),
            "p_minus": list(self.p_minus),
            "q": list(self.q),
            "p0": list(self.p0),
            "roots_s": list(self.roots_s),
            "roots_x": list(self.roots_x),
            "bands": [list(b) for b in self.bands],
            "cuts": [list(c) for c in self.cuts],
            "unbounded_cut_end": self.unbounded_cut_end,
        }


def _real_roots(coeffs: np.ndarray, polish_in: np.ndarray | None = None) -> np.ndarray:
    """All roots of a real polynomial that the theory says must be real.

    Raises RootImagTooLarge when a root strays from the real axis by more than
    the documented tolerance.  Roots are Newton-polished on `polish_in`
    (defaults to the polynomial itself).
    """
    c = trim(coeffs)
    if len(c) <= 1:
        return np.array([])
    roots = npoly.polyroots(c)
    scale = 1.0 + np.abs(roots)
    if np.any(np.abs(roots.imag) > ROOT_IMAG_RTOL * scale):
        worst = roots[np.argmax(np.abs(roots.imag) / scale)]
        raise RootImagTooLarge(f"root {worst} has non-negligible imaginary part")
    roots = roots.real
    target = c if polish_in is None else polish_in
    d = npoly.polyder(target)
    for _ in range(3):
        fx = npoly.polyval(roots, target)
        dfx = npoly.polyval(roots, d)
        safe = np.where(dfx == 0, 1.0, dfx)
        step = np.where(dfx != 0, fx / safe, 0.0)
        cand = roots - step
        # Newton is untrustworthy near multiple roots (0/0); keep a step only
        # if it actually reduces the residual.
        better = np.abs(npoly.polyval(cand, target)) < np.abs(fx)
        roots = np.where(better, cand, roots)
    return np.sort(roots)[::-1]


def _check_ordering(s: np.ndarray, k: int) -> None:
    """Verify 0 = s_0 > s_1 >= s_2 > s_3 >= ... within clustering tolerance."""
    if len(s) != 2 * k - 1:
        raise OrderingViolation(f"expected {2 * k - 1} roots, got {len(s)}")
    tol = CLUSTER_RTOL * (1.0 + np.abs(s))
    if abs(s[0]) > 1e-9:
        raise OrderingViolation(f"s_0 = {s[0]} is not 0")
    for i in range(len(s) - 1):
        gap = s[i] - s[i + 1]
        if gap < -max(tol[i], tol[i + 1]):
            raise OrderingViolation(f"roots out of order at position {i}: {s[i]} < {s[i+1]}")
        if i % 2 == 0 and gap <= max(tol[i], tol[i + 1]):
            # strict inequality is required between s_{2j} and s_{2j+1}
            raise OrderingViolation(
                f"strict inequality s_{i} > s_{i+1} violated: {s[i]} ~ {s[i+1]}"
            )


def discriminant(spec: WeightSpec) -> SpectralData:
    """Factor the discriminant p = ((z-1)^k Tr Phi)^2 - 4 (z-1)^{2k} as q^2 p0.

    Double roots are detected by clustering the roots of p_plus and p_minus
    separately (they never share a root) with relative tolerance 1e-7.
    """
    if not spec.standard:
        raise NotStandardModel("discriminant requires gamma=1 and prod(alpha)=prod(beta)")
    return spectral_factorization(spec, strict=True)


def spectral_factorization(spec: WeightSpec, strict: bool = True) -> SpectralData:
    """Discriminant factorization; strict=False skips the standard-model
    normalizations (s_0 = 0 snap and the root-ordering proposition) so the
    finite-size kernel can run on generalized weightings with real branch
    points."""
    k = spec.k
    T = trace_poly(spec)
    zm1k = npoly.polypow(np.array([-1.0, 1.0]), k)
    p_plus = trim(npoly.polyadd(T, 2.0 * zm1k))
    p_minus = trim(npoly.polysub(T, 2.0 * zm1k))
    p = trim(npoly.polymul(p_plus, p_minus))

    q_roots, x_roots = [], []
    for factor in (p_plus, p_minus):
        roots = _real_roots(factor)
        i = 0
        while i < len(roots):
            if (
                i + 1 < len(roots)
                and roots[i] - roots[i + 1] <= CLUSTER_RTOL * (1.0 + abs(roots[i]))
            ):
                q_roots.append(0.5 * (roots[i] + roots[i + 1]))
                i += 2
            else:
                x_roots.append(roots[i])
                i += 1

    s_all = np.sort(np.concatenate([x_roots, np.repeat(q_roots, 2)]))[::-1]
    if strict:
        _check_ordering(s_all, k)
        # s_0 = 0 is exact in theory; snap it so p0/z stays a clean polynomial.
        s_all[0] = 0.0

    q = trim(npoly.polyfromroots(q_roots)) if q_roots else np.array([1.0])
    p0, rem = npoly.polydiv(p, npoly.polymul(q, q))
    p0 = trim(p0)
    rem_norm = np.max(np.abs(rem)) if len(rem) else 0.0
    if rem_norm > 1e-9 * np.max(np.abs(p)):
        raise DivisionResidual(f"q^2 does not divide p: residual {rem_norm}")

    x_sorted = _real_roots(p0)
    if strict:
        x_sorted[0] = 0.0
        if len(x_sorted) % 2 == 0:
            raise OrderingViolation(f"p0 has {len(x_sorted)} roots, expected odd count")
    k_prime = (len(x_sorted) + 1) // 2
    seps = x_sorted[:-1] - x_sorted[1:]
    if len(seps) and np.min(seps) <= CLUSTER_RTOL * (1.0 + np.max(np.abs(x_sorted))):
        raise OrderingViolation("p0 roots are not simple at clustering tolerance")

    # numerator of the logarithmic derivative: ((z-1) T' - k T) / q, exact.
    dT = trim(npoly.polysub(npoly.polymul(np.array([-1.0, 1.0]), npoly.polyder(T)),
                            k * T))
    num, rem = npoly.polydiv(dT, q)
    rem_norm = np.max(np.abs(rem)) if len(rem) else 0.0
    if rem_norm > 1e-8 * max(np.max(np.abs(dT)), 1e-300):
        raise DivisionResidual(f"q does not divide (z-1)T' - kT: residual {rem_norm}")
    num = trim(num)

    return SpectralData(
        k=k,
        trace_poly=T,
        p=p,
        p_plus=p_plus,
        p_minus=p_minus,
        q=q,
        p0=p0,
        roots_s=s_all,
        roots_x=x_sorted,
        k_prime=k_prime,
        log_deriv_num=num,
    )


# ---------------------------------------------------------------------------
# Branch-correct square root, eigenvalues, projectors
# ---------------------------------------------------------------------------

def p0_sqrt(sd: SpectralData, z):
    """Analytic continuation of t -> sqrt(p0(t)) from (0, inf) to the slit plane.

    The plane is slit along the gap cuts; on a cut the value is the limit from
    the upper half plane.  Vectorized over z.
    """
    z = _as_complex_points(z)
    lc = sd.p0[-1]
    acc = np.full(z.shape, 0.5 * math.log(lc), dtype=complex)
    for x in sd.roots_x:
        acc = acc + 0.5 * np.log(z - x)
    return np.exp(acc)


def rho_pair(spec: WeightSpec, sd: SpectralData, z):
    """(rho1, rho2) with the paper's branch: rho1 carries + q(z) p0(z)^{1/2}.

    det Phi = 1 identically, so the smaller eigenvalue is computed as the
    reciprocal of the larger one; forming it by subtraction would lose all
    accuracy wherever the eigenvalues differ by orders of magnitude.
    """
    z = _as_complex_points(z)
    T = npoly.polyval(z, sd.trace_poly)
    s = npoly.polyval(z, sd.q) * p0_sqrt(sd, z)
    den = 2.0 * (z - 1.0) ** spec.k
    num_plus = T + s
    num_minus = T - s
    plus_big = np.abs(num_plus) >= np.abs(num_minus)
    rho1 = np.where(plus_big, num_plus / den, den / np.where(num_minus == 0, 1.0, num_minus))
    rho2 = np.where(plus_big, den / np.where(num_plus == 0, 1.0, num_plus), num_minus / den)
    return rho1, rho2


def rho_diff(spec: WeightSpec, sd: SpectralData, z):
    """rho1 - rho2 = q(z) p0(z)^{1/2} / (z-1)^k, free of cancellation."""
    z = _as_complex_points(z)
    return npoly.polyval(z, sd.q) * p0_sqrt(sd, z) / (z - 1.0) ** spec.k


def projectors(spec: WeightSpec, sd: SpectralData, z):
    """Spectral projectors (P1, P2) of Phi(z) via the resolvent formula."""
    z = _as_complex_points(z)
    rho1, rho2 = rho_pair(spec, sd, z)
    ph = phi(spec, z)
    diff = rho_diff(spec, sd, z)
    eye = np.zeros_like(ph)
    eye[..., 0, 0] = 1.0
    eye[..., 1, 1] = 1.0
    p1 = (ph - rho2[..., None, None] * eye) / diff[..., None, None]
    p2 = eye - p1
    return p1, p2


@dataclass(frozen=True)
class EigenSystem:
    z: complex
    rho1: complex
    rho2: complex
    proj1: np.ndarray
    proj2: np.ndarray


def eigen(spec: WeightSpec, sd: SpectralData, z) -> EigenSystem:
    """Eigenvalues and projectors of Phi(z) at a single point.

    rho1 is the branch continued from |rho1| > |rho2| (equivalently the
    + sign in front of q p0^{1/2}); on the gap cuts this is the limit from the
    upper half plane.
    """
    z = complex(z)
    if z in (0.0, 1.0):
        raise PoleAtZ("Phi has poles at z=0 and z=1")
    rho1, rho2 = (complex(r) for r in rho_pair(spec, sd, z))
    if abs(rho1 - rho2) < 1e-12 * (abs(rho1) + abs(rho2)):
        raise DegenerateSpectrum(f"eigenvalues coincide at z={z} (branch point?)")
    p1, p2 = projectors(spec, sd, z)
    return EigenSystem(z=z, rho1=rho1, rho2=rho2, proj1=p1, proj2=p2)


def log_derivative_rho1(spec: WeightSpec, sd: SpectralData, z):
    """rho1'(z)/rho1(z) evaluated through the polynomial quotient identity."""
    z = _as_complex_points(z)
    num = npoly.polyval(z, sd.log_deriv_num)
    return num / ((z - 1.0) * p0_sqrt(sd, z))


# ---------------------------------------------------------------------------
# Magnetically altered Kasteleyn matrix
# ---------------------------------------------------------------------------

def kasteleyn_matrix(spec: WeightSpec, z, lam) -> np.ndarray:
    """The 2k x 2k magnetically altered Kasteleyn matrix K(z, lambda)."""
    k = spec.k
    z = complex(z)
    lam = complex(lam)
    K = np.zeros((2 * k, 2 * k), dtype=complex)

    def A(j):
        a = spec.alpha[j]
        return np.array([[-1.0 / a, 1.0], [z, -a]], dtype=complex)

    def B(j):
        b = spec.beta[j]
        return np.array([[1.0 / b, 1.0], [z, b]], dtype=complex)

    for j in range(k):
        K[2 * j: 2 * j + 2, 2 * j: 2 * j + 2] += A(j)
    for j in range(k - 1):
        K[2 * j + 2: 2 * j + 4, 2 * j: 2 * j + 2] += B(j)
    K[0:2, 2 * k - 2: 2 * k] += lam * B(k - 1)
    return K


def kasteleyn_charpoly(spec: WeightSpec, z, lam) -> complex:
    """P_C(z, lambda) = det K(z, lambda)."""
    return complex(np.linalg.det(kasteleyn_matrix(spec, z, lam)))


def kasteleyn_identity_rhs(spec: WeightSpec, z, lam) -> complex:
    """(1-z)^k det(lambda I - (-1)^k Phi(z)) for cross-checking P_C."""
    z = complex(z)
    lam = complex(lam)
    ph = phi(spec, z)
    sign = (-1.0) ** spec.k
    mat = lam * np.eye(2) - sign * ph
    return complex((1.0 - z) ** spec.k * np.linalg.det(mat))


# ---------------------------------------------------------------------------
# Wiener-Hopf switching identity
# ---------------------------------------------------------------------------

def wiener_hopf_switch(a, b, c, alpha, beta, gamma, z):
    """Swap a lower-type and an upper-type 2x2 symbol factor.

    Returns (left_factors, right_factors, x) where both ordered products are
    equal entrywise and x = (a*beta + b/alpha) / (a*c + gamma/alpha).
    """
    z = complex(z)
    den = a * c + gamma / alpha
    if den == 0:
        raise ZeroDenominator("switching denominator a*c + gamma/alpha vanishes")
    x = (a * beta + b / alpha) / den
    left = (
        np.array([[a, b / z], [c, 1.0 / a]], dtype=complex),
        np.array([[alpha, beta / z], [gamma, 1.0 / alpha]], dtype=complex),
    )
    right = (
        np.array([[a, gamma * x / z], [beta / x, 1.0 / a]], dtype=complex),
        np.array([[alpha, c * x / z], [b / x, 1.0 / alpha]], dtype=complex),
    )
    return left, right, x
