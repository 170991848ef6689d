"""Model definition for the 2xk-periodic Aztec diamond.

A weighting is a period ``k`` together with positive sequences ``alpha`` and
``beta`` (and optionally ``gamma`` for the generalized transition symbols).
The weighting may alternatively be given through face weights on one
fundamental domain of the doubly periodic lattice; the gauge transformation
turning faces into edge weights is implemented here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    LengthMismatch,
    NonPositiveWeight,
    OddN,
    PeriodicityViolation,
    ValidationError,
)

STANDARD_RTOL = 1e-12

# Translation lattice of the doubly periodic weighting: spanned by (2,-2)
# (the "2" direction) and (k,k) (the "k" direction).


def in_lattice(v1: int, v2: int, k: int) -> bool:
    """Whether the vector (v1, v2) lies in the lattice 2Z(1,-1) + kZ(1,1)."""
    s, d = v1 + v2, v1 - v2
    return s % (2 * k) == 0 and d % 4 == 0


def face_key(i: int, j: int, k: int) -> tuple[int, int]:
    """Canonical residue of a face index modulo the two periods."""
    return ((i + j) % (2 * k), (i - j) % 4)


@dataclass(frozen=True)
class WeightSpec:
    """The 2xk period data: alpha_1..alpha_k, beta_1..beta_k, gamma_1..gamma_k."""

    k: int
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]
    standard: bool

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"period k must be >= 1, got {self.k}")

    @property
    def is_uniform(self) -> bool:
        return all(a == 1.0 for a in self.alpha + self.beta + self.gamma)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "gamma": list(self.gamma),
        }


def _positive_sequence(name: str, seq, k: int) -> tuple[float, ...]:
    values = tuple(float(x) for x in seq)
    if len(values) != k:
        raise LengthMismatch(f"{name} must have length k={k}, got {len(values)}")
    for x in values:
        if not (x > 0.0) or not math.isfinite(x):
            raise NonPositiveWeight(f"{name} entries must be positive and finite, got {x}")
    return values


def validate_spec(raw) -> WeightSpec:
    """Build a WeightSpec from a mapping (or pass a WeightSpec through).

    The standard-model flag is true iff all gamma are 1 and
    prod(alpha) == prod(beta) within relative tolerance 1e-12.  Validation is
    idempotent: a WeightSpec validates to an identical record.
    """
    if isinstance(raw, WeightSpec):
        raw = raw.as_dict()
    if "k" not in raw:
        raise ValidationError("model description must contain 'k'")
    k = int(raw["k"])
    if k < 1:
        raise ValidationError(f"period k must be >= 1, got {k}")
    alpha = _positive_sequence("alpha", raw["alpha"], k)
    beta = _positive_sequence("beta", raw["beta"], k)
    gamma = _positive_sequence("gamma", raw.get("gamma", (1.0,) * k), k)

    prod_a = math.prod(alpha)
    prod_b = math.prod(beta)
    standard = all(g == 1.0 for g in gamma) and (
        abs(prod_a - prod_b) <= STANDARD_RTOL * max(abs(prod_a), abs(prod_b))
    )
    return WeightSpec(k=k, alpha=alpha, beta=beta, gamma=gamma, standard=standard)


def uniform_spec(k: int = 1) -> WeightSpec:
    return validate_spec({"k": k, "alpha": [1.0] * k, "beta": [1.0] * k})


def fig_2x3_spec() -> WeightSpec:
    """The 2x3 example weighting: alpha = (1/0.3, 0.3, 1), beta = (1, 1, 1)."""
    return validate_spec({"k": 3, "alpha": [1.0 / 0.3, 0.3, 1.0], "beta": [1.0, 1.0, 1.0]})


@dataclass(frozen=True)
class FaceWeights:
    """Face weights on one fundamental domain of the doubly periodic lattice.

    Faces are indexed by the lattice square with down-left corner (i, j) and
    are subject to a[i,j] == a[i+2,j-2] and a[i,j] == a[i+k,j+k].  Internally
    one representative per orbit is stored, keyed by the canonical residue
    ((i+j) mod 2k, (i-j) mod 4).
    """

    k: int
    table: dict = field(repr=False)

    def value(self, i: int, j: int) -> float:
        key = face_key(i, j, self.k)
        try:
            return self.table[key]
        except KeyError:
            raise PeriodicityViolation(
                f"face ({i},{j}) (residue {key}) missing from fundamental domain"
            ) from None


def face_weights(k: int, entries) -> FaceWeights:
    """Validate face weights given as {(i, j): value} or [(i, j, value), ...].

    Entries that land on the same orbit must agree exactly; every orbit of the
    quotient lattice (4k orbits) must be covered.
    """
    if isinstance(entries, dict):
        items = [(i, j, v) for (i, j), v in entries.items()]
    else:
        items = [(int(i), int(j), float(v)) for i, j, v in entries]
    table: dict = {}
    for i, j, v in items:
        v = float(v)
        if not (v > 0.0) or not math.isfinite(v):
            raise NonPositiveWeight(f"face ({i},{j}) has non-positive weight {v}")
        key = face_key(i, j, k)
        if key in table and table[key] != v:
            raise PeriodicityViolation(
                f"faces ({i},{j}) and an earlier entry share orbit {key} "
                f"but disagree: {v} != {table[key]}"
            )
        table[key] = v
    n_orbits = sum(1 for s in range(2 * k) for d in range(4) if (s - d) % 2 == 0)
    if len(table) != n_orbits:
        raise PeriodicityViolation(
            f"fundamental domain needs {n_orbits} independent faces, got {len(table)}"
        )
    return FaceWeights(k=k, table=table)


def constant_faces(k: int, value: float = 1.0) -> FaceWeights:
    entries = []
    for i in range(2 * k):
        for j in range(4):
            entries.append((i, j, value))
    return face_weights(k, entries)


def gauge_from_faces(faces: FaceWeights):
    """Edge weights (alpha, beta) plus auxiliary (gamma_hat, delta_hat) from faces.

    The four ratio formulas are evaluated with face indices reduced modulo the
    two periods; the kN-dependent offset of the displayed formulas is taken in
    its N = 0 (mod 4) class, which fixes one labeling convention of the
    resulting sequences.  Returns (spec, gamma_hat, delta_hat).
    """
    k = faces.k
    a = faces.value
    alpha, beta, ghat, dhat = [], [], [], []
    for i in range(1, k + 1):
        alpha.append((a(i - 1, i - 3) / a(i, i - 3)) * (a(i - 1, i - 2) / a(i - 2, i - 2)))
        beta.append((a(i - 1, i - 2) / a(i - 1, i - 1)) * (a(i, i - 2) / a(i, i - 3)))
        ghat.append((a(i, i - 4) / a(i + 1, i - 4)) * (a(i, i - 3) / a(i - 1, i - 3)))
        dhat.append((a(i, i - 3) / a(i, i - 2)) * (a(i + 1, i - 3) / a(i + 1, i - 4)))
    spec = validate_spec({"k": k, "alpha": alpha, "beta": beta})
    return spec, tuple(ghat), tuple(dhat)


@dataclass(frozen=True)
class DiamondGeometry:
    """Index bookkeeping for the finite Aztec diamond of size kN (N even).

    The correlation kernel lives on columns 2km for 0 < m < N and on height
    labels 2*xi + i with -kN/2 <= xi <= -1, i in {0,1}.  The minimal number of
    non-intersecting paths n = kN/2 is fixed throughout.
    """

    k: int
    N: int

    def __post_init__(self):
        if self.N < 2 or self.N % 2 != 0:
            raise OddN(f"N must be a positive even integer, got {self.N}")

    @property
    def size(self) -> int:
        return self.k * self.N

    @property
    def n_paths(self) -> int:
        """Half the path count: n = kN/2, so there are 2n paths."""
        return (self.k * self.N) // 2

    @property
    def m_range(self) -> range:
        return range(1, self.N)

    @property
    def xi_range(self) -> range:
        return range(-(self.k * self.N) // 2, 0)

    def check_index(self, m: int, xi: int, i: int) -> None:
        if m not in self.m_range or xi not in self.xi_range or i not in (0, 1):
            from .errors import IndexOutOfRange

            raise IndexOutOfRange(
                f"(m={m}, xi={xi}, i={i}) outside 0<m<{self.N}, "
                f"{-self.size // 2}<=xi<=-1, i in {{0,1}}"
            )

    def coord_to_index(self, chi: float, eta: float, kappa: int = 0, zeta: int = 0):
        """Map a global coordinate to kernel indices (m, xi) with local offsets."""
        m_real = 0.5 * self.N * (chi + 1.0)
        xi_real = 0.25 * self.k * self.N * (eta - 1.0)
        e_chi = math.ceil(m_real) - m_real
        e_eta = math.ceil(xi_real) - xi_real
        m = round(m_real + e_chi) + kappa
        xi = round(xi_real + e_eta) + zeta
        return m, xi, e_chi, e_eta

    def index_to_coord(self, m: int, xi: int):
        """Global coordinate whose (kappa, zeta) = (0,0) image is exactly (m, xi)."""
        chi = 2.0 * m / self.N - 1.0
        eta = 4.0 * xi / (self.k * self.N) + 1.0
        return chi, eta

    def height_label(self, u: int):
        """Split a path height u in [0, kN) into the kernel label (xi, i)."""
        v = u - 2 * self.n_paths
        i = v & 1
        xi = (v - i) // 2
        return xi, i


def geometry(spec: WeightSpec, N: int) -> DiamondGeometry:
    return DiamondGeometry(k=spec.k, N=int(N))


def load_model(path) -> WeightSpec:
    """Read a model file (JSON).  Face tables take precedence over alpha/beta."""
    with open(path) as fh:
        doc = json.load(fh)
    if "faces" in doc and doc["faces"]:
        faces = face_weights(int(doc["k"]), [tuple(e) for e in doc["faces"]])
        spec, _, _ = gauge_from_faces(faces)
        return spec
    return validate_spec(doc)


def save_model(spec: WeightSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.as_dict(), fh, indent=2)
        fh.write("\n")
