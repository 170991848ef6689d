"""Brute-force ground truth at tiny sizes.

Two independent routes to exact correlation functions:

* a transfer-matrix pass over the non-intersecting path measure (products of
  per-transition determinants), which directly realizes the point process the
  correlation kernel describes, and
* exhaustive enumeration of dimer coverings of the Aztec diamond graph with
  the periodic edge-weight placement, mapped through the path bijection.

Sizes are capped at kN <= 6 (tiling counts 8, 1024, 2^21).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EmptyQuery, OutOfRange, TooLarge
from .model import WeightSpec, in_lattice


# ---------------------------------------------------------------------------
# Path measure: transition weights
# ---------------------------------------------------------------------------
#
# Columns run 0..2kN.  The transition into an odd column steps down by 0 or 1
# (the alpha/gamma half of a period cell); the transition into an even column
# is a free descent (the beta half, with its geometric series of slides).
# Unit weights attach by the parity of the height being left.

def _period_index(col: int, k: int) -> int:
    """Index in 1..k of the period cell a transition column belongs to."""
    return ((col - 1) // 2) % k


def step_weight(spec: WeightSpec, col: int, u: int, v: int) -> float:
    """Weight of one path moving from height u (column col-1) to v (column col)."""
    d = u - v
    if d < 0:
        return 0.0
    j = _period_index(col, spec.k)
    if col % 2 == 0:
        # free descent; odd total descent carries the beta weight
        if d % 2 == 0:
            return 1.0
        return spec.beta[j] if u % 2 == 0 else 1.0 / spec.beta[j]
    if d > 1:
        return 0.0
    if d == 0:
        g = spec.gamma[j]
        return g if u % 2 == 0 else 1.0 / g
    a = spec.alpha[j]
    return a if u % 2 == 0 else 1.0 / a


def _transition_det(spec: WeightSpec, col: int, src: tuple, dst: tuple) -> float:
    n = len(src)
    mat = np.empty((n, n))
    for i, u in enumerate(src):
        for j, v in enumerate(dst):
            mat[i, j] = step_weight(spec, col, u, v)
    return float(np.linalg.det(mat))


@dataclass(frozen=True)
class PathLaw:
    """Exact law of the point process at size kN with 2n >= kN paths."""

    spec: WeightSpec
    N: int
    n2: int                # number of paths (2n)
    Z: float

    @property
    def size(self) -> int:
        return self.spec.k * self.N

    @property
    def columns(self) -> int:
        return 2 * self.spec.k * self.N


def _column_states(size: int, n2: int):
    """All strictly increasing height tuples a column can hold."""
    lo, hi = -size, n2 - 1
    return [tuple(c) for c in itertools.combinations(range(lo, hi + 1), n2)]


def _targets_even(src: tuple):
    """Targets reachable by 0/1 descents (strictly increasing preserved)."""
    opts = []
    for choice in itertools.product((0, 1), repeat=len(src)):
        dst = tuple(u - d for u, d in zip(src, choice))
        if all(a < b for a, b in zip(dst, dst[1:])):
            opts.append(dst)
    return opts


def _targets_odd(src: tuple, lo: int):
    """Targets of a free-descent transition: v_j <= u_j, interlacing support.

    The determinant vanishes unless u_{j-1} < v_j, so v_j ranges over
    (u_{j-1}, u_j]; v_1 >= lo.
    """
    ranges = []
    prev = lo - 1
    for j, u in enumerate(src):
        low = (src[j - 1] if j else prev) + 1
        ranges.append(range(low, u + 1))
    return [dst for dst in itertools.product(*ranges)
            if all(a < b for a, b in zip(dst, dst[1:]))]


def _transfer(spec: WeightSpec, size: int, n2: int, required: dict) -> float:
    start = tuple(range(0, n2))
    end = tuple(range(-size, -size + n2))

    def ok(col, state):
        need = required.get(col)
        return need is None or need.issubset(state)

    layer = {start: 1.0} if ok(0, start) else {}
    for col in range(1, 2 * size + 1):
        cur: dict = {}
        for src, wsrc in layer.items():
            if col == 2 * size:
                targets = [end]
            elif col % 2 == 1:
                targets = _targets_even(src)
            else:
                targets = _targets_odd(src, -size)
            for dst in targets:
                if not ok(col, dst):
                    continue
                if any(v > u for u, v in zip(src, dst)):
                    continue
                det = _transition_det(spec, col, src, dst)
                if det != 0.0:
                    cur[dst] = cur.get(dst, 0.0) + wsrc * det
        layer = cur
    return sum(layer.values())


def path_law(spec: WeightSpec, N: int, n: int | None = None,
             max_size: int = 6) -> PathLaw:
    """Partition data of the non-intersecting path measure with 2n paths."""
    size = spec.k * N
    if size > max_size:
        raise TooLarge(f"path law enumeration capped at kN={max_size}, got {size}")
    n2 = size if n is None else 2 * n
    if n2 < size:
        raise OutOfRange(f"need n >= kN/2, got 2n={n2} < kN={size}")
    Z = _transfer(spec, size, n2, {})
    return PathLaw(spec=spec, N=N, n2=n2, Z=Z)


def path_correlation(law: PathLaw, points) -> float:
    """P(all queried points occupied); points are (column, height) pairs."""
    if not points:
        return 1.0
    size = law.size
    required: dict = {}
    for c, u in points:
        if not (0 <= c <= 2 * size):
            raise OutOfRange(f"column {c} outside 0..{2 * size}")
        required.setdefault(c, set()).add(u)
    num = _transfer(law.spec, size, law.n2, required)
    return num / law.Z


# ---------------------------------------------------------------------------
# Aztec diamond graph and its dimer coverings
# ---------------------------------------------------------------------------

def diamond_vertices(size: int):
    """Vertices of the Aztec diamond graph of the given size."""
    c = size - 0.5
    out = []
    for x in range(0, 2 * size):
        for y in range(0, 2 * size):
            if abs(x - c) + abs(y - c) <= size:
                out.append((x, y))
    return out


def is_white(x: int, y: int, size: int) -> bool:
    return (x - size + y) % 2 == 0


def edge_weight(spec: WeightSpec, size: int, v1: tuple, v2: tuple) -> float:
    """Periodic edge weight of the doubly periodic path weighting.

    Each dimer carries exactly the weight of the path step its segment
    contributes: a dark-left horizontal dimer is a unit down-step (alpha), a
    dark-top vertical dimer one unit of a free slide (beta), a dark-bottom
    vertical dimer a level move (gamma), and a dark-right horizontal dimer
    carries no segment.  Exponents are +1 when the step leaves an even path
    height and -1 otherwise; the period cell follows the dark cell's
    anti-diagonal.  This is the edge weighting whose tiling measure maps to
    the transition-symbol measure under the path bijection.
    """
    (x1, y1), (x2, y2) = sorted([v1, v2])
    k = spec.k
    M = size
    dark1 = (x1 + y1 - M) % 2 == 1
    if y1 == y2:  # horizontal
        if not dark1:
            return 1.0  # dark-right: blank domino
        a_idx = ((x1 + y1 - M + 3) // 2 - 1) % k
        u = (y1 - x1 + M - 1) // 2
        a = spec.alpha[a_idx]
        return a if u % 2 == 0 else 1.0 / a
    # vertical
    if dark1:
        # dark bottom: level move
        a_idx = ((x1 + y1 - M + 3) // 2 - 1) % k
        u = (y1 - x1 + M - 1) // 2
        g = spec.gamma[a_idx]
        return g if u % 2 == 0 else 1.0 / g
    # dark top: one unit of the free slide into the following even column
    xd, yd = x1, y1 + 1
    b_idx = ((xd + yd - M + 1) // 2 - 1) % k
    u = (yd - xd + M - 1) // 2
    b = spec.beta[b_idx]
    return b if u % 2 == 0 else 1.0 / b


def _neighbors(v, vset):
    x, y = v
    for w in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
        if w in vset:
            yield w


def enumerate_matchings(size: int):
    """All perfect matchings of the Aztec diamond graph, as edge tuples."""
    verts = diamond_vertices(size)
    vset = set(verts)
    order = sorted(verts)
    out: list = []

    def rec(covered: set, acc: list, idx: int):
        while idx < len(order) and order[idx] in covered:
            idx += 1
        if idx == len(order):
            out.append(tuple(acc))
            return
        v = order[idx]
        for w in _neighbors(v, vset):
            if w not in covered:
                acc.append((v, w) if v < w else (w, v))
                covered.add(v)
                covered.add(w)
                rec(covered, acc, idx + 1)
                covered.discard(v)
                covered.discard(w)
                acc.pop()

    rec(set(), [], 0)
    return out


@dataclass(frozen=True)
class EnumeratedLaw:
    """Exhaustive tiling law: matchings, weights, partition function."""

    spec: WeightSpec
    size: int
    matchings: tuple
    weights: np.ndarray
    Z: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.Z


def enumerate_law(spec: WeightSpec, size: int,
                  edge_override=None) -> EnumeratedLaw:
    """Enumerate all tilings of the size-kN diamond with their exact weights.

    ``edge_override``, if given, maps an edge (v1, v2) with v1 < v2 to a
    multiplicative factor (used by the gauge-invariance tests).
    """
    if size > 6:
        raise TooLarge(f"enumeration capped at kN=6, got {size}")
    if size % 2 != 0 or size % spec.k != 0:
        raise OutOfRange(f"size must be an even multiple of k={spec.k}")
    matchings = enumerate_matchings(size)
    expected = 2 ** (size * (size + 1) // 2)
    if len(matchings) != expected:
        raise AssertionError(f"found {len(matchings)} matchings, expected {expected}")
    weights = np.empty(len(matchings))
    for i, m in enumerate(matchings):
        w = 1.0
        for e in m:
            w *= edge_weight(spec, size, *e)
            if edge_override is not None:
                w *= edge_override(e)
        weights[i] = w
    return EnumeratedLaw(spec=spec, size=size, matchings=matchings,
                         weights=weights, Z=float(weights.sum()))


def exact_correlation(law: EnumeratedLaw, points) -> float:
    """P(points occupied) for kernel-indexed points (m, 2*xi + i).

    Points with height label >= -kN + 1 are read off the tiling paths; any
    query touching the bottom boundary row (2*xi + i = -kN) additionally
    requires the randomness of the path continuations below the tilings, and
    is delegated to the path transfer law.
    """
    from .sampler import tiling_to_paths, tiling_from_matching

    if points is None:
        raise EmptyQuery("points must be a (possibly empty) sequence")
    points = list(points)
    if not points:
        return 1.0
    size = law.size
    n2 = size
    converted = []
    for (col, label) in points:
        if col % 2 != 0 or not (0 < col < 2 * size):
            raise OutOfRange(f"kernel column {col} must be even inside (0, {2 * size})")
        if not (-size <= label <= -1):
            raise OutOfRange(f"height label {label} outside [-{size}, -1]")
        converted.append((col, label + n2))

    if any(u == 0 for _, u in converted):
        lw = path_law(law.spec, size // law.spec.k)
        return path_correlation(lw, converted)

    acc = 0.0
    for m, w in zip(law.matchings, law.weights):
        cfg = tiling_to_paths(tiling_from_matching(law.spec, size, m))
        if all(u in cfg.columns[c] for c, u in converted):
            acc += w
    return acc / law.Z
