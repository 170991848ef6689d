"""Exact sampling of 2xk-periodic Aztec diamond tilings and path statistics.

Sampling is weighted domino shuffling: the diamond grows from size 1 to kN
through destruction / sliding / creation steps, with creation probabilities
taken from per-generation edge-weight tables produced by urban renewal.  The
tables are doubly periodic, so only O(k) distinct weights are stored per
generation.

The tiling <-> non-intersecting-path bijection follows the segment drawing on
dominoes: a vertical domino with its dark cell at the bottom carries a level
move, a horizontal domino with its dark cell on the left a unit down-step,
a vertical domino with dark cell on top a unit slide, and the remaining
horizontal dominoes carry nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedTiling, OddN, EmptyQuery
from .model import WeightSpec
from .oracle import diamond_vertices, edge_weight

# slide directions; vertical dominoes move east/west, horizontal north/south
DIRS = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}


def _black(x: int, y: int, gen: int) -> bool:
    """Dark-cell indicator at generation ``gen`` (the coloring alternates)."""
    return (x + y - gen) % 2 == 1


def domino_type(x: int, y: int, horizontal: bool, gen: int) -> str:
    """Type of the domino anchored at its left/bottom vertex (x, y)."""
    if horizontal:
        return "S" if _black(x, y, gen) else "N"
    return "W" if _black(x, y, gen) else "E"


@dataclass(frozen=True)
class Tiling:
    """A domino tiling of the size-kN Aztec diamond.

    Dominoes are (type, x, y) with (x, y) the left/bottom covered vertex and
    type the slide direction class (N/S horizontal, E/W vertical).
    """

    spec: WeightSpec
    size: int
    dominoes: tuple
    seed: object = None

    def cover_map(self) -> dict:
        out = {}
        for t, x, y in self.dominoes:
            dx, dy = (1, 0) if t in "NS" else (0, 1)
            out[(x, y)] = (x + dx, y + dy)
            out[(x + dx, y + dy)] = (x, y)
        return out

    def validate(self) -> None:
        verts = diamond_vertices(self.size)
        cover = self.cover_map()
        if set(cover) != set(verts):
            raise MalformedTiling("dominoes do not cover the diamond exactly once")
        for t, x, y in self.dominoes:
            horizontal = t in "NS"
            expect = domino_type(x, y, horizontal, self.size)
            if expect != t:
                raise MalformedTiling(f"domino ({t},{x},{y}) should be type {expect}")


def tiling_from_matching(spec: WeightSpec, size: int, matching) -> Tiling:
    doms = []
    for (v1, v2) in matching:
        (x1, y1), (x2, y2) = sorted([v1, v2])
        horizontal = y1 == y2
        doms.append((domino_type(x1, y1, horizontal, size), x1, y1))
    return Tiling(spec=spec, size=size, dominoes=tuple(sorted(doms)))


# ---------------------------------------------------------------------------
# Weight tables and urban renewal
# ---------------------------------------------------------------------------
#
# An edge is keyed by (orientation, (x+y) mod 4k, (x-y) mod 4) where (x, y)
# is its left/bottom vertex; this is a fundamental domain of the translation
# lattice generated by (2,-2) and (2k,2k) (the index-2 parity-preserving
# sublattice of the weighting's period lattice).

def _edge_key(k: int, horizontal: bool, x: int, y: int):
    return (horizontal, (x + y) % (4 * k), (x - y) % 4)


def _block_anchor(x: int, y: int, horizontal: bool, gen: int):
    """Anchor of the unique generation-``gen`` block containing the edge.

    Generation-m blocks are the 2x2 vertex squares anchored at (x0, y0) with
    x0 + y0 = m + 1 (mod 2).
    """
    c = (gen + 1) % 2
    if horizontal:
        y0 = y if (x + y) % 2 == c else y - 1
        return (x, y0)
    x0 = x if (x + y) % 2 == c else x - 1
    return (x0, y)


class WeightTables:
    """Per-generation periodic edge weights W_m, m = 1..M."""

    def __init__(self, spec: WeightSpec, M: int):
        self.spec = spec
        self.M = M
        k = spec.k
        top: dict = {}
        for x in range(4 * k):
            for y in range(4 * k):
                for horizontal in (True, False):
                    key = _edge_key(k, horizontal, x, y)
                    if key not in top:
                        dx, dy = (1, 0) if horizontal else (0, 1)
                        top[key] = edge_weight(spec, M, (x, y), (x + dx, y + dy))
        self.tables = {M: top}
        for m in range(M, 1, -1):
            self.tables[m - 1] = self._renew(self.tables[m], m)

    def weight(self, m: int, horizontal: bool, x: int, y: int) -> float:
        return self.tables[m][_edge_key(self.spec.k, horizontal, x, y)]

    def block_weights(self, m: int, x0: int, y0: int):
        """(w_horizontal_pair, w_vertical_pair) of the block anchored (x0,y0)."""
        w = self.tables[m]
        k = self.spec.k
        wh = w[_edge_key(k, True, x0, y0)] * w[_edge_key(k, True, x0, y0 + 1)]
        wv = w[_edge_key(k, False, x0, y0)] * w[_edge_key(k, False, x0 + 1, y0)]
        return wh, wv

    def _renew(self, table: dict, m: int) -> dict:
        """Urban renewal: weights of generation m-1 from generation m."""
        k = self.spec.k
        new: dict = {}
        for x in range(4 * k):
            for y in range(4 * k):
                for horizontal in (True, False):
                    key = _edge_key(k, horizontal, x, y)
                    if key in new:
                        continue
                    x0, y0 = _block_anchor(x, y, horizontal, m)
                    wh = table[_edge_key(k, True, x0, y0)] * \
                        table[_edge_key(k, True, x0, y0 + 1)]
                    wv = table[_edge_key(k, False, x0, y0)] * \
                        table[_edge_key(k, False, x0 + 1, y0)]
                    delta = wh + wv
                    if horizontal:
                        opp = table[_edge_key(k, True, x0, 2 * y0 + 1 - y)]
                    else:
                        opp = table[_edge_key(k, False, 2 * x0 + 1 - x, y0)]
                    new[key] = opp / delta
        return new


# ---------------------------------------------------------------------------
# Weighted domino shuffling
# ---------------------------------------------------------------------------

def _in_diamond(x: int, y: int, M: int, m: int) -> bool:
    """Vertex of the generation-m diamond (concentric inside the final one)."""
    c = M - 0.5
    return abs(x - c) + abs(y - c) <= m


def _shuffle_step(doms: list, m: int, tables: WeightTables, coin) -> list:
    """One growth step: destruction, sliding, creation into generation m.

    ``doms`` is a list of (type, x, y) for generation m-1; ``coin(p)`` returns
    True with probability p (horizontal pair) for each creation block.
    """
    M = tables.M
    # destruction: two parallel dominoes filling one generation-m block collide
    by_block: dict = {}
    for d in doms:
        t, x, y = d
        x0, y0 = _block_anchor(x, y, t in "NS", m)
        by_block.setdefault((x0, y0), []).append(d)
    survivors = []
    for blk, group in by_block.items():
        if len(group) == 2 and group[0][0] in "NS" and group[1][0] in "NS":
            continue
        if len(group) == 2 and group[0][0] in "EW" and group[1][0] in "EW":
            continue
        survivors.extend(group)

    # sliding (types recomputed: the coloring reference advances with m)
    slid = []
    occupied = set()
    for t, x, y in survivors:
        dx, dy = DIRS[t]
        nx, ny = x + dx, y + dy
        horizontal = t in "NS"
        nt = domino_type(nx, ny, horizontal, m)
        slid.append((nt, nx, ny))
        ex, ey = (1, 0) if horizontal else (0, 1)
        occupied.add((nx, ny))
        occupied.add((nx + ex, ny + ey))

    # creation: the uncovered part of the generation-m diamond splits into
    # 2x2 blocks of the generation-m anchor class
    empty = {v for v in _gen_vertices(M, m) if v not in occupied}
    c = (m + 1) % 2
    out = list(slid)
    seen = set()
    for (x, y) in sorted(empty):
        if (x, y) in seen:
            continue
        if (x + y) % 2 != c:
            raise MalformedTiling(f"empty cell {(x, y)} is not a block anchor")
        block = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]
        if any(v not in empty for v in block):
            raise MalformedTiling(f"partial empty block at {(x, y)}")
        seen.update(block)
        wh, wv = tables.block_weights(m, x, y)
        if coin(wh / (wh + wv)):
            out.append((domino_type(x, y, True, m), x, y))
            out.append((domino_type(x, y + 1, True, m), x, y + 1))
        else:
            out.append((domino_type(x, y, False, m), x, y))
            out.append((domino_type(x + 1, y, False, m), x + 1, y))
    return out


def _gen_vertices(M: int, m: int):
    c = M - 0.5
    lo = int(math.ceil(c - m))
    hi = int(math.floor(c + m))
    out = []
    for x in range(lo, hi + 1):
        for y in range(lo, hi + 1):
            if abs(x - c) + abs(y - c) <= m:
                out.append((x, y))
    return out


def _prob_lookup(tables: WeightTables, m: int) -> np.ndarray:
    """P[(x0+y0) % 4k, (x0-y0) % 4] = P(horizontal pair) for creation blocks."""
    k = tables.spec.k
    P = np.full((4 * k, 4), np.nan)
    for s in range(4 * k):
        for d in range(4):
            if (s - d) % 2 != 0:
                continue
            # reconstruct one representative anchor with these residues
            x0 = (s + d) // 2
            y0 = (s - d) // 2
            wh, wv = tables.block_weights(m, x0, y0)
            P[s, d] = wh / (wh + wv)
    return P


class Shuffler:
    """Reusable weighted-shuffling sampler for one (spec, N) pair.

    Precomputes the per-generation weight tables once; each draw is a pass of
    vectorized destruction / slide / creation steps.
    """

    def __init__(self, spec: WeightSpec, N: int):
        if N % 2 != 0 or N < 2:
            raise OddN(f"N must be a positive even integer, got {N}")
        self.spec = spec
        self.N = N
        self.M = spec.k * N
        tables = WeightTables(spec, self.M)
        self.probs = {m: _prob_lookup(tables, m) for m in range(1, self.M + 1)}
        n = 2 * self.M
        self.X, self.Y = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        self.par = (self.X + self.Y) % 2
        self.absd = np.abs(self.X - (self.M - 0.5)) + np.abs(self.Y - (self.M - 0.5))

    def draw(self, rng) -> Tiling:
        doms = _vector_shuffle(self.spec, self.M, self.probs, self.X, self.Y,
                               self.par, self.absd, rng)
        return Tiling(spec=self.spec, size=self.M, dominoes=doms)


def sample_tiling(spec: WeightSpec, N: int, seed=None, stream: int = 0,
                  shuffler: Shuffler | None = None) -> Tiling:
    """Draw one exact sample of the size-kN diamond by weighted shuffling."""
    if shuffler is None:
        shuffler = Shuffler(spec, N)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
                                if seed is not None else None)
    t = shuffler.draw(rng)
    return Tiling(spec=t.spec, size=t.size, dominoes=t.dominoes, seed=(seed, stream))


def _vector_shuffle(spec, M, probs, X, Y, par, absd, rng):
    k = spec.k
    n = 2 * M
    horiz = np.zeros((n, n), dtype=bool)   # anchor of a horizontal domino
    vert = np.zeros((n, n), dtype=bool)    # anchor of a vertical domino

    for m in range(1, M + 1):
        sl = slice(max(0, M - m - 2), min(n, M + m + 2))
        H = horiz[sl, sl]
        V = vert[sl, sl]
        anchor = par[sl, sl] == (m + 1) % 2

        # destruction: two parallel dominoes filling one generation-m block
        bad_h = anchor & H
        bad_h[:, :-1] &= H[:, 1:]
        bad_h[:, -1] = False
        H[bad_h] = False
        tmp = np.zeros_like(H)
        tmp[:, 1:] = bad_h[:, :-1]
        H[tmp] = False

        bad_v = anchor & V
        bad_v[:-1, :] &= V[1:, :]
        bad_v[-1, :] = False
        V[bad_v] = False
        tmp = np.zeros_like(V)
        tmp[1:, :] = bad_v[:-1, :]
        V[tmp] = False

        # sliding: dark-anchored horizontals move south, light north;
        # dark-anchored verticals move west, light east (darkness at m-1)
        dark = (X[sl, sl] + Y[sl, sl] - (m - 1)) % 2 == 1
        hs = H & dark
        hn = H & ~dark
        vw = V & dark
        ve = V & ~dark
        H2 = np.zeros_like(H)
        V2 = np.zeros_like(V)
        H2[:, :-1] |= hs[:, 1:]
        H2[:, 1:] |= hn[:, :-1]
        V2[:-1, :] |= vw[1:, :]
        V2[1:, :] |= ve[:-1, :]

        # creation
        cover = H2.copy()
        cover[1:, :] |= H2[:-1, :]
        cover |= V2
        cover[:, 1:] |= V2[:, :-1]
        empty = (absd[sl, sl] <= m) & ~cover
        blocks = empty & anchor
        blocks[:-1, :] &= empty[1:, :]
        blocks[-1, :] = False
        blocks[:, :-1] &= empty[:, 1:]
        blocks[:, -1] = False
        blocks[:-1, :-1] &= empty[1:, 1:]
        bx, by = np.nonzero(blocks)
        if len(bx) and 4 * len(bx) != int(empty.sum()):
            # candidate anchors may overlap; take them greedily in scan order
            taken = np.zeros_like(empty)
            keep = []
            for x0, y0 in zip(bx, by):
                if taken[x0:x0 + 2, y0:y0 + 2].any():
                    continue
                taken[x0:x0 + 2, y0:y0 + 2] = True
                keep.append((x0, y0))
            bx = np.array([x for x, _ in keep], dtype=int)
            by = np.array([y for _, y in keep], dtype=int)
        if 4 * len(bx) != int(empty.sum()):
            raise MalformedTiling(
                f"generation {m}: empty region is not a union of blocks")
        off = sl.start
        P = probs[m]
        p = P[(bx + by + 2 * off) % (4 * k), (bx - by) % 4]
        take_h = rng.random(len(bx)) < p
        hx, hy = bx[take_h], by[take_h]
        H2[hx, hy] = True
        H2[hx, hy + 1] = True
        vx, vy = bx[~take_h], by[~take_h]
        V2[vx, vy] = True
        V2[vx + 1, vy] = True
        horiz[sl, sl] = H2
        vert[sl, sl] = V2

    doms = []
    for x, y in zip(*np.nonzero(horiz)):
        doms.append((domino_type(int(x), int(y), True, M), int(x), int(y)))
    for x, y in zip(*np.nonzero(vert)):
        doms.append((domino_type(int(x), int(y), False, M), int(x), int(y)))
    return tuple(sorted(doms))


def chain_distribution(spec: WeightSpec, M: int) -> dict:
    """Exact distribution of the shuffling chain at size M (tiny M only).

    Expands every coin outcome; used to validate the sampler against the
    enumeration oracle without Monte Carlo noise.
    """
    tables = WeightTables(spec, M)
    states = {(): 1.0}
    for m in range(1, M + 1):
        new: dict = {}
        for doms, prob in states.items():
            # dry run to count creation blocks
            probs: list = []
            _shuffle_step(list(doms), m, tables, lambda p: probs.append(p) or True)
            nblocks = len(probs)
            for mask in range(2 ** nblocks):
                choices = [(mask >> i) & 1 == 1 for i in range(nblocks)]
                it = iter(choices)
                weight = [1.0]

                def coin(p, it=it, weight=weight):
                    take = next(it)
                    weight[0] *= p if take else (1.0 - p)
                    return take

                out = _shuffle_step(list(doms), m, tables, coin)
                key = tuple(sorted(out))
                new[key] = new.get(key, 0.0) + prob * weight[0]
        states = new
    return states


# ---------------------------------------------------------------------------
# Tiling -> non-intersecting paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParticleConfig:
    """Per-column occupied heights of the 2n-path system of a tiling."""

    size: int
    columns: tuple   # tuple of frozensets, index 0..2kN
    n_paths: int

    def height(self, u: int, v: int) -> int:
        """h(u, v): number of points at column u with height label >= v."""
        n2 = self.size
        return sum(1 for h in self.columns[u] if h - n2 >= v)


def tiling_to_paths(t: Tiling) -> ParticleConfig:
    """Map a tiling to its path system, extended to pinned endpoints.

    Path points: the j-th path (bottom up, j = 1..kN) starts at height j-1,
    alternates unit steps (into odd columns) with free slides (into even
    columns), and ends its tiling part at its pass-through point; the
    remainder is completed canonically by an immediate descent to the pinned
    endpoint -kN + j - 1.
    """
    M = t.size
    cover = t.cover_map()
    types = {}
    for tt, x, y in t.dominoes:
        dx, dy = (1, 0) if tt in "NS" else (0, 1)
        types[(x, y)] = types[(x + dx, y + dy)] = (tt, (x, y))

    # entry points: dark cells on the southwest edge x + y = M - 1, walked
    # bottom-up so path j starts at height j - 1
    starts = sorted([(x, M - 1 - x) for x in range(M)], key=lambda v: v[1])

    # walk the segments: each segment goes from a dark cell to the light cell
    # of the same domino; continue east into the next dark cell.
    def segment_steps(bx, by):
        """Yield step codes along the path starting at dark cell (bx, by)."""
        x, y = bx, by
        while True:
            tt, anchor = types[(x, y)]
            ax, ay = anchor
            if tt in "EW":  # vertical
                if _black(ax, ay, M):
                    code = "level"      # rising segment (dark cell below)
                    wx, wy = ax, ay + 1
                else:
                    code = "fall"       # sliding segment (dark cell on top)
                    wx, wy = ax, ay
            else:           # horizontal
                if _black(ax, ay, M):
                    code = "drop"       # unit down-step (dark cell on the left)
                    wx, wy = ax + 1, ay
                else:
                    raise MalformedTiling("path ran into a blank domino")
            yield code
            nx, ny = wx + 1, wy
            if (nx, ny) not in types:
                return
            x, y = nx, ny

    n2 = M
    columns = [dict() for _ in range(2 * M + 1)]
    ends = {}
    for j, (bx, by) in enumerate(starts, start=1):
        u = j - 1
        a = 0  # advances taken
        columns[0][j] = u
        for code in segment_steps(bx, by):
            if code in ("level", "drop"):
                if a >= 1:
                    columns[2 * a][j] = u  # close the slide after advance a
                a += 1
                u -= 1 if code == "drop" else 0
                columns[2 * a - 1][j] = u
            else:  # fall: one unit of the free slide
                u -= 1
        if a >= 1:
            columns[2 * a][j] = u
        ends[j] = (2 * a, u)

    # canonical completion beyond the tiling part: a unit step down, then an
    # immediate free descent to the pinned endpoint -kN + j - 1
    out_cols = []
    for c in range(0, 2 * M + 1):
        vals = dict(columns[c])
        for j in range(1, n2 + 1):
            if j in vals:
                continue
            c_end, u_end = ends[j]
            if c <= c_end:
                raise MalformedTiling(f"path {j} missing at column {c} <= {c_end}")
            target = -M + j - 1
            if c == c_end + 1 and c % 2 == 1:
                vals[j] = max(u_end - 1, target)
            else:
                vals[j] = target
        if len(vals) != n2:
            raise MalformedTiling(f"column {c} holds {len(vals)} != {n2} paths")
        heights = sorted(vals.values())
        if len(set(heights)) != n2:
            raise MalformedTiling(f"column {c} heights collide: {heights}")
        out_cols.append(frozenset(heights))
    return ParticleConfig(size=M, columns=tuple(out_cols), n_paths=n2 // 2)


# ---------------------------------------------------------------------------
# Empirical statistics
# ---------------------------------------------------------------------------

def empirical_stats(configs, queries) -> dict:
    """Means and CLT standard errors of height / occupation / pair queries.

    queries: list of ("height", u, v) or ("occupation", col, label) or
    ("pair", (col, label), (col, label)); labels are kernel heights 2*xi + i.
    """
    configs = list(configs)
    if len(configs) < 2:
        raise EmptyQuery("need at least two configurations")
    if not queries:
        raise EmptyQuery("no queries given")
    out = {}
    for q in queries:
        kind = q[0]
        vals = []
        for cfg in configs:
            n2 = cfg.size
            if kind == "height":
                _, u, v = q
                vals.append(cfg.height(u, v))
            elif kind == "occupation":
                _, col, label = q
                vals.append(1.0 if (label + n2) in cfg.columns[col] else 0.0)
            elif kind == "pair":
                _, a, b = q
                ok = (a[1] + n2) in cfg.columns[a[0]] and (b[1] + n2) in cfg.columns[b[0]]
                vals.append(1.0 if ok else 0.0)
            else:
                raise EmptyQuery(f"unknown query kind {kind!r}")
        arr = np.asarray(vals, dtype=float)
        out[q] = (float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr))))
    return out


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_PALETTE = {
    ("N", 0): "#d62728", ("N", 1): "#ff9896",
    ("S", 0): "#1f77b4", ("S", 1): "#aec7e8",
    ("E", 0): "#2ca02c", ("E", 1): "#98df8a",
    ("W", 0): "#9467bd", ("W", 1): "#c5b0d5",
}


def render_svg(t: Tiling, unit: float = 10.0) -> str:
    """One rectangle per domino, colored by type and sublattice parity."""
    M = t.size
    side = 2 * M * unit
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{side:.0f}" '
        f'height="{side:.0f}" viewBox="0 0 {2 * M} {2 * M}">',
        f'<rect width="{2 * M}" height="{2 * M}" fill="white"/>',
    ]
    for tt, x, y in sorted(t.dominoes):
        w, h = (2, 1) if tt in "NS" else (1, 2)
        par = ((x + y) % 4) // 2
        color = _PALETTE[(tt, par)]
        # flip y so the picture is not upside down
        py = 2 * M - (y + h) - 0.5
        parts.append(
            f'<rect x="{x - 0.5}" y="{py}" width="{w}" height="{h}" '
            f'fill="{color}" stroke="black" stroke-width="0.06"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
