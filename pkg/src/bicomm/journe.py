"""Rectangle combinatorics: maximal rectangles, embeddedness, thinning.

Implements the geometric side of the two-parameter theory on the cell
grid: maximal dyadic rectangles of an open set, the two-fold enlargement
built from iterated one-parameter maximal functions, the embeddedness
quantities mu (centered dilation inside the enlargement) and nu
(first-axis dilation inside the strong-maximal half-level set), the
weighted rectangle sum they control, bad classes, arithmetic-progression
thinning, scale strata, partial-order pair classification, maximal
truncations of wavelet sums, and the row-of-squares example separating
nu from mu.

Dilations never wrap: the grid is treated as a window on the plane, and
any part of a dilate falling outside [0,1)^2 fails containment.  The
supremum defining mu and nu is attained at a grid-line crossing of the
dilate boundary and is computed exactly over those finitely many
crossing values, with Fraction arithmetic so non-dyadic square sizes
(the row of squares has side 3 cells and period 5) stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import CellRect, CellSet, DyadicRectangle, maximal_1d, strong_maximal
from .wavelets import DEFAULT_PROFILE, WaveletCoefficients, j_max, _wavelet_samples


@dataclass(frozen=True)
class RectCollection:
    """A duplicate-free collection of dyadic rectangles at resolution n.

    Rectangles are kept sorted by (j1, k1, j2, k2).  attrs carries
    optional per-rectangle annotations (mu, stratum, tag) produced by the
    operations below; it does not participate in equality.
    """

    n: int
    rectangles: tuple[DyadicRectangle, ...]
    attrs: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rects = tuple(sorted(set(self.rectangles)))
        if len(rects) != len(self.rectangles):
            raise ValueError("duplicate rectangles in collection")
        for R in rects:
            j1, j2 = R.scales
            if j1 > self.n or j2 > self.n:
                raise ValueError(f"{R} is finer than resolution {self.n}")
        object.__setattr__(self, "rectangles", rects)

    def __iter__(self):
        return iter(self.rectangles)

    def __len__(self) -> int:
        return len(self.rectangles)

    def __contains__(self, R: DyadicRectangle) -> bool:
        return R in set(self.rectangles)


@dataclass(frozen=True)
class EmbeddednessReport:
    """mu and nu for one rectangle; delta records the enlargement used."""

    rectangle: object
    mu: float
    nu: float
    delta: float


def _integral_image(mask: np.ndarray) -> np.ndarray:
    m = mask.shape[0]
    ii = np.zeros((m + 1, m + 1), dtype=np.int64)
    np.cumsum(np.cumsum(mask, axis=0), axis=1, out=ii[1:, 1:])
    return ii


def maximal_rectangles(U: CellSet) -> RectCollection:
    """All dyadic rectangles inside U that are maximal under inclusion.

    A contained rectangle is non-maximal exactly when widening it one
    dyadic level in some axis stays inside U, so it suffices to test the
    two axis parents.
    """
    n = U.n
    ii = _integral_image(U.mask)
    contained = {}
    for j1 in range(n + 1):
        w1 = 1 << (n - j1)
        r = np.arange(1 << j1) * w1
        for j2 in range(n + 1):
            w2 = 1 << (n - j2)
            c = np.arange(1 << j2) * w2
            box = (
                ii[np.ix_(r + w1, c + w2)]
                - ii[np.ix_(r, c + w2)]
                - ii[np.ix_(r + w1, c)]
                + ii[np.ix_(r, c)]
            )
            contained[j1, j2] = box == w1 * w2
    rects = []
    for j1 in range(n + 1):
        k1 = np.arange(1 << j1)
        for j2 in range(n + 1):
            k2 = np.arange(1 << j2)
            good = contained[j1, j2].copy()
            if j1 > 0:
                good &= ~contained[j1 - 1, j2][(k1 // 2)[:, None], k2[None, :]]
            if j2 > 0:
                good &= ~contained[j1, j2 - 1][k1[:, None], (k2 // 2)[None, :]]
            for a, b in np.argwhere(good):
                rects.append(DyadicRectangle.from_indices(j1, int(a), j2, int(b)))
    return RectCollection(n, tuple(rects))


def enlargement(U: CellSet, delta: float) -> CellSet:
    """V = V12 | V21, each a composition of thresholded 1D maximal functions.

    V12 = {M1 1_{{M2 1_U > delta}} > delta} and symmetrically; thresholds
    are strict.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0,1)")
    n = U.n
    inner2 = CellSet(n, maximal_1d(U, 2) > delta)
    inner1 = CellSet(n, maximal_1d(U, 1) > delta)
    v12 = maximal_1d(inner2, 1) > delta
    v21 = maximal_1d(inner1, 2) > delta
    return CellSet(n, v12 | v21)


def _axis_crossings(center: Fraction, half: Fraction, m: int) -> list[Fraction]:
    """Dilation factors at which an edge of the centered dilate meets a grid line."""
    out = []
    for p in range(m + 1):
        line = Fraction(p, m)
        if line != center:
            out.append(abs(line - center) / half)
    return out


def _raster_span(center: Fraction, half: Fraction, lam: Fraction, m: int) -> tuple[int, int]:
    """Cells with positive-measure overlap with the dilated interval."""
    lo = (center - lam * half) * m
    hi = (center + lam * half) * m
    return math.floor(lo), math.ceil(hi)


def _box_inside(ii: np.ndarray, r0: int, r1: int, c0: int, c1: int) -> bool:
    m = ii.shape[0] - 1
    if r0 < 0 or c0 < 0 or r1 > m or c1 > m:
        return False
    count = int(ii[r1, c1] - ii[r0, c1] - ii[r1, c0] + ii[r0, c0])
    return count == (r1 - r0) * (c1 - c0)


def embeddedness(
    R,
    V: CellSet,
    mode: str = "both_axes",
    U: CellSet | None = None,
    delta: float = float("nan"),
) -> EmbeddednessReport:
    """mu and nu of a rectangle: how far it dilates inside the enlargement.

    mu is the largest lambda with the centered dilate lambda*R (both axes
    scaled) rasterized inside V.  nu scales the first axis only and asks
    for containment in {strong_maximal(1_U) > 1/2}; it needs U, which is
    mandatory for mode='first_axis_only' and optional otherwise (nu is
    NaN when U is absent).  R may be a DyadicRectangle or a CellRect.
    """
    if mode not in ("both_axes", "first_axis_only"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "first_axis_only" and U is None:
        raise ValueError("mode='first_axis_only' requires U")
    n = V.n
    m = 1 << n
    cr = R.to_cellrect(n) if isinstance(R, DyadicRectangle) else R
    c1, c2 = cr.center
    w1, w2 = cr.widths
    h1, h2 = w1 / 2, w2 / 2

    ii = _integral_image(V.mask)
    mu = Fraction(0)
    crossings = sorted(set(_axis_crossings(c1, h1, m) + _axis_crossings(c2, h2, m)))
    for lam in crossings:
        r0, r1 = _raster_span(c1, h1, lam, m)
        q0, q1 = _raster_span(c2, h2, lam, m)
        if not _box_inside(ii, r0, r1, q0, q1):
            break
        mu = lam

    nu = float("nan")
    if U is not None:
        level = CellSet(n, strong_maximal(U) > 0.5)
        iiw = _integral_image(level.mask)
        best = Fraction(0)
        for lam in sorted(set(_axis_crossings(c1, h1, m))):
            r0, r1 = _raster_span(c1, h1, lam, m)
            if not _box_inside(iiw, r0, r1, cr.a2, cr.b2):
                break
            best = lam
        nu = float(best)
    return EmbeddednessReport(R, float(mu), nu, delta)


@dataclass(frozen=True)
class JourneSum:
    value: float
    ratio: float
    table: tuple[EmbeddednessReport, ...]


def journe_sum(U: CellSet, delta: float, epsilon: float) -> JourneSum:
    """sum over maximal rectangles of mu_delta(R)^(-epsilon) |R|, and its ratio to |U|.

    Every maximal rectangle sits inside U, and U sits inside its
    enlargement, so each mu is at least 1 and each term is at most |R|.
    """
    if not 0.0 < delta < 1.0 or not 0.0 < epsilon < 1.0:
        raise ValueError("delta and epsilon must lie in (0,1)")
    V = enlargement(U, delta)
    reports = []
    total = 0.0
    for R in maximal_rectangles(U):
        rep = embeddedness(R, V, delta=delta)
        reports.append(rep)
        total += rep.mu**-epsilon * R.area
    meas = U.measure()
    ratio = total / meas if meas > 0.0 else 0.0
    return JourneSum(total, ratio, tuple(reports))


def _axis_scale(R: DyadicRectangle, axis: int) -> int:
    return R.interval1.j if axis == 1 else R.interval2.j


def bad_class(S: RectCollection, axis: int, gamma: float) -> RectCollection:
    """Members covered more than gamma-fraction by strictly axis-wider peers.

    R is bad when the union of the rectangles of S - {R} whose side in
    the given axis is strictly longer than R's covers more than gamma|R|
    of R.  Coverage is exact cell counting; the inequality is strict.
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    n = S.n
    spans = {
        R: (R.interval1.cell_span(n), R.interval2.cell_span(n)) for R in S
    }
    bad = []
    for R in S:
        (r0, r1), (c0, c1) = spans[R]
        cover = np.zeros((r1 - r0, c1 - c0), dtype=bool)
        for other in S:
            if other == R or _axis_scale(other, axis) >= _axis_scale(R, axis):
                continue
            (a0, a1), (b0, b1) = spans[other]
            x0, x1 = max(a0, r0), min(a1, r1)
            y0, y1 = max(b0, c0), min(b1, c1)
            if x0 < x1 and y0 < y1:
                cover[x0 - r0 : x1 - r0, y0 - c0 : y1 - c0] = True
        if int(cover.sum()) * 4.0**-n > gamma * R.area:
            bad.append(R)
    return RectCollection(n, tuple(bad))


def thin_collection(S: RectCollection, mu: float, gamma: float) -> list[RectCollection]:
    """Split S by scale residues mod d so comparable sides are far apart.

    d = ceil(log2(32 mu / (1 - gamma))).  Within a subclass, two distinct
    side lengths in the same axis differ by a factor of at least 2^d,
    which exceeds 16 mu (1 - gamma)^{-1}.  Returns the nonempty
    subclasses in residue order.
    """
    if mu < 1.0:
        raise ValueError("mu must be at least 1")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    d = math.ceil(math.log2(32.0 * mu / (1.0 - gamma)))
    groups: dict[tuple[int, int], list[DyadicRectangle]] = {}
    for R in S:
        j1, j2 = R.scales
        groups.setdefault((j1 % d, j2 % d), []).append(R)
    return [RectCollection(S.n, tuple(v)) for _, v in sorted(groups.items())]


def partition_pairs(W: RectCollection, U: RectCollection) -> dict[str, list]:
    """Classify comparable pairs (R', R) by which axes R' is much smaller in.

    Pairs range over W x U with |R'_j| <= 4|R_j| in both axes.  R' is
    small in axis j when 8|R'_j| <= |R_j|.  Tags: '<' small in both,
    '<1' small only in axis 1, '<2' small only in axis 2, and the
    remaining comparable pairs land in the catch-all tag. The four lists
    partition the pair set.
    """
    out: dict[str, list] = {"<": [], "<1": [], "<2": [], "≃": []}
    for Rp in W:
        jp1, jp2 = Rp.scales
        for R in U:
            j1, j2 = R.scales
            if jp1 < j1 - 2 or jp2 < j2 - 2:
                continue
            small1 = jp1 >= j1 + 3
            small2 = jp2 >= j2 + 3
            if small1 and small2:
                tag = "<"
            elif small1:
                tag = "<1"
            elif small2:
                tag = "<2"
            else:
                tag = "≃"
            out[tag].append((Rp, R))
    return out


def stratify(Ucol: RectCollection, V: CellSet) -> dict[int, RectCollection]:
    """Group rectangles by dyadic strata of mu: k=0 for mu <= 1, else 2^{k-1} < mu <= 2^k."""
    buckets: dict[int, list[DyadicRectangle]] = {}
    attrs: dict[DyadicRectangle, dict] = {}
    for R in Ucol:
        mu = embeddedness(R, V).mu
        k = 0 if mu <= 1.0 else math.ceil(math.log2(mu))
        buckets.setdefault(k, []).append(R)
        attrs[R] = {"mu": mu, "stratum": k}
    return {
        k: RectCollection(Ucol.n, tuple(v), {R: attrs[R] for R in v})
        for k, v in sorted(buckets.items())
    }


def maximal_truncation(c: WaveletCoefficients, A: RectCollection, N: int) -> np.ndarray:
    """Pointwise sup over scale cutoffs of partial wavelet sums from A.

    The truncation sums coefficients on rectangles of A that are much
    coarser than a reference rectangle (factor 8 in both axes), and the
    reference enters only through its pair of scales; so the sup is over
    the finite lattice of per-axis scale cutoffs, including the empty sum.
    """
    J = c.max_scale
    if J > j_max(N):
        raise ValueError("coefficient scales exceed the wavelet range for N")
    W = _wavelet_samples(N, J, DEFAULT_PROFILE)
    keep = np.zeros_like(c.matrix, dtype=bool)
    for R in A:
        j1, j2 = R.scales
        if j1 > J or j2 > J:
            raise ValueError(f"{R} is finer than the coefficient lattice")
        a = WaveletCoefficients.interval_index(j1, R.interval1.k)
        b = WaveletCoefficients.interval_index(j2, R.interval2.k)
        keep[a, b] = True
    mat = np.where(keep, c.matrix, 0.0)
    field = np.zeros((N, N))
    running = [np.zeros((N, N), dtype=complex) for _ in range(J + 1)]
    for t2 in range(J + 1):
        cols = slice(2**t2 - 1, 2 ** (t2 + 1) - 1)
        for j1 in range(J + 1):
            rows = slice(2**j1 - 1, 2 ** (j1 + 1) - 1)
            running[j1] += W[rows].T @ mat[rows, cols] @ W[cols]
        total = np.zeros((N, N), dtype=complex)
        for t1 in range(J + 1):
            total = total + running[t1]
            np.maximum(field, np.abs(total), out=field)
    return field


@dataclass(frozen=True)
class RowOfSquares:
    """A horizontal row of K congruent squares and its layout parameters."""

    cells: CellSet
    squares: tuple[CellRect, ...]
    middle: CellRect
    n: int
    side: int
    period: int


def row_of_squares(K: int, density: float = 0.6) -> RowOfSquares:
    """K evenly spaced congruent squares in a horizontal row.

    The squares occupy `side` cells of every `period` cells along the
    first axis, with side/period matching the requested density (> 1/2,
    so the strong-maximal half-level set spans the whole row).  The grid
    resolution is the smallest n fitting K periods.
    """
    if K < 2:
        raise ValueError("need at least two squares")
    frac = Fraction(density).limit_denominator(64)
    if frac <= Fraction(1, 2) or frac >= 1:
        raise ValueError(f"infeasible layout: density {density} not in (1/2, 1)")
    side, period = frac.numerator, frac.denominator
    n = math.ceil(math.log2(K * period))
    m = 1 << n
    if K * period > m or side > m:
        raise ValueError("infeasible layout: row does not fit the grid")
    mask = np.zeros((m, m), dtype=bool)
    squares = []
    for q in range(K):
        a = q * period
        squares.append(CellRect(n, a, a + side, 0, side))
        mask[a : a + side, 0:side] = True
    return RowOfSquares(CellSet(n, mask), tuple(squares), squares[K // 2], n, side, period)
