"""Rectangular and product BMO functionals on wavelet coefficients.

The rectangular functional is an exact supremum over dyadic rectangles,
computed by accumulating coefficient energy over the dyadic tree in each
axis.  The product functional's supremum over open sets is approximated
from below by unions of grid cells: a greedy search over dyadic squares
seeded at the rectangular witness, or an exhaustive scan of every cell
union when the grid is small enough to afford it (resolution n <= 2).
Estimates carry the witness set achieving them so certificates can be
re-checked after the fact.

Open sets are always unions of cells of the 2^n x 2^n partition; an
arbitrary open set's coefficient sum is approached from within by such
unions as n grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import CellSet, DyadicRectangle
from .wavelets import WaveletCoefficients

_EXHAUSTIVE_MAX_SCALE = 2
_CERT_TOL = 1e-12


def _interval_meta(max_scale: int) -> tuple[np.ndarray, np.ndarray]:
    """Scale and position arrays for interval indices 0..2^(J+1)-2."""
    js = []
    ks = []
    for j in range(max_scale + 1):
        js.append(np.full(2**j, j, dtype=np.int64))
        ks.append(np.arange(2**j, dtype=np.int64))
    return np.concatenate(js), np.concatenate(ks)


def _containment_matrix(max_scale: int) -> np.ndarray:
    """C[a, b] = True when interval b is contained in interval a."""
    j, k = _interval_meta(max_scale)
    dj = j[None, :] - j[:, None]
    shifted = k[None, :] >> np.maximum(dj, 0)
    return (dj >= 0) & (shifted == k[:, None])


def _subtree_energy(c: WaveletCoefficients) -> np.ndarray:
    """E[a1, a2] = sum of |c_R|^2 over rectangles R inside I_{a1} x I_{a2}."""
    C = _containment_matrix(c.max_scale).astype(np.float64)
    A = np.abs(c.matrix) ** 2
    return C @ A @ C.T


def _interval_spans(max_scale: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-open cell spans of every interval index on the 2^n grid.

    Intervals finer than a cell map to the single cell containing them.
    """
    j, k = _interval_meta(max_scale)
    coarse = j <= n
    start = np.where(coarse, k << np.maximum(n - j, 0), k >> np.maximum(j - n, 0))
    stop = np.where(coarse, (k + 1) << np.maximum(n - j, 0), start + 1)
    return start.astype(np.int64), stop.astype(np.int64)


def _integral_image(mask: np.ndarray) -> np.ndarray:
    m = mask.shape[0]
    ii = np.zeros((m + 1, m + 1), dtype=np.int64)
    np.cumsum(np.cumsum(mask, axis=0), axis=1, out=ii[1:, 1:])
    return ii


def rectangles_inside(U: CellSet, max_scale: int) -> np.ndarray:
    """Boolean (K, K) array marking rectangles contained in the cell union.

    Entry [a1, a2] corresponds to the rectangle I_{a1} x I_{a2} in interval
    index order; containment means every covered cell of U's grid lies in U.
    """
    s0, s1 = _interval_spans(max_scale, U.n)
    ii = _integral_image(U.mask)
    box = (
        ii[np.ix_(s1, s1)]
        - ii[np.ix_(s0, s1)]
        - ii[np.ix_(s1, s0)]
        + ii[np.ix_(s0, s0)]
    )
    counts = (s1 - s0)[:, None] * (s1 - s0)[None, :]
    return box == counts


def coefficient_energy(c: WaveletCoefficients, U: CellSet) -> float:
    """Sum of |c_R|^2 over rectangles contained in U."""
    inside = rectangles_inside(U, c.max_scale)
    return float(np.sum(np.abs(c.matrix) ** 2 * inside))


@dataclass(frozen=True)
class BmoEstimate:
    """A lower bound for a BMO-type supremum together with its witness.

    exact=True means the search space was covered exhaustively (all dyadic
    rectangles for the rectangular functional, all cell unions for the
    product functional at tiny resolution), so the value is the supremum
    over that space rather than a bound.
    """

    value: float
    witness: CellSet
    exact: bool

    def recheck(self, c: WaveletCoefficients) -> bool:
        """Certificate: value^2 * |witness| <= energy inside the witness."""
        lhs = self.value**2 * self.witness.measure()
        return lhs <= coefficient_energy(c, self.witness) + _CERT_TOL

    def to_json(self) -> dict:
        return {"value": self.value, "witness": self.witness.to_json(), "exact": self.exact}

    @classmethod
    def from_json(cls, obj: dict) -> "BmoEstimate":
        return cls(float(obj["value"]), CellSet.from_json(obj["witness"]), bool(obj["exact"]))


def rect_bmo(c: WaveletCoefficients) -> BmoEstimate:
    """Exact sup over dyadic rectangles S of sqrt(|S|^{-1} sum_{R in S} |c_R|^2).

    Ties break toward the first rectangle in (j1, j2, k1, k2) order.  The
    witness is returned as a cell union at resolution n = max_scale.
    """
    J = c.max_scale
    E = _subtree_energy(c)
    best = -1.0
    best_rect = DyadicRectangle.from_indices(0, 0, 0, 0)
    for j1 in range(J + 1):
        lo1, hi1 = 2**j1 - 1, 2 ** (j1 + 1) - 1
        for j2 in range(J + 1):
            lo2, hi2 = 2**j2 - 1, 2 ** (j2 + 1) - 1
            block = E[lo1:hi1, lo2:hi2] * 2.0 ** (j1 + j2)
            flat = int(np.argmax(block))
            val = float(block.flat[flat])
            if val > best:
                best = val
                k1, k2 = divmod(flat, 2**j2)
                best_rect = DyadicRectangle.from_indices(j1, k1, j2, k2)
    witness = CellSet(J, best_rect.to_cellrect(J).to_mask())
    return BmoEstimate(float(np.sqrt(best)), witness, exact=True)


def _square_spans(n: int) -> list[tuple[int, int, int, int]]:
    """Cell spans of all dyadic squares at scales 0..n, in (j, k1, k2) order."""
    out = []
    for j in range(n + 1):
        w = 1 << (n - j)
        for k1 in range(1 << j):
            for k2 in range(1 << j):
                out.append((k1 * w, (k1 + 1) * w, k2 * w, (k2 + 1) * w))
    return out


def _masked_energy(c_abs2: np.ndarray, s0: np.ndarray, s1: np.ndarray, mask: np.ndarray) -> float:
    ii = _integral_image(mask)
    box = (
        ii[np.ix_(s1, s1)]
        - ii[np.ix_(s0, s1)]
        - ii[np.ix_(s1, s0)]
        + ii[np.ix_(s0, s0)]
    )
    counts = (s1 - s0)[:, None] * (s1 - s0)[None, :]
    return float(np.sum(c_abs2[box == counts]))


def _greedy_search(c: WaveletCoefficients, budget: int) -> tuple[np.ndarray, float, float, list[np.ndarray]]:
    """Grow the rectangular witness by dyadic squares with the best marginal gain.

    Returns the final mask, its energy and measure, and the list of visited
    masks (seed first).  Each step adds the square maximizing the marginal
    energy-to-measure gain, accepted only while the overall ratio improves.
    """
    n = c.max_scale
    c_abs2 = np.abs(c.matrix) ** 2
    s0, s1 = _interval_spans(n, n)
    seed = rect_bmo(c)
    mask = seed.witness.mask.copy()
    cell_area = 4.0**-n
    cur_e = _masked_energy(c_abs2, s0, s1, mask)
    cur_m = float(np.count_nonzero(mask)) * cell_area
    path = [mask.copy()]
    squares = _square_spans(n)
    for _ in range(budget):
        best_gain = -np.inf
        best = None
        for r0, r1, q0, q1 in squares:
            new_cells = int(np.count_nonzero(~mask[r0:r1, q0:q1]))
            if new_cells == 0:
                continue
            trial = mask.copy()
            trial[r0:r1, q0:q1] = True
            e = _masked_energy(c_abs2, s0, s1, trial)
            gain = (e - cur_e) / (new_cells * cell_area)
            if gain > best_gain:
                best_gain = gain
                best = (trial, e, cur_m + new_cells * cell_area)
        if best is None:
            break
        trial, e, m = best
        if e / m <= cur_e / cur_m:
            break
        mask, cur_e, cur_m = trial, e, m
        path.append(mask.copy())
    return mask, cur_e, cur_m, path


def _exhaustive_scan(c: WaveletCoefficients) -> BmoEstimate:
    """Scan every nonempty cell union at resolution n <= 2 (<= 65535 sets)."""
    n = c.max_scale
    m = 1 << n
    cells = m * m
    s0, s1 = _interval_spans(n, n)
    K = s0.shape[0]
    rmask = np.zeros((K, K), dtype=np.uint32)
    for a1 in range(K):
        for a2 in range(K):
            bits = 0
            for i1 in range(s0[a1], s1[a1]):
                for i2 in range(s0[a2], s1[a2]):
                    bits |= 1 << (i1 * m + i2)
            rmask[a1, a2] = bits
    energies = (np.abs(c.matrix) ** 2).ravel()
    flat_rmask = rmask.ravel()
    sets = np.arange(1, 2**cells, dtype=np.uint32)
    contained = (sets[:, None] & flat_rmask[None, :]) == flat_rmask[None, :]
    e = contained @ energies
    meas = np.bitwise_count(sets).astype(np.float64) * 4.0**-n
    ratio = e / meas
    idx = int(np.argmax(ratio))
    bits = (sets[idx] >> np.arange(cells, dtype=np.uint32)) & 1
    witness = CellSet(n, bits.astype(bool).reshape(m, m))
    return BmoEstimate(float(np.sqrt(ratio[idx])), witness, exact=True)


def product_bmo_lower(
    c: WaveletCoefficients, budget: int = 32, method: str = "auto"
) -> BmoEstimate:
    """Certified lower bound for the open-set supremum of the BMO ratio.

    method='exhaustive' scans all cell unions (only at max_scale <= 2),
    'greedy' runs the seeded square-growing search, and 'auto' picks
    exhaustive when affordable.  The greedy result is a lower bound with a
    witness; it always dominates rect_bmo since the search starts there.
    Greedy cost grows with 4^max_scale per step, so it is intended for the
    small resolutions the experiments use.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if method not in ("auto", "greedy", "exhaustive"):
        raise ValueError(f"unknown method {method!r}")
    if method == "exhaustive" or (method == "auto" and c.max_scale <= _EXHAUSTIVE_MAX_SCALE):
        if c.max_scale > _EXHAUSTIVE_MAX_SCALE:
            raise ValueError("exhaustive scan needs max_scale <= 2")
        return _exhaustive_scan(c)
    mask, e, m, _ = _greedy_search(c, budget)
    return BmoEstimate(float(np.sqrt(e / m)), CellSet(c.max_scale, mask), exact=False)


def john_nirenberg_ratio(
    a: dict[DyadicRectangle, float],
    U: CellSet,
    p: float,
    candidates: list[CellSet] | None = None,
) -> float:
    """||sum_R |R|^{-1} a_R 1_R||_p / |U|^{1/p} over rectangles R inside U.

    The packing premise sum_{R in U'} a_R <= |U'| is verified over a finite
    family of open sets first: U itself and every dyadic square of U's grid,
    or the caller-supplied candidate list.  This is a partial check; the
    premise cannot be verified over all open sets.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if U.cell_count == 0:
        raise ValueError("U is empty")
    n = U.n
    m = 1 << n
    rects = []
    for R, val in a.items():
        if val < 0:
            raise ValueError(f"negative weight on {R}")
        j1, j2 = R.scales
        if j1 > n or j2 > n:
            raise ValueError(f"{R} is finer than the grid of U")
        rects.append((R.interval1.cell_span(n), R.interval2.cell_span(n), float(val)))

    def inside(mask: np.ndarray, span1, span2) -> bool:
        return bool(mask[span1[0] : span1[1], span2[0] : span2[1]].all())

    if candidates is None:
        family = [("U", U)]
        for j in range(n + 1):
            w = 1 << (n - j)
            for k1 in range(1 << j):
                for k2 in range(1 << j):
                    sq = CellSet.from_cells(
                        n, [(i1, i2) for i1 in range(k1 * w, (k1 + 1) * w) for i2 in range(k2 * w, (k2 + 1) * w)]
                    )
                    family.append((f"square j={j} k1={k1} k2={k2}", sq))
    else:
        family = [(f"candidate {i}", cand) for i, cand in enumerate(candidates)]
    for name, cand in family:
        total = sum(val for span1, span2, val in rects if inside(cand.mask, span1, span2))
        if total > cand.measure() + _CERT_TOL:
            raise ValueError(
                f"packing premise violated on {name}: weight {total} exceeds measure {cand.measure()}"
            )

    F = np.zeros((m, m))
    for span1, span2, val in rects:
        if inside(U.mask, span1, span2):
            area = (span1[1] - span1[0]) * (span2[1] - span2[0]) * 4.0**-n
            F[span1[0] : span1[1], span2[0] : span2[1]] += val / area
    norm = float(np.mean(F**p)) ** (1.0 / p)
    return norm / U.measure() ** (1.0 / p)


class PackingReport(NamedTuple):
    passed: bool
    worst_ratio: float
    witness: CellSet


def carleson_packing_check(c: WaveletCoefficients, norm: float) -> PackingReport:
    """Check sum_{R in U} |c_R|^2 <= norm^2 |U| over a candidate family.

    The family is every dyadic rectangle plus the trajectory of the greedy
    open-set search.  Returns the worst ratio energy / (norm^2 |U|) and the
    set achieving it; passed means worst_ratio <= 1 up to roundoff.
    """
    if norm <= 0:
        raise ValueError("norm must be positive")
    J = c.max_scale
    E = _subtree_energy(c)
    worst = -1.0
    witness_rect = DyadicRectangle.from_indices(0, 0, 0, 0)
    for j1 in range(J + 1):
        lo1, hi1 = 2**j1 - 1, 2 ** (j1 + 1) - 1
        for j2 in range(J + 1):
            lo2, hi2 = 2**j2 - 1, 2 ** (j2 + 1) - 1
            block = E[lo1:hi1, lo2:hi2] * (2.0 ** (j1 + j2) / norm**2)
            flat = int(np.argmax(block))
            val = float(block.flat[flat])
            if val > worst:
                worst = val
                k1, k2 = divmod(flat, 2**j2)
                witness_rect = DyadicRectangle.from_indices(j1, k1, j2, k2)
    witness = CellSet(J, witness_rect.to_cellrect(J).to_mask())
    _, _, _, path = _greedy_search(c, budget=16)
    for mask in path:
        U = CellSet(J, mask)
        meas = U.measure()
        if meas == 0.0:
            continue
        ratio = coefficient_energy(c, U) / (norm**2 * meas)
        if ratio > worst:
            worst = ratio
            witness = U
    return PackingReport(worst <= 1.0 + _CERT_TOL, worst, witness)
