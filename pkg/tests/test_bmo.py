"""Rectangular and product BMO functionals, John-Nirenberg, packing."""

import numpy as np
import pytest

from bicomm.bmo import (
    BmoEstimate,
    carleson_packing_check,
    coefficient_energy,
    john_nirenberg_ratio,
    product_bmo_lower,
    rect_bmo,
    rectangles_inside,
)
from bicomm.grid import CellSet, DyadicRectangle, enumerate_dyadic_rectangles
from bicomm.wavelets import WaveletCoefficients, analyze, product_wavelet


def rand_coeffs(rng, n, density=0.5):
    K = 2 ** (n + 1) - 1
    mat = rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))
    mat[rng.random((K, K)) > density] = 0.0
    return WaveletCoefficients(n, mat)


def rect_inside_cellset(R, U):
    a1, b1 = R.interval1.cell_span(U.n)
    a2, b2 = R.interval2.cell_span(U.n)
    return bool(np.all(U.mask[a1:b1, a2:b2]))


def test_rectangles_inside_matches_bruteforce():
    rng = np.random.default_rng(30)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        U = CellSet(n, rng.random((2**n, 2**n)) < 0.5)
        inside = rectangles_inside(U, n)
        for R in enumerate_dyadic_rectangles(n):
            i = WaveletCoefficients.interval_index(R.interval1.j, R.interval1.k)
            j = WaveletCoefficients.interval_index(R.interval2.j, R.interval2.k)
            assert inside[i, j] == rect_inside_cellset(R, U)


def test_coefficient_energy_direct():
    rng = np.random.default_rng(31)
    n = 2
    c = rand_coeffs(rng, n)
    U = CellSet(n, rng.random((4, 4)) < 0.6)
    want = 0.0
    for R, val in c.items():
        if rect_inside_cellset(R, U):
            want += abs(val) ** 2
    assert abs(coefficient_energy(c, U) - want) < 1e-12


def brute_rect_bmo(c):
    best = 0.0
    arg = None
    for R in enumerate_dyadic_rectangles(c.max_scale):
        e = 0.0
        for S, val in c.items():
            if R.contains(S):
                e += abs(val) ** 2
        r = np.sqrt(e / R.area)
        if r > best:
            best, arg = r, R
    return best, arg


def test_rect_bmo_matches_bruteforce():
    rng = np.random.default_rng(32)
    for _ in range(10):
        c = rand_coeffs(rng, 3)
        est = rect_bmo(c)
        want, _ = brute_rect_bmo(c)
        assert abs(est.value - want) < 1e-10 * max(1.0, want)
        assert est.exact
        assert est.recheck(c)


def test_bmo_estimate_json_roundtrip():
    rng = np.random.default_rng(33)
    c = rand_coeffs(rng, 2)
    est = product_bmo_lower(c)
    back = BmoEstimate.from_json(est.to_json())
    assert back.value == est.value
    assert back.exact == est.exact
    assert back.witness == est.witness
    assert back.recheck(c)


def brute_product_bmo(c):
    """Max of sqrt(energy/measure) over every union of cells at n<=2."""
    n = c.max_scale
    m = 2**n
    inside_mass = np.zeros((m, m))
    best = 0.0
    cells = [(i, j) for i in range(m) for j in range(m)]
    for bits in range(1, 2 ** (m * m)):
        mask = np.zeros((m, m), dtype=bool)
        for idx, (i, j) in enumerate(cells):
            if bits >> idx & 1:
                mask[i, j] = True
        U = CellSet(n, mask)
        e = coefficient_energy(c, U)
        best = max(best, np.sqrt(e / U.measure()))
    return best


def test_exhaustive_scan_matches_bruteforce_n1():
    rng = np.random.default_rng(34)
    for _ in range(8):
        c = rand_coeffs(rng, 1, density=0.8)
        est = product_bmo_lower(c, method="exhaustive")
        assert est.exact
        want = brute_product_bmo(c)
        assert abs(est.value - want) < 1e-10 * max(1.0, want)
        assert est.recheck(c)


def test_greedy_close_to_exhaustive_n2():
    rng = np.random.default_rng(35)
    worst = 1.0
    for _ in range(15):
        c = rand_coeffs(rng, 2)
        greedy = product_bmo_lower(c, method="greedy").value
        exact = product_bmo_lower(c, method="exhaustive").value
        assert greedy <= exact + 1e-9
        worst = min(worst, greedy / exact)
    assert worst >= 0.75


def test_product_dominates_rect():
    rng = np.random.default_rng(36)
    for _ in range(10):
        c = rand_coeffs(rng, 3)
        assert product_bmo_lower(c).value >= rect_bmo(c).value - 1e-9


def test_far_apart_equal_rectangles():
    """Two equal far-apart cells: the union keeps the single-cell ratio."""
    n = 2
    a = DyadicRectangle.from_indices(2, 0, 2, 0)
    b = DyadicRectangle.from_indices(2, 3, 2, 3)
    c = WaveletCoefficients.from_dict(n, {a: 1.0, b: 1.0})
    single = rect_bmo(c).value
    est = product_bmo_lower(c, method="exhaustive")
    assert est.value >= single - 1e-12
    union = CellSet.from_cells(n, [(0, 0), (3, 3)])
    ratio_union = np.sqrt(coefficient_energy(c, union) / union.measure())
    assert abs(est.value - ratio_union) < 1e-12


def test_homogeneity():
    rng = np.random.default_rng(37)
    c = rand_coeffs(rng, 2)
    for fn in (rect_bmo, product_bmo_lower):
        v1 = fn(c).value
        v2 = fn(c.scaled(2.0)).value
        assert abs(v2 - 2.0 * v1) < 1e-12 * max(1.0, v1)


def test_monotone_in_coefficients_exhaustive():
    rng = np.random.default_rng(38)
    c = rand_coeffs(rng, 2)
    bigger = WaveletCoefficients(2, c.matrix * 1.0 + np.eye(7) * 0.5)
    v1 = product_bmo_lower(c, method="exhaustive").value
    v2 = product_bmo_lower(bigger, method="exhaustive").value
    # pointwise larger magnitudes cannot shrink the exhaustive maximum
    mags_grew = np.all(np.abs(bigger.matrix) >= np.abs(c.matrix) - 1e-15)
    if mags_grew:
        assert v2 >= v1 - 1e-12


def test_dilation_invariance():
    """Halved coefficient on a one-scale-finer square leaves the value fixed."""
    a = DyadicRectangle.from_indices(0, 0, 0, 0)
    c1 = WaveletCoefficients.from_dict(1, {a: 1.0})
    fine = DyadicRectangle.from_indices(1, 0, 1, 0)
    c2 = WaveletCoefficients.from_dict(2, {fine: 0.5})
    v1 = product_bmo_lower(c1, method="exhaustive").value
    v2 = product_bmo_lower(c2, method="exhaustive").value
    assert abs(v2 - v1) < 1e-14


def test_method_validation():
    c = WaveletCoefficients.zeros(3)
    with pytest.raises(ValueError):
        product_bmo_lower(c, budget=0)
    with pytest.raises(ValueError):
        product_bmo_lower(c, method="annealing")
    with pytest.raises(ValueError):
        product_bmo_lower(c, method="exhaustive")  # max_scale 3 too large


def test_john_nirenberg_single_rectangle():
    n = 3
    R = DyadicRectangle.from_indices(1, 0, 2, 1)
    U = CellSet(n, R.to_cellrect(n).to_mask())
    ratio = john_nirenberg_ratio({R: R.area}, U, 2)
    assert abs(ratio - 1.0) < 1e-12


def test_john_nirenberg_packed_families():
    """Carleson-packed weight families keep the L^p ratios bounded.

    Weights a_R = t_R |R| / (n+1)^2 with t_R in [0,1] pack under every open
    set because rectangles of a fixed scale pair tile disjointly and there
    are (n+1)^2 scale pairs.
    """
    rng = np.random.default_rng(39)
    n = 3
    m = 2**n
    for _ in range(10):
        U = CellSet(n, rng.random((m, m)) < 0.7)
        if U.cell_count == 0:
            continue
        inside = rectangles_inside(U, n)
        rows, cols = np.nonzero(inside)
        a = {}
        for i, j in zip(rows, cols):
            I1 = WaveletCoefficients.index_interval(int(i))
            I2 = WaveletCoefficients.index_interval(int(j))
            R = DyadicRectangle(I1, I2)
            a[R] = float(rng.random()) * R.area / (n + 1) ** 2
        ratios = [john_nirenberg_ratio(a, U, p) for p in (1, 2, 4)]
        for r in ratios:
            assert np.isfinite(r)
            assert r <= 50.0
        assert ratios[0] <= 1.0 + 1e-9


def test_john_nirenberg_validation():
    n = 2
    R = DyadicRectangle.from_indices(1, 0, 1, 0)
    U = CellSet(n, R.to_cellrect(n).to_mask())
    with pytest.raises(ValueError):
        john_nirenberg_ratio({R: 1.0}, U, 0.5)
    with pytest.raises(ValueError):
        john_nirenberg_ratio({R: 1.0}, CellSet.empty(n), 2)
    # packing premise violated on the rectangle itself
    with pytest.raises(ValueError) as info:
        john_nirenberg_ratio({R: 10.0}, U, 2)
    assert "premise" in str(info.value) or "packing" in str(info.value)


def test_carleson_packing_wavelet_analysis():
    """Analyzing a single product wavelet packs exactly at norm |R|^{-1/2}."""
    N = 64
    R = DyadicRectangle.from_indices(1, 1, 1, 0)
    c = analyze(product_wavelet(R, N), 2)
    rep = carleson_packing_check(c, 1.0 / np.sqrt(R.area))
    assert rep.passed
    assert abs(rep.worst_ratio - 1.0) < 1e-6


def test_carleson_packing_failure_detected():
    R = DyadicRectangle.from_indices(2, 0, 2, 0)
    c = WaveletCoefficients.from_dict(2, {R: 1.0})
    rep = carleson_packing_check(c, 0.5 / np.sqrt(R.area))
    assert not rep.passed
    assert rep.worst_ratio > 1.0
    assert rep.witness is not None
    with pytest.raises(ValueError):
        carleson_packing_check(c, 0.0)
