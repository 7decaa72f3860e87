"""Hilbert transforms, frequency projections and Cayley boundary transport."""

import numpy as np
import pytest

from bicomm.grid import GridSignal1D, GridSignal2D
from bicomm.transforms import (
    BoundaryGrid,
    FrequencyGrid,
    boundary_norm,
    cayley_transport,
    circle_grid,
    frequencies,
    hilbert_1d,
    hilbert_2d_axis,
    line_grid_cotangent,
    line_grid_truncated,
    project_admissible_1d,
    project_admissible_2d,
    project_halfline,
    project_quadrant,
)


def rand1d(rng, N):
    return GridSignal1D(rng.standard_normal(N) + 1j * rng.standard_normal(N))


def rand2d(rng, N):
    return GridSignal2D(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))


def test_frequency_order():
    np.testing.assert_array_equal(frequencies(8), [0, 1, 2, 3, -4, -3, -2, -1])
    fg = FrequencyGrid(8)
    assert fg.nyquist == -4
    m = fg.admissible_mask_1d()
    assert not m[0] and not m[4]
    assert m[1] and m[7]
    m2 = fg.admissible_mask_2d()
    assert not m2[0, 3] and not m2[3, 4] and m2[1, 7]


def test_hilbert_cos_to_sin():
    N = 64
    x = np.arange(N) / N
    c = GridSignal1D(np.cos(2 * np.pi * x))
    s = hilbert_1d(c)
    np.testing.assert_allclose(s.samples.real, np.sin(2 * np.pi * x), atol=1e-13)
    np.testing.assert_allclose(s.samples.imag, 0.0, atol=1e-13)


def test_hilbert_antiselfadjoint_and_involution():
    rng = np.random.default_rng(10)
    f = rand1d(rng, 128)
    g = rand1d(rng, 128)
    assert abs(hilbert_1d(f).inner(g) + f.inner(hilbert_1d(g))) < 1e-13
    fa = project_admissible_1d(f)
    np.testing.assert_allclose(
        hilbert_1d(hilbert_1d(fa)).samples, -fa.samples, atol=1e-12
    )


def test_halfline_projections():
    rng = np.random.default_rng(11)
    f = rand1d(rng, 64)
    plus = project_halfline(f, 1)
    minus = project_halfline(f, -1)
    # orthogonal, idempotent, and they sum to the admissible projection
    assert abs(plus.inner(minus)) < 1e-14
    np.testing.assert_allclose(
        project_halfline(plus, 1).samples, plus.samples, atol=1e-13
    )
    np.testing.assert_allclose(
        (plus + minus).samples, project_admissible_1d(f).samples, atol=1e-13
    )
    with pytest.raises(ValueError):
        project_halfline(f, 0)


def test_halfline_conjugate_symmetry_for_real_signals():
    rng = np.random.default_rng(12)
    f = GridSignal1D(rng.standard_normal(64))
    plus = project_halfline(f, 1)
    minus = project_halfline(f, -1)
    np.testing.assert_allclose(plus.conj().samples, minus.samples, atol=1e-13)


def test_signature_vs_kernel_convention():
    """The 2D axis transform is i times the kernel-convention transform."""
    rng = np.random.default_rng(13)
    f = rand1d(rng, 32)
    sig = project_halfline(f, 1) - project_halfline(f, -1)
    np.testing.assert_allclose(
        sig.samples, 1j * hilbert_1d(f).samples, atol=1e-13
    )
    F = rand2d(rng, 32)
    h1 = hilbert_2d_axis(F, 1)
    via_quadrants = (
        project_quadrant(F, 1, 1)
        + project_quadrant(F, 1, -1)
        - project_quadrant(F, -1, 1)
        - project_quadrant(F, -1, -1)
    )
    # h1 also keeps the k1-admissible, k2 in {0, Nyquist} lines that the
    # quadrant projections drop, so compare on the admissible subspace
    np.testing.assert_allclose(
        project_admissible_2d(h1).samples, via_quadrants.samples, atol=1e-12
    )


def test_quadrants_decompose_admissible_part():
    rng = np.random.default_rng(14)
    F = rand2d(rng, 16)
    total = None
    for s1 in (1, -1):
        for s2 in (1, -1):
            q = project_quadrant(F, s1, s2)
            total = q if total is None else total + q
    np.testing.assert_allclose(
        total.samples, project_admissible_2d(F).samples, atol=1e-13
    )
    q1 = project_quadrant(F, 1, 1)
    q2 = project_quadrant(F, -1, 1)
    assert abs(q1.inner(q2)) < 1e-14


def test_axis_transforms_commute():
    rng = np.random.default_rng(15)
    F = rand2d(rng, 32)
    a = hilbert_2d_axis(hilbert_2d_axis(F, 1), 2)
    b = hilbert_2d_axis(hilbert_2d_axis(F, 2), 1)
    np.testing.assert_allclose(a.samples, b.samples, atol=1e-13)
    with pytest.raises(ValueError):
        hilbert_2d_axis(F, 3)


def test_circle_grid_normalized():
    g = circle_grid(64)
    assert abs(g.weights.sum() - 1.0) < 1e-14
    assert np.all(np.abs(np.abs(g.points()) - 1.0) < 1e-14)


def test_cotangent_grid_integrates_poisson_kernel_exactly():
    """The substitution puts weight 1/M at every node of 1/(pi(1+x^2))."""
    g = line_grid_cotangent(128)
    vals = 1.0 / (np.pi * (1.0 + g.nodes**2))
    assert abs(np.sum(g.weights * vals) - 1.0) < 1e-12


def test_truncated_grid_tail_error():
    gt = line_grid_truncated(2048, T=64.0)
    gc = line_grid_cotangent(128)
    f = lambda x, y: 1.0 / (np.pi**2 * (1.0 + x**2) * (1.0 + y**2))
    vt = f(gt.nodes[:, None], gt.nodes[None, :])
    vc = f(gc.nodes[:, None], gc.nodes[None, :])
    err_t = abs(boundary_norm(vt, gt, 1) - 1.0)
    err_c = abs(boundary_norm(vc, gc, 1) - 1.0)
    assert err_c < 1e-12
    assert err_t > 1e-6
    assert gc.tolerance_estimate() < gt.tolerance_estimate()


def test_cayley_roundtrip_and_isometry():
    rng = np.random.default_rng(16)
    src = line_grid_cotangent(64)
    vals = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    for p in (1, 2, 4):
        disk = cayley_transport(vals, src, p, "to_disk")
        assert abs(disk.norm(p) - boundary_norm(vals, src, p)) < 1e-10
        back = cayley_transport(disk.values, disk.grid, p, "to_halfplane")
        np.testing.assert_allclose(np.sort(back.grid.nodes), np.sort(src.nodes), atol=1e-9)
        np.testing.assert_allclose(back.values, vals, atol=1e-9)


def test_cayley_accepts_callable():
    src = line_grid_cotangent(32)
    field = cayley_transport(lambda u, v: u * 0 + 1.0, src, 2, "to_disk")
    assert field.values.shape == (32, 32)


def test_cayley_validation():
    src = line_grid_cotangent(16)
    circ = circle_grid(16)
    vals = np.ones((16, 16))
    with pytest.raises(ValueError):
        cayley_transport(vals, src, 3, "to_disk")
    with pytest.raises(ValueError):
        cayley_transport(vals, src, 2, "sideways")
    with pytest.raises(ValueError):
        cayley_transport(vals, circ, 2, "to_disk")
    with pytest.raises(ValueError):
        cayley_transport(vals, src, 2, "to_halfplane")
    singular = BoundaryGrid("circle", np.array([0.0] + [0.3] * 15), np.full(16, 1 / 16))
    with pytest.raises(ValueError):
        cayley_transport(vals, singular, 2, "to_halfplane")
