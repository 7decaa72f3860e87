"""The nested commutator [[M_b, H1], H2] and its operator norm.

The commutator is applied by composing pointwise multiplications with the
axis Hilbert transforms and projecting the result to the admissible
subspace, where the four-projection block form holds exactly.  Its norm is
found by power iteration on T*T with a seeded start vector; a densely
assembled matrix over the admissible Fourier modes provides an SVD oracle
at small grid sizes.  The little Hankel operator and a heuristic
lower-bound estimator for the dual pairing sup |<fg, b>| round out the
module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import GridSignal2D
from .transforms import hilbert_2d_axis, project_admissible_2d, project_quadrant
from .wavelets import WaveletCoefficients, synthesize

_DENSE_MAX_N = 32


class PowerIterationError(RuntimeError):
    """Raised when the Rayleigh gap fails to close within max_iter.

    Carries the best singular-value estimate, the final gap, and the full
    iteration trace so callers can report partial results.
    """

    def __init__(self, estimate: float, gap: float, trace: tuple):
        super().__init__(
            f"power iteration did not converge: estimate {estimate}, final gap {gap}"
        )
        self.estimate = estimate
        self.gap = gap
        self.trace = trace


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    rayleigh: float
    gap: float


@dataclass(frozen=True)
class NormResult:
    value: float
    iterations: int
    trace: tuple[TraceRow, ...]


class CommutatorOperator:
    """[[M_b, H1], H2] with output restricted to the admissible subspace."""

    def __init__(self, symbol: GridSignal2D):
        self.symbol = symbol

    @cached_property
    def _conjugate(self) -> "CommutatorOperator":
        return CommutatorOperator(self.symbol.conj())

    def apply(self, f: GridSignal2D) -> GridSignal2D:
        return commutator_apply(self.symbol, f)

    def adjoint_apply(self, f: GridSignal2D) -> GridSignal2D:
        """T* f; the axis transforms are self-adjoint, so T* has symbol conj(b)."""
        return commutator_apply(self._conjugate.symbol, f)

    def norm_bound(self) -> float:
        """Crude bound 4 ||b||_inf on the operator norm."""
        return 4.0 * float(np.max(np.abs(self.symbol.samples)))


def commutator_apply(b: GridSignal2D, f: GridSignal2D) -> GridSignal2D:
    """[[M_b, H1], H2] f, projected to the admissible subspace.

    Expanding the brackets gives four terms; on admissible inputs the
    result equals 4(P++ M_b P-- - P+- M_b P-+ - P-+ M_b P+- + P-- M_b P++) f.
    The raw composition also produces content on the frequency axes (the
    products b*f land there), which the projection removes.
    """
    if b.samples.shape != f.samples.shape:
        raise ValueError("symbol and argument grids differ")
    h1 = hilbert_2d_axis(f, 1)
    h2 = hilbert_2d_axis(f, 2)
    h12 = hilbert_2d_axis(h2, 1)
    out = (
        b * h12
        - hilbert_2d_axis(b * h2, 1)
        - hilbert_2d_axis(b * h1, 2)
        + hilbert_2d_axis(hilbert_2d_axis(b * f, 2), 1)
    )
    return project_admissible_2d(out)


def bracket(f: GridSignal2D, g: GridSignal2D) -> GridSignal2D:
    """{f, g} = [[M_f, H1], H2] conj(g)."""
    return commutator_apply(f, g.conj())


def operator_norm(
    b: GridSignal2D, tol: float = 1e-10, max_iter: int = 2000, seed: int = 0
) -> NormResult:
    """Largest singular value of the commutator with symbol b.

    Power iteration on T*T over the admissible subspace, with a seeded
    start vector.  Stops when successive Rayleigh quotients differ by less
    than tol; raises PowerIterationError past max_iter.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = b.n_points
    op = CommutatorOperator(b)
    rng = np.random.default_rng(seed)
    start = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    v = project_admissible_2d(GridSignal2D(start))
    nv = v.norm2()
    if nv == 0.0:
        raise ValueError("grid too small: admissible subspace is trivial")
    v = v * (1.0 / nv)
    prev = None
    trace: list[TraceRow] = []
    for it in range(1, max_iter + 1):
        w = op.apply(v)
        r = w.norm2() ** 2
        gap = math.inf if prev is None else abs(r - prev)
        trace.append(TraceRow(it, r, gap))
        if gap < tol or r == 0.0:
            return NormResult(math.sqrt(r), it, tuple(trace))
        u = op.adjoint_apply(w)
        nu = u.norm2()
        if nu == 0.0:
            return NormResult(math.sqrt(r), it, tuple(trace))
        v = u * (1.0 / nu)
        prev = r
    raise PowerIterationError(math.sqrt(prev), trace[-1].gap, tuple(trace))


def _admissible_modes(N: int) -> list[tuple[int, int]]:
    ks = [k for k in range(-N // 2 + 1, N // 2) if k != 0]
    return [(k1, k2) for k1 in ks for k2 in ks]


def _mode_signal(N: int, k1: int, k2: int) -> GridSignal2D:
    spec = np.zeros((N, N), dtype=complex)
    spec[k1 % N, k2 % N] = 1.0
    return GridSignal2D.from_spectrum(spec)


def dense_operator_matrix(b: GridSignal2D) -> np.ndarray:
    """The commutator as a matrix over the admissible Fourier modes.

    Columns are indexed by input mode, rows by output mode, both in the
    order of _admissible_modes.  Only for N <= 32; the matrix is
    (N-2)^2 x (N-2)^2.
    """
    N = b.n_points
    if N > _DENSE_MAX_N:
        raise ValueError(f"dense assembly limited to N <= {_DENSE_MAX_N}")
    modes = _admissible_modes(N)
    rows = np.array([[k1 % N, k2 % N] for k1, k2 in modes])
    M = np.zeros((len(modes), len(modes)), dtype=complex)
    for col, (k1, k2) in enumerate(modes):
        out = commutator_apply(b, _mode_signal(N, k1, k2))
        M[:, col] = out.spectrum()[rows[:, 0], rows[:, 1]]
    return M


def hankel_apply(b: GridSignal2D, f: GridSignal2D) -> GridSignal2D:
    """Little Hankel operator with holomorphic symbol: f -> P--(conj(b) f).

    The symbol must have spectrum in the closed (+,+) quadrant (frequency
    indices 0 <= k_i < N/2).
    """
    if b.samples.shape != f.samples.shape:
        raise ValueError("symbol and argument grids differ")
    N = b.n_points
    spec = b.spectrum()
    k = np.fft.fftfreq(N, 1.0 / N).astype(int)
    bad = (k[:, None] < 0) | (k[None, :] < 0) | (k[:, None] == -N // 2) | (k[None, :] == -N // 2)
    leak = float(np.linalg.norm(spec[bad]))
    if leak > 1e-12 * max(1.0, float(np.linalg.norm(spec))):
        raise ValueError("symbol spectrum leaves the closed (+,+) quadrant")
    return project_quadrant(b.conj() * f, -1, -1)


def dense_hankel_matrix(b: GridSignal2D) -> np.ndarray:
    """Hankel operator over open-(+,+)-quadrant input modes, N <= 32.

    Rows are the open-(-,-)-quadrant output modes; the largest singular
    value is the Hankel norm over the Hardy-type input space.
    """
    N = b.n_points
    if N > _DENSE_MAX_N:
        raise ValueError(f"dense assembly limited to N <= {_DENSE_MAX_N}")
    plus = [(k1, k2) for k1 in range(1, N // 2) for k2 in range(1, N // 2)]
    minus = [(-k1, -k2) for k1, k2 in plus]
    rows = np.array([[k1 % N, k2 % N] for k1, k2 in minus])
    M = np.zeros((len(minus), len(plus)), dtype=complex)
    for col, (k1, k2) in enumerate(plus):
        out = hankel_apply(b, _mode_signal(N, k1, k2))
        M[:, col] = out.spectrum()[rows[:, 0], rows[:, 1]]
    return M


def dual_norm_estimate(
    b: GridSignal2D, restarts: int = 8, iters: int = 60, seed: int = 0
) -> float:
    """Lower bound for sup |<f g, b>| over unit f, g with open-(+,+) spectra.

    Alternating maximization: with g fixed the optimal f is the normalized
    projection of b conj(g), and symmetrically.  Each half-step cannot
    decrease the pairing; the best value over seeded random restarts is
    returned.  The bilinear problem is nonconvex, so this is a heuristic
    bound, not a certified supremum.
    """
    N = b.n_points
    best = 0.0
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        raw = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        g = project_quadrant(GridSignal2D(raw), 1, 1)
        ng = g.norm2()
        if ng == 0.0:
            continue
        g = g * (1.0 / ng)
        val = 0.0
        for _ in range(iters):
            fnew = project_quadrant(b * g.conj(), 1, 1)
            nf = fnew.norm2()
            if nf == 0.0:
                break
            f = fnew * (1.0 / nf)
            gnew = project_quadrant(b * f.conj(), 1, 1)
            ng = gnew.norm2()
            if ng == 0.0:
                break
            g = gnew * (1.0 / ng)
            val = ng
        best = max(best, val)
    return best


def project_collection(
    c: WaveletCoefficients, A, N: int | None = None
) -> GridSignal2D:
    """Synthesize only the coefficients on rectangles in the collection A.

    A may be anything iterable over DyadicRectangle (a RectCollection
    works via its .rectangles attribute).  Every rectangle must fit the
    coefficient lattice, i.e. have scales <= max_scale.
    """
    rects = getattr(A, "rectangles", A)
    K = 2 ** (c.max_scale + 1) - 1
    keep = np.zeros((K, K), dtype=bool)
    for R in rects:
        j1, j2 = R.scales
        if j1 > c.max_scale or j2 > c.max_scale:
            raise ValueError(f"{R} is finer than the coefficient lattice")
        a = WaveletCoefficients.interval_index(j1, R.interval1.k)
        bidx = WaveletCoefficients.interval_index(j2, R.interval2.k)
        keep[a, bidx] = True
    restricted = WaveletCoefficients(c.max_scale, c.matrix * keep)
    if N is None:
        N = 2 ** (c.max_scale + 4)
    return synthesize(restricted, N)
