"""Discrete domain foundations.

Everything downstream lives on one of two finite domains:

* the periodic grid ``x_i = i/N`` on the torus ``[0,1)`` (or its square),
  carrying complex samples of functions -- see :class:`GridSignal1D` and
  :class:`GridSignal2D`;
* the dyadic lattice of ``[0,1)^2`` together with open sets represented as
  unions of the ``2^n x 2^n`` uniform cells -- see :class:`DyadicInterval`,
  :class:`DyadicRectangle`, :class:`CellRect` and :class:`CellSet`.

The Fourier modules treat the grid as a torus (periodic), but the geometric
objects here are Euclidean: maximal functions and dyadic structure never wrap
around the edge of the square.  Intervals of cells are intervals of
consecutive indices only.

Array axis conventions: for a 2D mask or sample array ``a[i1, i2]``, the
first index moves along the first coordinate axis.  "Axis 1" in the public
API always means the first variable, i.e. numpy axis 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "GridSignal1D",
    "GridSignal2D",
    "DyadicInterval",
    "DyadicRectangle",
    "CellRect",
    "CellSet",
    "enumerate_dyadic_rectangles",
    "maximal_1d",
    "strong_maximal",
    "measure",
    "save_signal",
    "load_signal",
]


def _check_power_of_two(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a positive power of two, got {n}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridSignal1D:
    """Complex samples of a function on [0,1), taken at x_i = i/N.

    Signals are immutable; arithmetic returns new instances.  A signal is
    called *admissible* when its mean (DC Fourier coefficient) and its
    Nyquist coefficient both vanish; identities involving half-line
    projections are exact only on that subspace.
    """

    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _freeze(np.asarray(self.samples)))
        if self.samples.ndim != 1:
            raise ValueError("GridSignal1D expects a 1D sample array")
        _check_power_of_two(self.samples.shape[0])

    @property
    def n_points(self) -> int:
        return self.samples.shape[0]

    def spectrum(self) -> np.ndarray:
        """Fourier coefficients normalized so that f = sum fhat_k e^{2 pi i k x}."""
        return np.fft.fft(self.samples) / self.n_points

    @classmethod
    def from_spectrum(cls, fhat: np.ndarray) -> "GridSignal1D":
        fhat = np.asarray(fhat, dtype=np.complex128)
        return cls(np.fft.ifft(fhat * fhat.shape[0]))

    def is_admissible(self, tol: float = 1e-12) -> bool:
        fhat = self.spectrum()
        scale = np.sqrt(np.sum(np.abs(fhat) ** 2))
        bad = max(abs(fhat[0]), abs(fhat[self.n_points // 2]))
        return bad <= tol * max(scale, 1e-300)

    # pointwise algebra
    def __add__(self, other):
        return GridSignal1D(self.samples + _coerce1d(other, self.n_points))

    def __sub__(self, other):
        return GridSignal1D(self.samples - _coerce1d(other, self.n_points))

    def __mul__(self, other):
        return GridSignal1D(self.samples * _coerce1d(other, self.n_points))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return GridSignal1D(-self.samples)

    def conj(self) -> "GridSignal1D":
        return GridSignal1D(np.conj(self.samples))

    def inner(self, other: "GridSignal1D") -> complex:
        """<f,g> = N^{-1} sum f conj(g); equals sum_k fhat conj(ghat)."""
        return complex(np.vdot(other.samples, self.samples) / self.n_points)

    def norm2(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.samples) ** 2)))


def _coerce1d(other, n):
    if isinstance(other, GridSignal1D):
        if other.n_points != n:
            raise ValueError("grid size mismatch")
        return other.samples
    return other


@dataclass(frozen=True)
class GridSignal2D:
    """Complex samples on the N x N periodic grid, samples[i1, i2] = f(i1/N, i2/N)."""

    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _freeze(np.asarray(self.samples)))
        a = self.samples
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("GridSignal2D expects a square 2D sample array")
        _check_power_of_two(a.shape[0])

    @property
    def n_points(self) -> int:
        return self.samples.shape[0]

    def spectrum(self) -> np.ndarray:
        return np.fft.fft2(self.samples) / self.n_points**2

    @classmethod
    def from_spectrum(cls, fhat: np.ndarray) -> "GridSignal2D":
        fhat = np.asarray(fhat, dtype=np.complex128)
        return cls(np.fft.ifft2(fhat * fhat.shape[0] * fhat.shape[1]))

    def is_admissible(self, tol: float = 1e-12) -> bool:
        """True when the spectrum vanishes on the k1=0, k2=0 and Nyquist lines."""
        fhat = self.spectrum()
        n = self.n_points
        scale = np.sqrt(np.sum(np.abs(fhat) ** 2))
        lines = np.concatenate(
            [
                np.abs(fhat[0, :]),
                np.abs(fhat[n // 2, :]),
                np.abs(fhat[:, 0]),
                np.abs(fhat[:, n // 2]),
            ]
        )
        return float(lines.max()) <= tol * max(scale, 1e-300)

    def __add__(self, other):
        return GridSignal2D(self.samples + _coerce2d(other, self.n_points))

    def __sub__(self, other):
        return GridSignal2D(self.samples - _coerce2d(other, self.n_points))

    def __mul__(self, other):
        return GridSignal2D(self.samples * _coerce2d(other, self.n_points))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return GridSignal2D(-self.samples)

    def conj(self) -> "GridSignal2D":
        return GridSignal2D(np.conj(self.samples))

    def inner(self, other: "GridSignal2D") -> complex:
        return complex(np.vdot(other.samples, self.samples) / self.n_points**2)

    def norm2(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.samples) ** 2)))


def _coerce2d(other, n):
    if isinstance(other, GridSignal2D):
        if other.n_points != n:
            raise ValueError("grid size mismatch")
        return other.samples
    return other


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The dyadic interval [k 2^{-j}, (k+1) 2^{-j}) of [0,1)."""

    j: int
    k: int

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("scale must be nonnegative")
        if not (0 <= self.k < 2**self.j):
            raise ValueError(f"position {self.k} out of range at scale {self.j}")

    @property
    def length(self) -> float:
        return 2.0**-self.j

    @property
    def left(self) -> float:
        return self.k * 2.0**-self.j

    @property
    def center(self) -> float:
        return (self.k + 0.5) * 2.0**-self.j

    def parent(self) -> "DyadicInterval":
        if self.j == 0:
            raise ValueError("the unit interval has no parent")
        return DyadicInterval(self.j - 1, self.k // 2)

    def contains(self, other: "DyadicInterval") -> bool:
        if other.j < self.j:
            return False
        return (other.k >> (other.j - self.j)) == self.k

    def cell_span(self, n: int) -> tuple[int, int]:
        """Half-open range of cell indices covered at resolution n (needs j <= n)."""
        if self.j > n:
            raise ValueError("interval finer than the cell grid")
        w = 1 << (n - self.j)
        return self.k * w, (self.k + 1) * w


@dataclass(frozen=True, order=True)
class DyadicRectangle:
    """Product of two dyadic intervals; area 2^{-(j1+j2)}."""

    interval1: DyadicInterval
    interval2: DyadicInterval

    @property
    def area(self) -> float:
        return 2.0 ** -(self.interval1.j + self.interval2.j)

    @property
    def scales(self) -> tuple[int, int]:
        return self.interval1.j, self.interval2.j

    def contains(self, other: "DyadicRectangle") -> bool:
        return self.interval1.contains(other.interval1) and self.interval2.contains(
            other.interval2
        )

    def to_cellrect(self, n: int) -> "CellRect":
        a1, b1 = self.interval1.cell_span(n)
        a2, b2 = self.interval2.cell_span(n)
        return CellRect(n, a1, b1, a2, b2)

    @classmethod
    def from_indices(cls, j1: int, k1: int, j2: int, k2: int) -> "DyadicRectangle":
        return cls(DyadicInterval(j1, k1), DyadicInterval(j2, k2))


@dataclass(frozen=True, order=True)
class CellRect:
    """An axis-parallel rectangle of whole cells, half-open in cell indices.

    Covers [a1*h, b1*h) x [a2*h, b2*h) with h = 2^{-n}.  Dyadic rectangles
    are the special case where each side is a power-of-two run starting at a
    multiple of its length; the embeddedness computations accept the general
    form because generated examples (rows of squares) need non-dyadic
    placement.
    """

    n: int
    a1: int
    b1: int
    a2: int
    b2: int

    def __post_init__(self):
        m = 1 << self.n
        if not (0 <= self.a1 < self.b1 <= m and 0 <= self.a2 < self.b2 <= m):
            raise ValueError("cell rectangle out of range or empty")

    @property
    def widths(self) -> tuple[Fraction, Fraction]:
        h = Fraction(1, 1 << self.n)
        return (self.b1 - self.a1) * h, (self.b2 - self.a2) * h

    @property
    def center(self) -> tuple[Fraction, Fraction]:
        h = Fraction(1, 1 << self.n)
        return Fraction(self.a1 + self.b1, 2) * h, Fraction(self.a2 + self.b2, 2) * h

    @property
    def area(self) -> float:
        w1, w2 = self.widths
        return float(w1 * w2)

    def to_mask(self) -> np.ndarray:
        m = 1 << self.n
        out = np.zeros((m, m), dtype=bool)
        out[self.a1 : self.b1, self.a2 : self.b2] = True
        return out


@dataclass(frozen=True)
class CellSet:
    """A union of cells of the uniform 2^n x 2^n partition of [0,1)^2.

    The mask is boolean with mask[i1, i2] covering
    [i1 h, (i1+1) h) x [i2 h, (i2+1) h), h = 2^{-n}.  Set algebra is exact;
    measure is the dyadic rational (set bits) * 4^{-n}, which float64
    represents exactly for every n used here.
    """

    n: int
    mask: np.ndarray = field(compare=False)

    def __post_init__(self):
        m = 1 << self.n
        mask = np.array(self.mask, dtype=bool, copy=True)
        if mask.shape != (m, m):
            raise ValueError(f"mask shape {mask.shape} does not match n={self.n}")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    @classmethod
    def empty(cls, n: int) -> "CellSet":
        return cls(n, np.zeros((1 << n, 1 << n), dtype=bool))

    @classmethod
    def full(cls, n: int) -> "CellSet":
        return cls(n, np.ones((1 << n, 1 << n), dtype=bool))

    @classmethod
    def from_cells(cls, n: int, cells) -> "CellSet":
        mask = np.zeros((1 << n, 1 << n), dtype=bool)
        for i1, i2 in cells:
            mask[i1, i2] = True
        return cls(n, mask)

    @property
    def cell_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def measure(self) -> float:
        return self.cell_count * 4.0**-self.n

    def measure_exact(self) -> Fraction:
        return Fraction(self.cell_count, 4**self.n)

    def __or__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.n, self.mask | other.mask)

    def __and__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.n, self.mask & other.mask)

    def __invert__(self) -> "CellSet":
        return CellSet(self.n, ~self.mask)

    def __sub__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.n, self.mask & ~other.mask)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CellSet)
            and self.n == other.n
            and bool(np.array_equal(self.mask, other.mask))
        )

    def contains(self, other: "CellSet") -> bool:
        self._check(other)
        return bool(np.all(self.mask | ~other.mask))

    def translate(self, d1: int, d2: int) -> "CellSet":
        """Cyclic translation by whole cells (torus shift of the mask)."""
        return CellSet(self.n, np.roll(self.mask, (d1, d2), axis=(0, 1)))

    def _check(self, other: "CellSet") -> None:
        if self.n != other.n:
            raise ValueError("resolution mismatch")

    def to_json(self) -> dict:
        rows = []
        for row in self.mask:
            rows.append(np.packbits(row).tobytes().hex())
        return {"n": self.n, "rows": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "CellSet":
        n = int(obj["n"])
        m = 1 << n
        mask = np.zeros((m, m), dtype=bool)
        for i, hx in enumerate(obj["rows"]):
            bits = np.unpackbits(np.frombuffer(bytes.fromhex(hx), dtype=np.uint8))
            mask[i] = bits[:m].astype(bool)
        return cls(n, mask)


def measure(U: CellSet) -> float:
    """Lebesgue measure of the cell union."""
    return U.measure()


def enumerate_dyadic_rectangles(n: int) -> list[DyadicRectangle]:
    """All dyadic rectangles of [0,1)^2 with both scales in [0, n].

    The count is (2^{n+1}-1)^2: each axis contributes 1 + 2 + ... + 2^n
    intervals.
    """
    if n < 0:
        raise ValueError("resolution must be nonnegative")
    intervals = [
        DyadicInterval(j, k) for j in range(n + 1) for k in range(2**j)
    ]
    return [DyadicRectangle(i1, i2) for i1 in intervals for i2 in intervals]


def _maximal_lines(lines: np.ndarray, one_sided: bool = False) -> np.ndarray:
    """Uncentered maximal function of each row of a (L, m) 0/1 array.

    out[l, i] = max over intervals a <= i <= b of mean(lines[l, a:b+1]).
    With one_sided=True only intervals starting at the cell (a = i) count.
    Intervals do not wrap.  Vectorized over an (L, m, m) tableau; callers
    chunk L to bound memory.
    """
    L, m = lines.shape
    csum = np.zeros((L, m + 1))
    np.cumsum(lines, axis=1, out=csum[:, 1:])
    # sums[l, a, b] = sum over cells a..b; lengths b-a+1 (junk for b < a)
    sums = csum[:, None, 1:] - csum[:, :m, None]
    a_idx = np.arange(m)
    length = a_idx[None, :] - a_idx[:, None] + 1.0  # [a, b]
    with np.errstate(invalid="ignore"):
        avg = np.where(length > 0, sums / np.maximum(length, 1.0), -np.inf)
    # suffix max over b >= i, then prefix max over a <= i, read diagonal
    suff = np.flip(np.maximum.accumulate(np.flip(avg, axis=2), axis=2), axis=2)
    if one_sided:
        return suff[:, a_idx, a_idx]
    pref = np.maximum.accumulate(suff, axis=1)
    return pref[:, a_idx, a_idx]


def maximal_1d(U: CellSet, axis: int, one_sided: bool = False) -> np.ndarray:
    """Uncentered one-dimensional maximal function of 1_U along one axis.

    Returns a float field on cells: at each cell, the largest average of the
    indicator over discrete intervals of consecutive cells (same line,
    containing the cell, no wrap-around).  axis=1 averages along the first
    variable, axis=2 along the second.

    one_sided=True restricts to intervals whose first cell is the
    evaluation cell.  That is the rising-sun form: its indicator level
    sets obey the weak bound measure{M 1_U > d} <= measure(U)/d with
    constant exactly one, which the two-sided form does not (a single
    cell already has a two-sided level set of measure (2/d - 1)|U|).
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    mask = U.mask.astype(np.float64)
    if axis == 1:
        # lines run along the first index: transpose so lines are rows
        return _maximal_lines(mask.T, one_sided).T
    return _maximal_lines(mask, one_sided)


def strong_maximal(U: CellSet, chunk: int = 1024) -> np.ndarray:
    """Maximal averages of 1_U over all axis-parallel cell rectangles.

    For each row range the mask collapses to a line of column means whose 1D
    maximal function covers every rectangle with that exact row extent; the
    pointwise max over row ranges is taken in chunks.
    """
    mask = U.mask.astype(np.float64)
    m = mask.shape[0]
    csum = np.zeros((m + 1, m))
    np.cumsum(mask, axis=0, out=csum[1:])
    ranges = [(r0, r1) for r0 in range(m) for r1 in range(r0, m)]
    out = np.zeros((m, m))
    for start in range(0, len(ranges), chunk):
        batch = ranges[start : start + chunk]
        lines = np.array([(csum[r1 + 1] - csum[r0]) / (r1 - r0 + 1) for r0, r1 in batch])
        maxed = _maximal_lines(lines)
        for (r0, r1), line in zip(batch, maxed):
            np.maximum(out[r0 : r1 + 1], line[None, :], out=out[r0 : r1 + 1])
    return out


def save_signal(path, sig) -> None:
    """Write a signal as a JSON header line plus little-endian float64 (re, im) pairs."""
    samples = sig.samples
    dims = list(samples.shape)
    inter = np.empty(samples.size * 2, dtype="<f8")
    flat = samples.ravel()
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write((json.dumps({"dims": dims}) + "\n").encode("utf-8"))
        fh.write(inter.tobytes())


def load_signal(path):
    """Inverse of :func:`save_signal`; returns GridSignal1D or GridSignal2D."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    dims = header["dims"]
    flat = raw[0::2] + 1j * raw[1::2]
    if len(dims) == 1:
        return GridSignal1D(flat)
    if len(dims) == 2:
        return GridSignal2D(flat.reshape(dims))
    raise ValueError(f"unsupported dims {dims}")
