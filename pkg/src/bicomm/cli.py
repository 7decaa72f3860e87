"""Experiment runner: configuration-driven batches with CSV/JSON reports.

Each command executes a batch of seeded instances and writes a CSV report
(one row per instance or audit item) plus a JSON summary with min/max/mean
per numeric column.  All randomness flows from the config seed through
per-instance generators seeded with [seed, instance], so reruns with the
same config produce byte-identical reports regardless of --jobs.

Commands: identity-check, wavelet-audit, bmo-scan, norm-compare,
journe-scan, decomposition, oracle-audit, plot-data.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np

from . import __version__
from .bmo import product_bmo_lower, rect_bmo, rectangles_inside
from .commutator import (
    bracket,
    commutator_apply,
    dense_hankel_matrix,
    dense_operator_matrix,
    operator_norm,
)
from .grid import CellSet, DyadicInterval, DyadicRectangle, GridSignal1D, GridSignal2D, load_signal
from .journe import embeddedness, enlargement, journe_sum, row_of_squares
from .transforms import (
    project_admissible_1d,
    project_halfline,
    project_quadrant,
)
from .wavelets import (
    DEFAULT_PROFILE,
    WaveletCoefficients,
    analyze,
    commutator_kernel,
    decay_envelope_constant,
    gram_deviation,
    j_max,
    synthesize,
    wavelet_sample,
)

_COMMANDS = (
    "identity-check",
    "wavelet-audit",
    "bmo-scan",
    "norm-compare",
    "journe-scan",
    "decomposition",
    "oracle-audit",
    "plot-data",
)
_FAMILIES = (
    "random-carleson",
    "single-rectangle",
    "row-of-squares-dual",
    "multiscale-square",
    "file",
)

_HASH_FIELDS = (
    "command",
    "N",
    "n",
    "seed",
    "family",
    "instances",
    "delta",
    "epsilon",
    "gamma",
    "budget",
    "tol",
    "restarts",
    "max_iter",
    "K",
    "density",
    "decay",
    "file",
    "kind",
    "metrics",
    "bins",
)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Everything a command run depends on; hashed into every report row."""

    command: str
    N: int = 256
    n: int | None = None
    seed: int = 0
    family: str = "random-carleson"
    instances: int = 100
    delta: float = 0.5
    epsilon: float = 0.5
    gamma: float | None = None
    budget: int = 32
    tol: float = 1e-8
    restarts: int = 8
    max_iter: int = 10000
    K: int = 4
    density: float = 0.6
    decay: float = 0.5
    file: str | None = None
    source: str | None = None
    kind: str | None = None
    metrics: tuple[str, ...] = ()
    bins: int = 20
    out: str = "reports"

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two, at least 16")
        if self.n is None:
            object.__setattr__(self, "n", int(math.log2(self.N)) - 4)
        if self.n < 0 or self.n > int(math.log2(self.N)) - 4:
            raise ValueError("need 0 <= n <= log2(N) - 4")
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 < self.delta < 1.0 or not 0.0 < self.epsilon < 1.0:
            raise ValueError("delta and epsilon must lie in (0,1)")
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.delta ** (1.0 / 3.0))
        if self.instances < 1 or self.budget < 1 or self.restarts < 1 or self.bins < 1:
            raise ValueError("instances, budget, restarts and bins must be positive")

    @classmethod
    def from_dict(cls, obj: dict, command: str | None = None) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(obj)
        if "metrics" in data:
            data["metrics"] = tuple(data["metrics"])
        if command is not None:
            if "command" in data and data["command"] != command:
                raise ValueError(
                    f"config command {data['command']!r} does not match {command!r}"
                )
            data["command"] = command
        return cls(**data)

    @classmethod
    def from_file(cls, path: str, command: str | None = None) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), command)

    def config_hash(self) -> str:
        payload = {k: getattr(self, k) for k in _HASH_FIELDS}
        if payload["metrics"] is not None:
            payload["metrics"] = list(payload["metrics"])
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_report(cfg: ExperimentConfig, columns: list[str], rows: list[list]) -> tuple[str, str]:
    os.makedirs(cfg.out, exist_ok=True)
    chash = cfg.config_hash()
    csv_path = os.path.join(cfg.out, f"{cfg.command}.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns + ["config_hash", "version"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row] + [chash, __version__])
    stats = {}
    for idx, name in enumerate(columns):
        if name == "instance":
            continue
        vals = [row[idx] for row in rows if isinstance(row[idx], (int, float))]
        if vals and len(vals) == len(rows):
            vals = [float(v) for v in vals]
            stats[name] = {
                "min": min(vals),
                "max": max(vals),
                "mean": sum(vals) / len(vals),
            }
    summary = {
        "command": cfg.command,
        "config_hash": chash,
        "version": __version__,
        "metrics": stats,
    }
    json_path = os.path.join(cfg.out, f"{cfg.command}_summary.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def _run_instances(count: int, jobs: int, worker) -> list[list]:
    if jobs <= 1:
        return [worker(i) for i in range(count)]
    results: dict[int, list] = {}
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(worker, i): i for i in range(count)}
        for fut in as_completed(futures):
            i = futures[fut]
            try:
                results[i] = fut.result()
            except Exception as exc:
                raise RuntimeError(f"instance {i} failed: {exc}") from exc
    return [results[i] for i in range(count)]


# ---------------------------------------------------------------------------
# symbol families


def _band_limited_1d(rng: np.random.Generator, N: int) -> GridSignal1D:
    lim = N // 4
    ks = np.array([k for k in range(-lim, lim + 1) if k != 0])
    coeffs = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
    spec = np.zeros(N, dtype=complex)
    spec[ks % N] = coeffs
    sig = GridSignal1D.from_spectrum(spec)
    return sig * (1.0 / sig.norm2())


def _band_limited_2d(rng: np.random.Generator, N: int) -> GridSignal2D:
    lim = N // 4
    ks = np.array([k for k in range(-lim, lim + 1) if k != 0])
    block = rng.standard_normal((ks.size, ks.size)) + 1j * rng.standard_normal((ks.size, ks.size))
    spec = np.zeros((N, N), dtype=complex)
    spec[np.ix_(ks % N, ks % N)] = block
    sig = GridSignal2D.from_spectrum(spec)
    return sig * (1.0 / sig.norm2())


def _holomorphic_2d(rng: np.random.Generator, N: int) -> GridSignal2D:
    lim = N // 4
    spec = np.zeros((N, N), dtype=complex)
    block = rng.standard_normal((lim + 1, lim + 1)) + 1j * rng.standard_normal((lim + 1, lim + 1))
    spec[: lim + 1, : lim + 1] = block
    sig = GridSignal2D.from_spectrum(spec)
    return sig * (1.0 / sig.norm2())


def _random_open_set(rng: np.random.Generator, n: int) -> CellSet:
    """Bernoulli(1/2) cell mask, topped up to measure at least 1/2."""
    m = 1 << n
    mask = rng.random((m, m)) < 0.5
    need = (m * m + 1) // 2
    short = need - int(mask.sum())
    if short > 0:
        empty = np.argwhere(~mask)
        picks = rng.permutation(len(empty))[:short]
        for idx in picks:
            mask[tuple(empty[idx])] = True
    return CellSet(n, mask)


def _carleson_coefficients(rng: np.random.Generator, U: CellSet) -> WaveletCoefficients:
    """Random coefficients on the rectangles inside U with total energy |U|."""
    n = U.n
    inside = rectangles_inside(U, n)
    K = inside.shape[0]
    mat = rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))
    mat = np.where(inside, mat, 0.0)
    energy = float(np.sum(np.abs(mat) ** 2))
    if energy == 0.0:
        mat[K - 1, K - 1] = 1.0 if inside[K - 1, K - 1] else 0.0
        energy = float(np.sum(np.abs(mat) ** 2))
    mat *= math.sqrt(U.measure() / energy)
    return WaveletCoefficients(n, mat)


def _family_coefficients(cfg: ExperimentConfig, rng: np.random.Generator) -> WaveletCoefficients:
    n = cfg.n
    if cfg.family == "random-carleson":
        return _carleson_coefficients(rng, _random_open_set(rng, n))
    if cfg.family == "single-rectangle":
        j1 = int(rng.integers(0, n + 1))
        j2 = int(rng.integers(0, n + 1))
        R = DyadicRectangle.from_indices(
            j1, int(rng.integers(0, 2**j1)), j2, int(rng.integers(0, 2**j2))
        )
        return WaveletCoefficients.from_dict(n, {R: 1.0})
    if cfg.family == "multiscale-square":
        vals = {}
        for j in range(1, n + 1):
            phase = float(rng.uniform(0.0, 2.0 * math.pi))
            vals[DyadicRectangle.from_indices(j, 0, j, 0)] = cfg.decay**j * complex(
                math.cos(phase), math.sin(phase)
            )
        return WaveletCoefficients.from_dict(n, vals)
    if cfg.family == "row-of-squares-dual":
        row = row_of_squares(cfg.K, cfg.density)
        if row.n > int(math.log2(cfg.N)) - 4:
            raise ValueError("row-of-squares layout too fine for this N")
        return _carleson_coefficients(rng, row.cells)
    raise ValueError(f"family {cfg.family!r} does not generate coefficients")


def _family_symbol(cfg: ExperimentConfig, rng: np.random.Generator):
    if cfg.family == "file":
        if cfg.file is None:
            raise ValueError("family 'file' requires the file field")
        sig = load_signal(cfg.file)
        if not isinstance(sig, GridSignal2D) or sig.n_points != cfg.N:
            raise ValueError("loaded signal does not match the configured grid")
        return sig, analyze(sig, cfg.n)
    c = _family_coefficients(cfg, rng)
    return synthesize(c, cfg.N), c


# ---------------------------------------------------------------------------
# command runners


def _axis_sign_transform(s: GridSignal1D) -> GridSignal1D:
    return project_halfline(s, 1) - project_halfline(s, -1)


def _basic_identity_residual(b: GridSignal1D) -> float:
    lhs = (b * _axis_sign_transform(b.conj()) - _axis_sign_transform(b * b.conj())) * 0.5
    lhs = project_admissible_1d(lhs)
    minus = project_halfline(b, -1)
    plus = project_halfline(b, 1)
    rhs = project_halfline(GridSignal1D(np.abs(minus.samples) ** 2), -1) - project_halfline(
        GridSignal1D(np.abs(plus.samples) ** 2), 1
    )
    return (lhs - rhs).norm2()


def _commutator_form_residual(b: GridSignal2D, f: GridSignal2D) -> float:
    lhs = commutator_apply(b, f)
    rhs = (
        project_quadrant(b * project_quadrant(f, -1, -1), 1, 1)
        - project_quadrant(b * project_quadrant(f, -1, 1), 1, -1)
        - project_quadrant(b * project_quadrant(f, 1, -1), -1, 1)
        + project_quadrant(b * project_quadrant(f, 1, 1), -1, -1)
    ) * 4.0
    return (lhs - rhs).norm2()


def _two_parameter_residual(b: GridSignal2D) -> float:
    lhs = bracket(b, b) * 0.25
    rhs = None
    for s1, s2, sign in ((1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)):
        pb = project_quadrant(b, s1, s2)
        term = project_quadrant(GridSignal2D(np.abs(pb.samples) ** 2), s1, s2) * sign
        rhs = term if rhs is None else rhs + term
    return (lhs - rhs).norm2()


def _run_identity_check(cfg: ExperimentConfig, jobs: int):
    def worker(i: int) -> list:
        rng = np.random.default_rng([cfg.seed, i])
        e_basic = _basic_identity_residual(_band_limited_1d(rng, cfg.N))
        b = _band_limited_2d(rng, cfg.N)
        f = _band_limited_2d(rng, cfg.N)
        return [
            i,
            e_basic,
            _commutator_form_residual(b, f),
            _two_parameter_residual(b),
        ]

    cols = ["instance", "e_basic_residual", "e_commutator_residual", "two_parameter_residual"]
    return cols, _run_instances(cfg.instances, jobs, worker)


def _run_wavelet_audit(cfg: ExperimentConfig, jobs: int):
    N = cfg.N
    J = j_max(N)
    rows: list[list] = []

    def add(item: str, value: float):
        rows.append([len(rows), item, float(value)])

    add("gram_deviation", gram_deviation(N))
    prof = DEFAULT_PROFILE
    add(
        "partition_residual",
        abs(abs(prof(np.array([1.0]))[0]) ** 2 + abs(prof(np.array([2.0]))[0]) ** 2 - 1.0),
    )
    consts = {}
    for j in range(max(0, J - 2), J + 1):
        consts[j] = decay_envelope_constant(DyadicInterval(j, 0), N)
        add(f"decay_constant_j{j}", consts[j])
    add("decay_spread", max(consts.values()) / min(consts.values()) - 1.0)

    rng = np.random.default_rng([cfg.seed, 1])
    for idx in range(cfg.instances):
        jI = int(rng.integers(0, J - 1))
        jJ = int(rng.integers(jI + 2, J + 1))
        I = DyadicInterval(jI, int(rng.integers(0, 2**jI)))
        Jv = DyadicInterval(jJ, int(rng.integers(0, 2**jJ)))
        add(f"wij_zero_{idx}", commutator_kernel(I, Jv, N).signal.norm2())
    rng = np.random.default_rng([cfg.seed, 2])
    for idx in range(cfg.instances):
        j = int(rng.integers(1, J + 1))
        I = DyadicInterval(j, int(rng.integers(0, 2**j)))
        sw = wavelet_sample(I, N)
        kern = project_admissible_1d(commutator_kernel(I, I, N).signal)
        rhs = project_halfline(GridSignal1D(np.abs(sw.minus.samples) ** 2), -1) - project_halfline(
            GridSignal1D(np.abs(sw.plus.samples) ** 2), 1
        )
        add(f"wij_diagonal_{idx}", (kern - rhs).norm2())
    rng = np.random.default_rng([cfg.seed, 3])
    for idx in range(cfg.instances):
        jI = int(rng.integers(2, J + 1))
        jJ = int(rng.integers(0, jI - 1))
        I = DyadicInterval(jI, int(rng.integers(0, 2**jI)))
        Jv = DyadicInterval(jJ, int(rng.integers(0, 2**jJ)))
        wI = wavelet_sample(I, N)
        wJ = wavelet_sample(Jv, N)
        kern = commutator_kernel(I, Jv, N).signal
        rhs = wI.minus * wJ.plus - wI.plus * wJ.minus
        add(f"wij_coarse_{idx}", (kern - rhs).norm2())
    rng = np.random.default_rng([cfg.seed, 4])
    # kernel-spectra disjointness under 8x gaps in all three scale
    # relations; the quadruples need j_max >= 6, so N >= 512
    for idx in range(cfg.instances if J >= 6 else 0):
        jI = int(rng.integers(6, J + 1))
        jJ = int(rng.integers(0, jI - 2))
        jIp = int(rng.integers(3, jI - 2))
        jJp = int(rng.integers(0, jIp - 2))
        I = DyadicInterval(jI, int(rng.integers(0, 2**jI)))
        Jv = DyadicInterval(jJ, int(rng.integers(0, 2**jJ)))
        Ip = DyadicInterval(jIp, int(rng.integers(0, 2**jIp)))
        Jp = DyadicInterval(jJp, int(rng.integers(0, 2**jJp)))
        k1 = commutator_kernel(I, Jv, N).signal
        k2 = commutator_kernel(Ip, Jp, N).signal
        overlap = float(np.sum(np.abs(k1.spectrum()) * np.abs(k2.spectrum())))
        add(f"orthoI_{idx}", overlap)
    return ["instance", "item", "value"], rows


def _run_bmo_scan(cfg: ExperimentConfig, jobs: int):
    def worker(i: int) -> list:
        rng = np.random.default_rng([cfg.seed, i])
        c = _family_coefficients(cfg, rng)
        rect = rect_bmo(c)
        greedy = product_bmo_lower(c, cfg.budget, method="greedy")
        best = product_bmo_lower(c, cfg.budget, method="auto")
        ratio = greedy.value / best.value if best.value > 0 else 1.0
        return [i, rect.value, greedy.value, best.value, int(best.exact), ratio]

    cols = ["instance", "rect_value", "greedy_value", "product_value", "product_exact", "greedy_over_product"]
    return cols, _run_instances(cfg.instances, jobs, worker)


def _run_norm_compare(cfg: ExperimentConfig, jobs: int):
    def worker(i: int) -> list:
        rng = np.random.default_rng([cfg.seed, i])
        b, c = _family_symbol(cfg, rng)
        norm = operator_norm(b, tol=cfg.tol, max_iter=cfg.max_iter, seed=[cfg.seed, i, 1]).value
        rect = rect_bmo(c).value
        prod = product_bmo_lower(c, cfg.budget).value
        return [i, norm, rect, prod, norm / prod, prod / norm]

    cols = [
        "instance",
        "operator_norm",
        "rect_bmo",
        "product_bmo_lower",
        "norm_over_bmo",
        "bmo_over_norm",
    ]
    return cols, _run_instances(cfg.instances, jobs, worker)


def _run_journe_scan(cfg: ExperimentConfig, jobs: int):
    if cfg.family == "row-of-squares-dual":

        def worker(i: int) -> list:
            K = cfg.K * 2**i
            row = row_of_squares(K, cfg.density)
            V = enlargement(row.cells, cfg.delta)
            rep = embeddedness(row.middle, V, mode="first_axis_only", U=row.cells, delta=cfg.delta)
            return [i, K, rep.mu, rep.nu, rep.nu / rep.mu]

        cols = ["instance", "K", "mu_middle", "nu_middle", "nu_over_mu"]
        return cols, _run_instances(cfg.instances, jobs, worker)

    def worker(i: int) -> list:
        rng = np.random.default_rng([cfg.seed, i])
        m = 1 << cfg.n
        U = CellSet(cfg.n, rng.random((m, m)) < 0.5)
        js = journe_sum(U, cfg.delta, cfg.epsilon)
        mus = [rep.mu for rep in js.table]
        return [i, U.measure(), js.value, js.ratio, max(mus, default=0.0), len(js.table)]

    cols = ["instance", "measure", "journe_value", "journe_ratio", "max_mu", "maximal_count"]
    return cols, _run_instances(cfg.instances, jobs, worker)


def _run_decomposition(cfg: ExperimentConfig, jobs: int):
    """Split a symbol along an open set U and measure the bracket chain.

    The symbol is built in normal form: a concentrated part on the
    rectangles inside a random U with measure in [1/2, 1], plus a
    background spread over all rectangles with rectangular BMO norm
    epsilon, rescaled so that the coefficient mass inside U equals the
    measure of U exactly.  V is the delta-enlargement of U.
    """

    def worker(i: int) -> list:
        rng = np.random.default_rng([cfg.seed, i])
        U = _random_open_set(rng, cfg.n)
        c_in = _carleson_coefficients(rng, U)
        K = c_in.matrix.shape[0]
        bg = rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))
        bg *= cfg.epsilon / rect_bmo(WaveletCoefficients(cfg.n, bg)).value
        mat = c_in.matrix + bg
        in_u = rectangles_inside(U, cfg.n)
        mass_u = float(np.sum(np.abs(mat) ** 2 * in_u))
        mat = mat * math.sqrt(U.measure() / mass_u)
        c = WaveletCoefficients(cfg.n, mat)
        b = synthesize(c, cfg.N)
        V = enlargement(U, cfg.delta)
        in_v = rectangles_inside(V, cfg.n) & ~in_u
        in_w = ~(in_u | in_v)
        bU = synthesize(WaveletCoefficients(cfg.n, np.where(in_u, mat, 0.0)), cfg.N)
        bV = synthesize(WaveletCoefficients(cfg.n, np.where(in_v, mat, 0.0)), cfg.N)
        bW = synthesize(WaveletCoefficients(cfg.n, np.where(in_w, mat, 0.0)), cfg.N)
        norm = operator_norm(b, tol=cfg.tol, max_iter=cfg.max_iter, seed=[cfg.seed, i, 1]).value
        return [
            i,
            U.measure(),
            V.measure(),
            rect_bmo(c).value,
            bracket(bU, bU).norm2(),
            bracket(bV, bU).norm2(),
            bracket(bW, bU).norm2(),
            bracket(bU + bV, bU).norm2(),
            bracket(b, bU).norm2(),
            norm,
        ]

    cols = [
        "instance",
        "measure_u",
        "measure_v",
        "rect_bmo",
        "bracket_uu",
        "bracket_vu",
        "bracket_wu",
        "bracket_uv_u",
        "bracket_b_u",
        "operator_norm",
    ]
    return cols, _run_instances(cfg.instances, jobs, worker)


def _run_oracle_audit(cfg: ExperimentConfig, jobs: int):
    if cfg.N > 32:
        raise ValueError("oracle-audit needs N <= 32 for the dense assembly")

    def worker(i: int) -> list:
        rng = np.random.default_rng([cfg.seed, i])
        b = _band_limited_2d(rng, cfg.N)
        svd = float(np.linalg.svd(dense_operator_matrix(b), compute_uv=False)[0])
        power = operator_norm(b, tol=1e-12, max_iter=20000, seed=[cfg.seed, i, 1]).value
        h = _holomorphic_2d(rng, cfg.N)
        hankel = float(np.linalg.svd(dense_hankel_matrix(h), compute_uv=False)[0])
        comm = float(np.linalg.svd(dense_operator_matrix(h.conj()), compute_uv=False)[0])
        return [i, power, svd, abs(power - svd), hankel, comm, 4.0 * hankel / comm]

    cols = [
        "instance",
        "power_norm",
        "svd_norm",
        "power_svd_diff",
        "hankel_norm",
        "commutator_norm",
        "hankel_ratio",
    ]
    return cols, _run_instances(cfg.instances, jobs, worker)


def _run_plot_data(cfg: ExperimentConfig, jobs: int) -> tuple[str, None]:
    if cfg.source is None:
        raise ValueError("plot-data requires the source field (a report CSV)")
    if cfg.kind not in ("scatter", "histogram"):
        raise ValueError("plot-data kind must be 'scatter' or 'histogram'")
    with open(cfg.source, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for name in cfg.metrics:
            if name not in fields:
                raise ValueError(f"unknown metric {name!r}; report has {fields}")
        data = {name: [] for name in cfg.metrics}
        for row in reader:
            for name in cfg.metrics:
                data[name].append(float(row[name]))
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "plot_data.txt")
    with open(path, "w", encoding="utf-8") as fh:
        if cfg.kind == "scatter":
            if len(cfg.metrics) != 2:
                raise ValueError("scatter needs exactly two metric names")
            x, y = cfg.metrics
            fh.write(f"# {x} {y}\n")
            for a, bval in zip(data[x], data[y]):
                fh.write(f"{_fmt(a)} {_fmt(bval)}\n")
        else:
            if len(cfg.metrics) != 1:
                raise ValueError("histogram needs exactly one metric name")
            (name,) = cfg.metrics
            fh.write(f"# {name}_bin_center count\n")
            vals = data[name]
            if vals:
                lo, hi = min(vals), max(vals)
                width = (hi - lo) / cfg.bins or 1.0
                counts = [0] * cfg.bins
                for v in vals:
                    idx = min(int((v - lo) / width), cfg.bins - 1)
                    counts[idx] += 1
                for idx, count in enumerate(counts):
                    center = lo + (idx + 0.5) * width
                    fh.write(f"{_fmt(center)} {count}\n")
    return path, None


_RUNNERS = {
    "identity-check": _run_identity_check,
    "wavelet-audit": _run_wavelet_audit,
    "bmo-scan": _run_bmo_scan,
    "norm-compare": _run_norm_compare,
    "journe-scan": _run_journe_scan,
    "decomposition": _run_decomposition,
    "oracle-audit": _run_oracle_audit,
}


def run(cfg: ExperimentConfig, jobs: int = 1) -> tuple[str, str | None]:
    """Execute one command; returns the paths of the written report files."""
    if cfg.command == "plot-data":
        return _run_plot_data(cfg, jobs)
    columns, rows = _RUNNERS[cfg.command](cfg, jobs)
    return _write_report(cfg, columns, rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bicomm",
        description="Batch experiments for commutator, wavelet and rectangle-geometry checks.",
    )
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--jobs", type=int, default=1, help="concurrent instances")
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config, args.command)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out=args.out)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        paths = run(cfg, jobs=args.jobs)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        if path is not None:
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
