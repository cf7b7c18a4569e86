"""Simulation study harness over AR(1)-plus-step configurations.

For every cell (d, rho, gamma, K) and replication r the engine generates a
stationary AR(1) series with one mean shift, fits the change point, and
records for both interval methods the calibration statistic
p_r = 2*min(P(Z <= m), P(Z >= m)) and the interval length at every level in
the alpha grid. Aggregates are the empirical noncoverage curves (CoLe) and
the length summaries (CoIL). All randomness is derived from
(master_seed, tag, cell indices, r), so results are independent of thread
scheduling.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .bootstrap import BootstrapConfig, bootstrap_ci, bootstrap_distribution
from .cusum import fit_amoc
from .limitdist import LimitQuantileCache, empirical_quantile
from .lrv import bartlett_lrv, default_window
from .model import AmocSpec, Ar1Params, ar1_generate, make_amoc_series
from .rngstreams import derive_rng, derive_seed

_TAG_SERIES = 1
_TAG_BOOT = 2
_TAG_LIMIT = 3

_DEFAULT_ALPHA_GRID = tuple(round(0.01 * i, 2) for i in range(1, 11))
STUDY_GAMMAS = (0.0, 0.5)


class StudyConfigError(ValueError):
    """A study configuration document failed validation."""


@dataclass(frozen=True)
class LimitLawTemplate:
    """Grid settings applied to every limit-law cell the study touches.

    The replicate default is desk-scale to keep full studies in minutes;
    raise it for production-accuracy asymptotic quantiles.
    """

    half_width_T: float = 200.0
    step_h: float = 0.05
    replicates_M: int = 20_000

    def __post_init__(self):
        if not self.half_width_T > 0:
            raise StudyConfigError(f"limit_law.half_width_T must be positive, got {self.half_width_T}")
        if not 0 < self.step_h <= self.half_width_T / 100.0:
            raise StudyConfigError(
                f"limit_law.step_h must lie in (0, half_width_T/100], got {self.step_h}"
            )
        if self.replicates_M < 1000:
            raise StudyConfigError(
                f"limit_law.replicates_M must be at least 1000, got {self.replicates_M}"
            )


@dataclass(frozen=True)
class StudyConfig:
    """Full study specification; defaults give the desk-scale grid."""

    n: int
    m: int
    mu: float = 0.0
    d_values: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    rho_values: tuple[float, ...] = (0.1, 0.3)
    gamma_values: tuple[float, ...] = STUDY_GAMMAS
    block_lengths: tuple[int, ...] = (4, 8, 16)
    replications_R: int = 500
    resamples_B: int = 1000
    lambda_rule: float = 0.1
    alpha_grid: tuple[float, ...] = _DEFAULT_ALPHA_GRID
    master_seed: int = 0
    limit_law: LimitLawTemplate = field(default_factory=LimitLawTemplate)

    def __post_init__(self):
        problems = []
        if self.n < 3:
            problems.append(f"n: must be at least 3, got {self.n}")
        elif not 1 <= self.m <= self.n - 1:
            problems.append(f"m: must lie in 1..{self.n - 1}, got {self.m}")
        if not np.isfinite(self.mu):
            problems.append(f"mu: must be finite, got {self.mu}")
        if not self.d_values or not all(np.isfinite(d) for d in self.d_values):
            problems.append(f"d_values: need a nonempty list of finite reals, got {self.d_values}")
        if not self.rho_values or not all(abs(r) < 1 for r in self.rho_values):
            problems.append(f"rho_values: every |rho| must be < 1, got {self.rho_values}")
        if not self.gamma_values or not all(g in STUDY_GAMMAS for g in self.gamma_values):
            problems.append(f"gamma_values: entries must come from {STUDY_GAMMAS}, got {self.gamma_values}")
        if not self.block_lengths or not all(1 <= k <= self.n for k in self.block_lengths):
            problems.append(f"block_lengths: every K must lie in 1..n, got {self.block_lengths}")
        if self.replications_R < 1:
            problems.append(f"replications_R: must be at least 1, got {self.replications_R}")
        if self.resamples_B < 2:
            problems.append(f"resamples_B: must be at least 2, got {self.resamples_B}")
        if not 0.0 < self.lambda_rule < 1.0:
            problems.append(f"lambda_rule: must lie in (0, 1), got {self.lambda_rule}")
        if (
            not self.alpha_grid
            or not all(0.0 < a < 1.0 for a in self.alpha_grid)
            or any(b <= a for a, b in zip(self.alpha_grid, self.alpha_grid[1:]))
        ):
            problems.append(
                f"alpha_grid: must be strictly ascending within (0, 1), got {self.alpha_grid}"
            )
        if self.master_seed < 0:
            problems.append(f"master_seed: must be nonnegative, got {self.master_seed}")
        if problems:
            raise StudyConfigError("invalid study config: " + "; ".join(problems))

    @property
    def cells(self) -> list[tuple[int, int, int, int]]:
        """Index tuples (d_idx, rho_idx, gamma_idx, k_idx) in config order."""
        return [
            (di, ri, gi, ki)
            for di in range(len(self.d_values))
            for ri in range(len(self.rho_values))
            for gi in range(len(self.gamma_values))
            for ki in range(len(self.block_lengths))
        ]


@dataclass(frozen=True)
class CellKey:
    """One aggregated study cell for one interval method."""

    method: str
    d: float
    rho: float
    gamma: float
    block_length: int


@dataclass(frozen=True)
class ReplicationRecord:
    """One (cell, replication, method) outcome; lengths align with alpha_grid."""

    method: str
    d: float
    rho: float
    gamma: float
    block_length: int
    r: int
    m_hat: int
    d_hat: float
    tau2: float
    p_stat: float
    lengths: tuple[float, ...]

    @property
    def defined(self) -> bool:
        return not math.isnan(self.p_stat)


@dataclass(frozen=True)
class ColeDataset:
    """Calibration statistics per cell with their empirical CDF on the alpha grid."""

    alpha_grid: tuple[float, ...]
    p_values: dict[CellKey, np.ndarray]
    noncoverage: dict[CellKey, np.ndarray]
    undefined_counts: dict[CellKey, int]


@dataclass(frozen=True)
class CoilDataset:
    """Interval-length summaries (mean, quartiles) per cell and level."""

    alpha_grid: tuple[float, ...]
    mean_len: dict[CellKey, np.ndarray]
    q25_len: dict[CellKey, np.ndarray]
    q75_len: dict[CellKey, np.ndarray]
    undefined_counts: dict[CellKey, int]


@dataclass(frozen=True)
class StudyResult:
    """Aggregated datasets plus the replication-level records behind them."""

    config: StudyConfig
    cole: ColeDataset
    coil: CoilDataset
    records: list[ReplicationRecord]


def cole_statistic(dist_of_z, m: int) -> float:
    """2*min(P(Z <= m), P(Z >= m)) on an empirical sample.

    On discrete samples with mass exactly at m both fractions can exceed
    one half, so the statistic can exceed 1; values are returned uncapped.
    """
    z = np.asarray(dist_of_z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("empty sample")
    p_le = np.count_nonzero(z <= m) / z.size
    p_ge = np.count_nonzero(z >= m) / z.size
    return 2.0 * min(p_le, p_ge)


def coil_summaries(lengths) -> tuple[float, float, float]:
    """(mean, lower quartile, upper quartile) of interval lengths."""
    arr = np.asarray(lengths, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty input")
    s = np.sort(arr)
    return float(np.mean(arr)), empirical_quantile(s, 0.25), empirical_quantile(s, 0.75)


def _replicate(config: StudyConfig, cache: LimitQuantileCache, cell, r):
    """Both-method outcomes for one (cell, replication) task."""
    di, ri, gi, ki = cell
    d = config.d_values[di]
    rho = config.rho_values[ri]
    gamma = config.gamma_values[gi]
    block = config.block_lengths[ki]
    n_alpha = len(config.alpha_grid)

    rng = derive_rng(config.master_seed, _TAG_SERIES, di, ri, gi, ki, r)
    errors = ar1_generate(Ar1Params(rho=rho), config.n, rng)
    series = make_amoc_series(AmocSpec(n=config.n, m=config.m, mu=config.mu, d=d), errors)
    fit = fit_amoc(series, gamma)
    est = bartlett_lrv(series, fit.m_hat, default_window(config.n, config.lambda_rule))

    common = dict(
        d=d, rho=rho, gamma=gamma, block_length=block, r=r,
        m_hat=fit.m_hat, d_hat=fit.d_hat, tau2=est.tau2,
    )

    if fit.d_hat == 0.0:
        asy = ReplicationRecord(
            method="asymptotic", p_stat=math.nan, lengths=(math.nan,) * n_alpha, **common
        )
    else:
        v = cache.get(fit.m_hat / config.n, gamma).samples
        scale = est.tau2 / (fit.d_hat * fit.d_hat)
        # Z = m_hat - scale*V, so {Z <= m} = {V >= (m_hat - m)/scale}
        zcut = (fit.m_hat - config.m) / scale
        p_le = (v.size - np.searchsorted(v, zcut, side="left")) / v.size
        p_ge = np.searchsorted(v, zcut, side="right") / v.size
        lengths = tuple(
            scale * (empirical_quantile(v, 1.0 - a / 2.0) - empirical_quantile(v, a / 2.0))
            for a in config.alpha_grid
        )
        asy = ReplicationRecord(
            method="asymptotic", p_stat=2.0 * min(p_le, p_ge), lengths=lengths, **common
        )

    seed = derive_seed(config.master_seed, _TAG_BOOT, di, ri, gi, ki, r)
    dist = bootstrap_distribution(
        fit, BootstrapConfig(block_length=block, resamples=config.resamples_B, seed=seed)
    )
    boot = ReplicationRecord(
        method="bootstrap",
        p_stat=cole_statistic(2 * fit.m_hat - dist.samples, config.m),
        lengths=tuple(bootstrap_ci(dist, a).length for a in config.alpha_grid),
        **common,
    )
    return asy, boot


def run_study(config: StudyConfig, threads: int = 1) -> StudyResult:
    """Run every (cell, replication) task and aggregate the two datasets.

    Tasks are independent; with threads > 1 they run on a thread pool and
    results are merged in task order, so output is identical for any thread
    count.
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    cells = config.cells
    tasks = [(cell, r) for cell in cells for r in range(1, config.replications_R + 1)]
    cache = LimitQuantileCache(
        config.master_seed,
        half_width_T=config.limit_law.half_width_T,
        step_h=config.limit_law.step_h,
        replicates_M=config.limit_law.replicates_M,
        stream_tag=_TAG_LIMIT,
    )

    def work(task):
        cell, r = task
        return _replicate(config, cache, cell, r)

    if threads == 1:
        outcomes = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, tasks))

    records: list[ReplicationRecord] = []
    for asy, boot in outcomes:
        records.append(asy)
        records.append(boot)
    return StudyResult(
        config=config,
        cole=_build_cole(config, records),
        coil=_build_coil(config, records),
        records=records,
    )


def _cell_groups(config: StudyConfig, records) -> dict[CellKey, list[ReplicationRecord]]:
    groups: dict[CellKey, list[ReplicationRecord]] = {}
    for cell in config.cells:
        di, ri, gi, ki = cell
        for method in ("asymptotic", "bootstrap"):
            key = CellKey(
                method=method,
                d=config.d_values[di],
                rho=config.rho_values[ri],
                gamma=config.gamma_values[gi],
                block_length=config.block_lengths[ki],
            )
            groups[key] = []
    for rec in records:
        groups[
            CellKey(rec.method, rec.d, rec.rho, rec.gamma, rec.block_length)
        ].append(rec)
    return groups


def _build_cole(config: StudyConfig, records) -> ColeDataset:
    alphas = np.asarray(config.alpha_grid, dtype=np.float64)
    p_values = {}
    noncoverage = {}
    undefined = {}
    for key, group in _cell_groups(config, records).items():
        p = np.array([rec.p_stat for rec in group if rec.defined], dtype=np.float64)
        p_values[key] = p
        undefined[key] = sum(1 for rec in group if not rec.defined)
        if p.size:
            noncoverage[key] = np.array([np.count_nonzero(p <= a) / p.size for a in alphas])
        else:
            noncoverage[key] = np.full(alphas.size, np.nan)
    return ColeDataset(
        alpha_grid=config.alpha_grid,
        p_values=p_values,
        noncoverage=noncoverage,
        undefined_counts=undefined,
    )


def _build_coil(config: StudyConfig, records) -> CoilDataset:
    n_alpha = len(config.alpha_grid)
    mean_len = {}
    q25_len = {}
    q75_len = {}
    undefined = {}
    for key, group in _cell_groups(config, records).items():
        rows = np.array([rec.lengths for rec in group if rec.defined], dtype=np.float64)
        undefined[key] = sum(1 for rec in group if not rec.defined)
        if rows.size:
            summaries = [coil_summaries(rows[:, j]) for j in range(n_alpha)]
            mean_len[key] = np.array([s[0] for s in summaries])
            q25_len[key] = np.array([s[1] for s in summaries])
            q75_len[key] = np.array([s[2] for s in summaries])
        else:
            mean_len[key] = np.full(n_alpha, np.nan)
            q25_len[key] = np.full(n_alpha, np.nan)
            q75_len[key] = np.full(n_alpha, np.nan)
    return CoilDataset(
        alpha_grid=config.alpha_grid,
        mean_len=mean_len,
        q25_len=q25_len,
        q75_len=q75_len,
        undefined_counts=undefined,
    )


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _iter_cell_keys(config: StudyConfig):
    for cell in config.cells:
        di, ri, gi, ki = cell
        for method in ("asymptotic", "bootstrap"):
            yield CellKey(
                method=method,
                d=config.d_values[di],
                rho=config.rho_values[ri],
                gamma=config.gamma_values[gi],
                block_length=config.block_lengths[ki],
            )


def write_study_csvs(result: StudyResult, out_dir) -> dict[str, Path]:
    """Write cole.csv, coil.csv and replications.csv; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = result.config
    alphas = config.alpha_grid
    paths = {
        "cole": out / "cole.csv",
        "coil": out / "coil.csv",
        "replications": out / "replications.csv",
    }

    with open(paths["cole"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "d", "rho", "gamma", "K", "alpha", "empirical_noncoverage"])
        for key in _iter_cell_keys(config):
            curve = result.cole.noncoverage[key]
            for a, value in zip(alphas, curve):
                writer.writerow(
                    [key.method, _fmt(key.d), _fmt(key.rho), _fmt(key.gamma),
                     key.block_length, _fmt(a), _fmt(value)]
                )

    with open(paths["coil"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "d", "rho", "gamma", "K", "alpha", "mean_len", "q25_len", "q75_len"]
        )
        for key in _iter_cell_keys(config):
            means = result.coil.mean_len[key]
            q25 = result.coil.q25_len[key]
            q75 = result.coil.q75_len[key]
            for j, a in enumerate(alphas):
                writer.writerow(
                    [key.method, _fmt(key.d), _fmt(key.rho), _fmt(key.gamma),
                     key.block_length, _fmt(a), _fmt(means[j]), _fmt(q25[j]), _fmt(q75[j])]
                )

    with open(paths["replications"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["method", "d", "rho", "gamma", "K", "r", "m_hat", "d_hat", "tau2", "p_stat"]
        header += [f"len_{_fmt(a)}" for a in alphas]
        writer.writerow(header)
        for rec in result.records:
            row = [rec.method, _fmt(rec.d), _fmt(rec.rho), _fmt(rec.gamma),
                   rec.block_length, rec.r, rec.m_hat, _fmt(rec.d_hat),
                   _fmt(rec.tau2), _fmt(rec.p_stat)]
            row += [_fmt(v) for v in rec.lengths]
            writer.writerow(row)

    return paths


_TOP_LEVEL_KEYS = {
    "n": int,
    "m": int,
    "mu": (int, float),
    "d_values": list,
    "rho_values": list,
    "gamma_values": list,
    "block_lengths": list,
    "replications_R": int,
    "resamples_B": int,
    "lambda_rule": (int, float),
    "alpha_grid": list,
    "master_seed": int,
    "limit_law": dict,
}
_LIMIT_KEYS = {
    "half_width_T": (int, float),
    "step_h": (int, float),
    "replicates_M": int,
}
_REQUIRED_KEYS = ("n", "m")
_LIST_ELEM_TYPES = {
    "d_values": (int, float),
    "rho_values": (int, float),
    "gamma_values": (int, float),
    "alpha_grid": (int, float),
    "block_lengths": int,
}


def load_study_config(path) -> StudyConfig:
    """Parse a YAML study document into a validated StudyConfig.

    Unknown keys, missing required keys and wrong value types are all
    collected and reported together, naming each offending key.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise StudyConfigError(f"{path}: cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise StudyConfigError(f"{path}: not valid YAML: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise StudyConfigError(f"{path}: top level must be a mapping, got {type(doc).__name__}")

    problems = []
    for key in sorted(set(doc) - set(_TOP_LEVEL_KEYS)):
        problems.append(f"{key}: unknown key")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            problems.append(f"{key}: required key missing")
    kwargs = {}
    for key, expected in _TOP_LEVEL_KEYS.items():
        if key not in doc or key == "limit_law":
            continue
        value = doc[key]
        if expected is int:
            if isinstance(value, bool) or not isinstance(value, int):
                problems.append(f"{key}: expected an integer, got {value!r}")
                continue
        elif not isinstance(value, expected) or isinstance(value, bool):
            kind = "a list" if expected is list else "a number"
            problems.append(f"{key}: expected {kind}, got {value!r}")
            continue
        if key in _LIST_ELEM_TYPES:
            elem = _LIST_ELEM_TYPES[key]
            if not all(isinstance(v, elem) and not isinstance(v, bool) for v in value):
                problems.append(f"{key}: wrong list element type in {value!r}")
                continue
            value = tuple(int(v) if elem is int else float(v) for v in value)
        elif expected == (int, float):
            value = float(value)
        kwargs[key] = value

    lkw = {}
    if "limit_law" in doc:
        sub = doc["limit_law"]
        if not isinstance(sub, dict):
            problems.append(f"limit_law: expected a mapping, got {sub!r}")
        else:
            for key in sorted(set(sub) - set(_LIMIT_KEYS)):
                problems.append(f"limit_law.{key}: unknown key")
            for key, expected in _LIMIT_KEYS.items():
                if key not in sub:
                    continue
                value = sub[key]
                if isinstance(value, bool) or not isinstance(value, expected):
                    problems.append(f"limit_law.{key}: expected a number, got {value!r}")
                    continue
                lkw[key] = int(value) if expected is int else float(value)

    if problems:
        raise StudyConfigError(f"{path}: " + "; ".join(problems))
    try:
        if lkw:
            kwargs["limit_law"] = LimitLawTemplate(**lkw)
        return StudyConfig(**kwargs)
    except StudyConfigError as exc:
        raise StudyConfigError(f"{path}: {exc}") from None
