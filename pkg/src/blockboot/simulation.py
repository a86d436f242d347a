"""
Seeded Monte Carlo experiments comparing block bootstrap variance estimators.

Replication ``r`` at sample size ``n`` draws its AR(1) path from substream
``(master_seed, n, r)``, so results do not depend on how replications are
split across worker processes. Per-replication estimates land in a table
indexed by replication and are reduced in index order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from ._exceptions import UnsupportedMethodError
from .asymptotics import asymptotic_bias, asymptotic_mse, asymptotic_variance, optimal_block, variance_constant
from .estimators import Kind, Method, estimates_from_acov, lag_weights
from .series import Ar1Model, ar1_long_run_G, ar1_sigma2_n, sample_autocovariances, simulate_ar1, substream

__all__ = [
    "ModelConfig",
    "ExperimentConfig",
    "ReportRow",
    "ExperimentReport",
    "CSV_HEADER",
    "block_length",
    "resolve_workers",
    "jackknife_variance_se",
    "run_experiment",
    "run_ratio_experiment",
    "run_coefficient_experiment",
    "run_mse_experiment",
    "run",
]

log = logging.getLogger(__name__)

CSV_HEADER = (
    "n",
    "method",
    "ell",
    "mc_mean",
    "mc_variance",
    "mc_mse",
    "se_variance",
    "theory_variance",
    "theory_bias",
    "ratio_to_nbb",
)
DEFAULT_N_GRID = [100, 250, 500, 1000, 2500, 5000, 10000]
WORKERS_ENV = "BLOCKBOOT_WORKERS"


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    phi: float = Field(gt=-1.0, lt=1.0)
    sigma_z: float = Field(default=1.0, gt=0.0)

    def to_model(self) -> Ar1Model:
        return Ar1Model(self.phi, self.sigma_z)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    model: ModelConfig
    n_grid: List[PositiveInt] = Field(default_factory=lambda: list(DEFAULT_N_GRID))
    replications: int = Field(default=5000, ge=100)
    master_seed: int = 0
    methods: List[str] = Field(default_factory=lambda: ["sb", "nbb"])
    block_rule: Union[Literal["cuberoot", "optimal-oracle"], PositiveInt] = "cuberoot"
    experiment: Literal["ratio", "coefficient", "mse"] = "ratio"

    @field_validator("n_grid")
    @classmethod
    def _increasing(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("n_grid must not be empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if v[0] < 2:
            raise ValueError("n_grid entries must be >= 2")
        return v

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("methods must not be empty")
        labels = [Method.parse(name).label for name in v]
        if len(set(labels)) != len(labels):
            raise ValueError("methods must not repeat")
        return labels

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.experiment == "ratio" and not {"sb", "nbb"} <= set(self.methods):
            raise ValueError("methods: a ratio experiment needs both 'sb' and 'nbb'")
        if self.experiment == "mse":
            if self.block_rule != "optimal-oracle":
                raise ValueError("block_rule: an mse experiment needs 'optimal-oracle'")
        if self.block_rule == "optimal-oracle" and ar1_long_run_G(self.model.to_model()) == 0.0:
            raise ValueError("block_rule: 'optimal-oracle' is undefined for a model with G = 0")
        return self

    @property
    def ar1(self) -> Ar1Model:
        return self.model.to_model()

    @property
    def parsed_methods(self) -> List[Method]:
        return [Method.parse(name) for name in self.methods]

    @classmethod
    def from_json(cls, path: Union[str, os.PathLike]) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.model_validate_json(fh.read())


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def block_length(config: ExperimentConfig, method: Method, n: int) -> float:
    """Block length used for ``method`` at sample size ``n`` under the config's rule."""
    rule = config.block_rule
    if rule == "cuberoot":
        raw = n ** (1.0 / 3.0)
    elif rule == "optimal-oracle":
        raw = optimal_block(config.ar1, method, n)
    else:
        raw = float(rule)
    if not method.fixed_block:
        return max(1.0, raw)
    return float(min(n, max(1, _round_half_up(raw))))


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be positive")
        return workers
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


def jackknife_variance_se(y: np.ndarray) -> float:
    """Delete-one jackknife standard error of the sample variance (divisor R - 1)."""
    y = np.asarray(y, dtype=np.float64)
    R = y.size
    if R < 3:
        return float("nan")
    d = y - y.mean()
    s1 = d.sum()
    s2 = np.dot(d, d)
    loo_mean = (s1 - d) / (R - 1)
    loo_var = (s2 - d * d - (R - 1) * loo_mean**2) / (R - 2)
    return float(math.sqrt((R - 1) / R * np.sum((loo_var - loo_var.mean()) ** 2)))


def _replicate(
    model: Ar1Model,
    master_seed: int,
    n: int,
    methods: List[Method],
    ells: List[float],
    start: int,
    stop: int,
) -> np.ndarray:
    weights = [
        None if m.kind in (Kind.NBB, Kind.CBB) else lag_weights(m, n, ell)
        for m, ell in zip(methods, ells)
    ]
    out = np.empty((stop - start, len(methods)))
    for i, r in enumerate(range(start, stop)):
        x = simulate_ar1(model, n, substream(master_seed, n, r)).values
        acov = sample_autocovariances(x)
        for j, (m, ell, w) in enumerate(zip(methods, ells, weights)):
            out[i, j] = estimates_from_acov(x, acov, m, ell, w)
    return out


def _chunks(total: int, workers: int) -> List[tuple]:
    size = max(1, -(-total // (4 * workers)))
    return [(s, min(total, s + size)) for s in range(0, total, size)]


def _estimate_table(config: ExperimentConfig, n: int, ells: List[float], pool, workers: int) -> np.ndarray:
    model, methods = config.ar1, config.parsed_methods
    R = config.replications
    if pool is None:
        return _replicate(model, config.master_seed, n, methods, ells, 0, R)
    table = np.empty((R, len(methods)))
    futures = [
        (s, e, pool.submit(_replicate, model, config.master_seed, n, methods, ells, s, e))
        for s, e in _chunks(R, workers)
    ]
    for s, e, fut in futures:
        table[s:e] = fut.result()
    return table


@dataclass
class ReportRow:
    n: int
    method: str
    ell: float
    mc_mean: float
    mc_variance: float
    mc_mse: float
    se_variance: float
    theory_variance: Optional[float]
    theory_bias: float
    ratio_to_nbb: Optional[float]
    # not written to the CSV; kept in the JSON metadata
    true_sigma2: float = field(default=float("nan"), metadata={"csv": False})
    se_mean: float = field(default=float("nan"), metadata={"csv": False})
    theory_mse: Optional[float] = field(default=None, metadata={"csv": False})
    normalized_variance: Optional[float] = field(default=None, metadata={"csv": False})
    variance_constant: Optional[float] = field(default=None, metadata={"csv": False})


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(name: str, raw: str) -> Any:
    if name == "n":
        return int(raw)
    if name == "method":
        return raw
    if raw == "":
        return None
    return float(raw)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: List[ReportRow]
    meta: dict = field(default_factory=dict)

    def row(self, n: int, method: str) -> ReportRow:
        for r in self.rows:
            if r.n == n and r.method == method:
                return r
        raise KeyError((n, method))

    def csv_text(self) -> str:
        lines = [",".join(CSV_HEADER)]
        for r in self.rows:
            lines.append(",".join(_fmt(getattr(r, name)) for name in CSV_HEADER))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Union[str, os.PathLike]) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.csv_text())

    def meta_dict(self) -> dict:
        return {
            "config": self.config.model_dump(mode="json"),
            "rows": [asdict(r) for r in self.rows],
            **self.meta,
        }

    def write(self, out_dir: Union[str, os.PathLike]) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.write_csv(out / "report.csv")
        with open(out / "meta.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.meta_dict(), fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
        return out / "report.csv"

    @staticmethod
    def read_csv(path: Union[str, os.PathLike]) -> List[dict]:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
            return [{k: _parse(k, v) for k, v in rec.items()} for rec in reader]


def _theory_variance(model: Ar1Model, method: Method, n: int, ell: float) -> Optional[float]:
    try:
        return asymptotic_variance(model, method, n, ell)
    except UnsupportedMethodError:
        return None


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Run the Monte Carlo loop shared by all experiment types."""
    workers = resolve_workers(workers)
    model, methods = config.ar1, config.parsed_methods
    lrv2 = model.long_run_variance**2
    rows: List[ReportRow] = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for n in config.n_grid:
            ells = [block_length(config, m, n) for m in methods]
            log.info("n=%d: %d replications, blocks %s", n, config.replications, ells)
            table = _estimate_table(config, n, ells, pool, workers)
            sigma2 = ar1_sigma2_n(model, n)
            variances = table.var(axis=0, ddof=1)
            nbb_var = variances[config.methods.index("nbb")] if "nbb" in config.methods else None
            for j, (m, ell) in enumerate(zip(methods, ells)):
                col = table[:, j]
                theory_var = _theory_variance(model, m, n, ell)
                try:
                    c = variance_constant(m)
                except UnsupportedMethodError:
                    c = None
                rows.append(
                    ReportRow(
                        n=n,
                        method=m.label,
                        ell=float(ell),
                        mc_mean=float(col.mean()),
                        mc_variance=float(variances[j]),
                        mc_mse=float(np.mean((col - sigma2) ** 2)),
                        se_variance=jackknife_variance_se(col),
                        theory_variance=theory_var,
                        theory_bias=asymptotic_bias(model, ell),
                        ratio_to_nbb=None if nbb_var is None else float(variances[j] / nbb_var),
                        true_sigma2=sigma2,
                        se_mean=float(col.std(ddof=1) / math.sqrt(col.size)),
                        theory_mse=None if theory_var is None else asymptotic_mse(model, m, n, ell),
                        normalized_variance=float(n / ell * variances[j] / lrv2),
                        variance_constant=c,
                    )
                )
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentReport(config, rows)


def _expect(config: ExperimentConfig, kind: str) -> None:
    if config.experiment != kind:
        raise ValueError(f"experiment: expected {kind!r}, got {config.experiment!r}")


def run_ratio_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Across-replication variance of each estimator and its ratio to NBB, per n."""
    _expect(config, "ratio")
    report = run_experiment(config, workers)
    report.meta["ratio_to_nbb"] = {
        r.method: {str(s.n): s.ratio_to_nbb for s in report.rows if s.method == r.method}
        for r in report.rows
    }
    return report


def run_coefficient_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """(n/ell) Var_MC / (2 pi f(0))^2 per method and n, next to the theoretical constant."""
    _expect(config, "coefficient")
    report = run_experiment(config, workers)
    report.meta["normalized_variance"] = [
        {"n": r.n, "method": r.method, "value": r.normalized_variance, "constant": r.variance_constant}
        for r in report.rows
    ]
    return report


def run_mse_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Empirical MSE at the oracle optimal block lengths, with the CBB/SB MSE ratio."""
    _expect(config, "mse")
    report = run_experiment(config, workers)
    ratios = {}
    for n in config.n_grid:
        try:
            ratios[str(n)] = report.row(n, "cbb").mc_mse / report.row(n, "sb").mc_mse
        except KeyError:
            pass
    report.meta["mse_ratio_cbb_sb"] = ratios
    report.meta["theory_mse"] = [
        {"n": r.n, "method": r.method, "value": r.theory_mse} for r in report.rows
    ]
    return report


RUNNERS = {
    "ratio": run_ratio_experiment,
    "coefficient": run_coefficient_experiment,
    "mse": run_mse_experiment,
}


def run(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    return RUNNERS[config.experiment](config, workers)
