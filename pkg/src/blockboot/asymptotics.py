"""Leading-order variance, bias, MSE and optimal block lengths of block bootstrap estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from ._exceptions import UndefinedOptimumError, UnsupportedMethodError
from .estimators import Kind, Method
from .series import Ar1Model, TimeSeries, ar1_long_run_G, as_series, sample_autocovariances

__all__ = [
    "AsymptoticSummary",
    "variance_constant",
    "asymptotic_variance",
    "asymptotic_bias",
    "asymptotic_mse",
    "optimal_block",
    "are_sb_vs_cbb",
    "summarize",
    "flat_top",
    "plugin_optimal_block",
]


def _method(method: Method | str) -> Method:
    return Method.parse(method) if isinstance(method, str) else method


def variance_constant(method: Method | str) -> float:
    """c in Var ~ c (2 pi f(0))^2 ell / n: 2 for SB/NBB, 4/3 for MBB/CBB (and untapered TBB)."""
    method = _method(method)
    if method.kind in (Kind.SB, Kind.NBB):
        return 2.0
    if method.kind in (Kind.MBB, Kind.CBB):
        return 4.0 / 3.0
    if method.taper is not None and method.taper.name == "rectangular":
        return 4.0 / 3.0
    raise UnsupportedMethodError(f"no variance constant for TBB with taper {method.taper.name}")


def _lrv(model: Ar1Model) -> float:
    return model.long_run_variance


def asymptotic_variance(model: Ar1Model, method: Method | str, n: float, ell: float) -> float:
    # the constant goes last so that method ratios come out as c_1 / c_2
    return variance_constant(method) * (_lrv(model) ** 2 * ell / n)


def asymptotic_bias(model: Ar1Model, ell: float) -> float:
    """-G / ell, shared by all block bootstrap estimators."""
    # + 0.0 turns -0.0 into 0.0 for white noise
    return -ar1_long_run_G(model) / ell + 0.0


def asymptotic_mse(model: Ar1Model, method: Method | str, n: float, ell: float) -> float:
    return asymptotic_variance(model, method, n, ell) + asymptotic_bias(model, ell) ** 2


def _optimal_from(G: float, lrv: float, c: float, n: float) -> float:
    # minimiser of c lrv^2 ell/n + G^2/ell^2
    return (2.0 * G * G / (c * lrv * lrv)) ** (1.0 / 3.0) * n ** (1.0 / 3.0)


def optimal_block(model: Ar1Model, method: Method | str, n: float) -> float:
    """
    MSE-optimal block length |G / (2 pi f(0))|^{2/3} n^{1/3} for SB/NBB;
    (3/2)^{1/3} times that for MBB/CBB.
    """
    G = ar1_long_run_G(model)
    if G == 0.0:
        raise UndefinedOptimumError("G = 0: the bias term vanishes and no finite optimum exists")
    return _optimal_from(G, _lrv(model), variance_constant(method), n)


def are_sb_vs_cbb() -> float:
    """Limiting ratio MSE_CBB / MSE_SB at the respective optimal blocks: (2/3)^{2/3}."""
    return (2.0 / 3.0) ** (2.0 / 3.0)


@dataclass(frozen=True)
class AsymptoticSummary:
    method: Method
    variance_coeff: float
    bias_coeff: float
    variance: float
    bias: float
    mse: float
    ell_opt: Optional[float]

    def as_dict(self) -> dict:
        return {
            "method": self.method.label,
            "variance_coeff": self.variance_coeff,
            "bias_coeff": self.bias_coeff,
            "variance": self.variance,
            "bias": self.bias,
            "mse": self.mse,
            "ell_opt": self.ell_opt,
        }


def summarize(model: Ar1Model, method: Method | str, n: float, ell: float) -> AsymptoticSummary:
    method = _method(method)
    try:
        ell_opt: Optional[float] = optimal_block(model, method, n)
    except UndefinedOptimumError:
        ell_opt = None
    return AsymptoticSummary(
        method=method,
        variance_coeff=variance_constant(method) * _lrv(model) ** 2,
        bias_coeff=-ar1_long_run_G(model) + 0.0,
        variance=asymptotic_variance(model, method, n, ell),
        bias=asymptotic_bias(model, ell),
        mse=asymptotic_mse(model, method, n, ell),
        ell_opt=ell_opt,
    )


def flat_top(t: ArrayLike) -> np.ndarray:
    """Trapezoidal flat-top lag window: 1 on |t| <= 1/2, 2(1 - |t|) to |t| = 1, then 0."""
    a = np.abs(np.asarray(t, dtype=np.float64))
    return np.clip(np.minimum(1.0, 2.0 * (1.0 - a)), 0.0, None)


def plugin_optimal_block(
    series: TimeSeries | ArrayLike,
    method: Method | str,
    *,
    bandwidth: int | None = None,
    g_tol: float = 1e-8,
) -> float:
    """
    Plug-in estimate of the optimal block length.

    Estimates 2 pi f(0) and G with flat-top-weighted sample autocovariances
    up to lag ``bandwidth`` (default max(2, 2 ceil(n^{1/5}))) and substitutes
    them into the optimal-block formula. Falls back to ceil(n^{1/3}) when
    |G_hat| < g_tol * r_hat(0) or the long-run variance estimate is not
    positive.
    """
    x = as_series(series)
    n = x.n
    if n < 50:
        raise ValueError(f"plug-in block selection needs n >= 50, got {n}")
    m = bandwidth if bandwidth is not None else max(2, 2 * math.ceil(n ** (1.0 / 5.0)))
    m = min(m, n - 1)
    acov = sample_autocovariances(x)
    k = np.arange(1, m + 1)
    lam = flat_top(k / m)
    lrv = float(acov[0] + 2.0 * np.sum(lam * acov[1 : m + 1]))
    G = float(2.0 * np.sum(k * lam * acov[1 : m + 1]))
    if abs(G) < g_tol * acov[0] or lrv <= 0.0:
        return float(math.ceil(n ** (1.0 / 3.0)))
    return _optimal_from(G, lrv, variance_constant(method), n)
