"""
Time-series containers, sample autocovariances and AR(1) oracles.

The AR(1) helpers return exact population quantities (autocovariances,
spectral density, the bias constant G and lag-shifted covariance products)
so that estimators can be checked against known targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import lfilter

__all__ = [
    "TimeSeries",
    "Ar1Model",
    "as_series",
    "substream",
    "sample_mean",
    "sample_autocov",
    "sample_autocovariances",
    "circular_autocov",
    "circular_autocovariances",
    "simulate_ar1",
    "ar1_autocov",
    "ar1_spectral_density",
    "ar1_long_run_G",
    "ar1_sigma2_n",
    "cov_product_sum",
    "read_series",
    "write_series",
]

SeedLike = Union[int, np.random.Generator]

# Truncation rule for infinite-series fallbacks.
_SERIES_RTOL = 1e-15
_SERIES_MAX_TERMS = 100_000


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An ordered, finite, real-valued sample X_1, ..., X_n."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("series values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


def as_series(series: TimeSeries | ArrayLike) -> TimeSeries:
    if isinstance(series, TimeSeries):
        return series
    return TimeSeries(np.asarray(series, dtype=np.float64))


@dataclass(frozen=True)
class Ar1Model:
    """Stationary Gaussian AR(1): X_t = phi * X_{t-1} + sigma_z * Z_t."""

    phi: float
    sigma_z: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi) or abs(self.phi) >= 1.0:
            raise ValueError(f"phi must satisfy |phi| < 1, got {self.phi!r}")
        if not math.isfinite(self.sigma_z) or self.sigma_z <= 0.0:
            raise ValueError(f"sigma_z must be positive, got {self.sigma_z!r}")

    @property
    def variance(self) -> float:
        return self.sigma_z**2 / (1.0 - self.phi**2)

    @property
    def long_run_variance(self) -> float:
        """2*pi*f(0) = sum_k r(k)."""
        return self.sigma_z**2 / (1.0 - self.phi) ** 2


def substream(master_seed: int, *keys: int) -> np.random.Generator:
    """
    Independent generator for substream ``keys`` of ``master_seed``.

    The stream is a pure function of ``(master_seed, keys)`` and uses the
    counter-based Philox bit generator, so replications can be computed in
    any order or on any worker.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(int(seed))


def sample_mean(series: TimeSeries | ArrayLike) -> float:
    x = as_series(series).values
    if x.size == 0:
        raise ValueError("sample mean of an empty series")
    return float(np.mean(x))


def _check_lag(k: int, n: int) -> int:
    if int(k) != k or not 0 <= k <= n - 1:
        raise ValueError(f"lag k must be an integer in [0, {n - 1}], got {k!r}")
    return int(k)


def sample_autocov(series: TimeSeries | ArrayLike, k: int) -> float:
    """r_hat(k) = n^-1 sum_{t=1}^{n-k} (X_t - mean)(X_{t+k} - mean)."""
    x = as_series(series).values
    n = x.size
    k = _check_lag(k, n)
    xc = x - x.mean()
    return float(np.dot(xc[: n - k], xc[k:]) / n)


def _fft_size(m: int) -> int:
    from scipy.fft import next_fast_len

    return next_fast_len(m, real=True)


def sample_autocovariances(series: TimeSeries | ArrayLike) -> NDArray[np.float64]:
    """All sample autocovariances r_hat(0), ..., r_hat(n-1) (divisor n), via FFT."""
    x = np.asarray(as_series(series).values)
    n = x.size
    if n == 0:
        raise ValueError("autocovariances of an empty series")
    xc = x - x.mean()
    size = _fft_size(2 * n - 1)
    spec = np.fft.rfft(xc, size)
    acov = np.fft.irfft(spec.real**2 + spec.imag**2, size)[:n]
    return acov / n


def circular_autocov(series: TimeSeries | ArrayLike, k: int) -> float:
    """r_hat_cir(k) with the periodic extension X_{t+n} = X_t."""
    x = as_series(series).values
    n = x.size
    k = _check_lag(k, n)
    xc = x - x.mean()
    return float(np.dot(xc, np.roll(xc, -k)) / n)


def circular_autocovariances(series: TimeSeries | ArrayLike) -> NDArray[np.float64]:
    x = as_series(series).values
    n = x.size
    xc = x - x.mean()
    spec = np.fft.rfft(xc)
    return np.fft.irfft(spec.real**2 + spec.imag**2, n) / n


def simulate_ar1(model: Ar1Model, n: int, seed: SeedLike) -> TimeSeries:
    """
    Draw a stationary Gaussian AR(1) path of length ``n``.

    X_1 comes from the stationary law N(0, sigma_z^2 / (1 - phi^2)), so the
    path is stationary from the first observation (no burn-in).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    z = _rng(seed).standard_normal(n)
    x = np.empty(n)
    x[0] = math.sqrt(model.variance) * z[0]
    if n > 1:
        x[1:] = lfilter(
            [model.sigma_z], [1.0, -model.phi], z[1:], zi=[model.phi * x[0]]
        )[0]
    return TimeSeries(x)


def ar1_autocov(model: Ar1Model, k: int) -> float:
    k = abs(int(k))
    return model.variance * model.phi**k


def ar1_spectral_density(model: Ar1Model, omega: ArrayLike) -> float | NDArray[np.float64]:
    """f(omega) = sigma_z^2 / (2 pi (1 - 2 phi cos(omega) + phi^2))."""
    w = np.asarray(omega, dtype=np.float64)
    phi = model.phi
    out = model.sigma_z**2 / (2.0 * np.pi * (1.0 - 2.0 * phi * np.cos(w) + phi * phi))
    return float(out) if out.ndim == 0 else out


def _sum_series(terms: Iterable[float]) -> float:
    total = 0.0
    for i, term in enumerate(terms):
        total += term
        if i >= _SERIES_MAX_TERMS or (term != 0.0 and abs(term) < _SERIES_RTOL * abs(total)):
            break
        if term == 0.0 and i > 0:
            break
    return total


def ar1_long_run_G(model: Ar1Model, method: str = "closed") -> float:
    """
    G = sum_{k in Z} |k| r(k).

    ``method="series"`` sums the lag series directly (truncated when the
    terms fall below 1e-15 of the partial sum, at most 1e5 terms).
    """
    phi = model.phi
    if method == "closed":
        return 2.0 * model.variance * phi / (1.0 - phi) ** 2
    if method == "series":
        return 2.0 * _sum_series(k * ar1_autocov(model, k) for k in range(1, _SERIES_MAX_TERMS + 1))
    raise ValueError(f"unknown method {method!r}")


def ar1_sigma2_n(model: Ar1Model, n: int) -> float:
    """Finite-sample target sigma_n^2 = n Var(mean) = sum_{|k|<n} (1 - |k|/n) r(k)."""
    k = np.arange(1, n)
    r = model.variance * model.phi**k
    return float(model.variance + 2.0 * np.sum((1.0 - k / n) * r))


def cov_product_sum(model: Ar1Model, d: int, method: str = "closed") -> float:
    """
    (2 pi)^-1 sum_{t in Z} r(t) r(t + d), which equals the Fourier coefficient
    of f^2 at lag d over [-pi, pi].

    For AR(1) the sum is r(0)^2 phi^|d| ((1 + phi^2)/(1 - phi^2) + |d|).
    """
    d = abs(int(d))
    phi = model.phi
    r0 = model.variance
    if method == "closed":
        return r0 * r0 * phi**d * ((1.0 + phi * phi) / (1.0 - phi * phi) + d) / (2.0 * np.pi)
    if method == "series":
        # t >= 0 and t <= -d tails, plus the d - 1 middle terms
        tail = _sum_series(ar1_autocov(model, t) * ar1_autocov(model, t + d) for t in range(_SERIES_MAX_TERMS))
        middle = sum(ar1_autocov(model, t) * ar1_autocov(model, t + d) for t in range(-d + 1, 0))
        return (2.0 * tail + middle) / (2.0 * np.pi) if d > 0 else (2.0 * tail - r0 * r0) / (2.0 * np.pi)
    raise ValueError(f"unknown method {method!r}")


def read_series(path: str | PathLike) -> TimeSeries:
    """Read one finite decimal per line; '#' lines and blank lines are skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = float(line)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}:{lineno}: non-finite value {line!r}")
            values.append(v)
    return TimeSeries(np.array(values))


def write_series(path: str | PathLike, series: TimeSeries | ArrayLike, comment: str | None = None) -> None:
    x = as_series(series).values
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for v in x:
            fh.write(f"{float(v)!r}\n")
