"""
Block bootstrap estimators of sigma_n^2 = n Var(sample mean).

Closed forms are provided for the stationary (SB), nonoverlapping (NBB),
moving (MBB), circular (CBB) and tapered (TBB) block bootstraps. The
resamplers draw actual bootstrap samples and back
:func:`conditional_variance_mc`, a Monte Carlo check of the closed forms.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._exceptions import InvalidSpecError
from .series import (
    SeedLike,
    TimeSeries,
    _rng,
    as_series,
    circular_autocovariances,
    sample_autocovariances,
)

__all__ = [
    "Kind",
    "TaperWindow",
    "Method",
    "BlockSpec",
    "SB",
    "NBB",
    "MBB",
    "CBB",
    "rectangular_taper",
    "trapezoid_taper",
    "taper_autocorrelation",
    "sb_weight",
    "sb_weights",
    "lag_weights",
    "estimates_from_acov",
    "sb_estimate",
    "nbb_estimate",
    "cbb_estimate",
    "mbb_estimate",
    "tbb_estimate",
    "estimate",
    "sb_resample",
    "block_resample",
    "conditional_variance_mc",
]


class Kind(str, enum.Enum):
    SB = "sb"
    NBB = "nbb"
    MBB = "mbb"
    CBB = "cbb"
    TBB = "tbb"


def _rectangular(t: float) -> float:
    return 1.0


def _trapezoid(t: float, c: float) -> float:
    return max(0.0, min(t / c, 1.0, (1.0 - t) / c))


@dataclass(frozen=True)
class TaperWindow:
    """A tapering window w: [0, 1] -> [0, 1]."""

    name: str
    w: Callable[[float], float] = field(compare=False)

    def __call__(self, t: float) -> float:
        return self.w(t)


def rectangular_taper() -> TaperWindow:
    return TaperWindow("rectangular", _rectangular)


def trapezoid_taper(c: float = 0.43) -> TaperWindow:
    """Trapezoid w_c(t) = min(t/c, 1, (1-t)/c), the usual TBB default with c = 0.43."""
    if not 0.0 < c <= 0.5:
        raise ValueError(f"trapezoid parameter c must lie in (0, 0.5], got {c}")
    return TaperWindow(f"trapezoid({c:g})", functools.partial(_trapezoid, c=c))


@dataclass(frozen=True)
class Method:
    kind: Kind
    taper: Optional[TaperWindow] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        if (self.kind is Kind.TBB) != (self.taper is not None):
            raise InvalidSpecError("a taper is required for TBB and only for TBB")

    @classmethod
    def parse(cls, name: str) -> "Method":
        """Build from a name: ``sb``, ``nbb``, ``mbb``, ``cbb``, ``tbb`` or ``tbb:rectangular``."""
        base, _, taper = name.strip().lower().partition(":")
        try:
            kind = Kind(base)
        except ValueError:
            raise InvalidSpecError(f"unknown method {name!r}") from None
        if kind is Kind.TBB:
            if taper in ("", "trapezoid"):
                return cls(kind, trapezoid_taper())
            if taper in ("rect", "rectangular"):
                return cls(kind, rectangular_taper())
            raise InvalidSpecError(f"unknown taper {taper!r}")
        if taper:
            raise InvalidSpecError(f"method {base!r} takes no taper")
        return cls(kind)

    @property
    def label(self) -> str:
        if self.kind is Kind.TBB and self.taper is not None and self.taper.name == "rectangular":
            return "tbb:rectangular"
        return self.kind.value

    @property
    def fixed_block(self) -> bool:
        return self.kind is not Kind.SB

    def __str__(self) -> str:
        return self.label


SB = Method(Kind.SB)
NBB = Method(Kind.NBB)
MBB = Method(Kind.MBB)
CBB = Method(Kind.CBB)


@dataclass(frozen=True)
class BlockSpec:
    """Block length ``ell``: expected length for SB (p = 1/ell), fixed length otherwise."""

    ell: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.ell) or self.ell < 1.0:
            raise InvalidSpecError(f"block length must be >= 1, got {self.ell!r}")

    @property
    def p(self) -> float:
        return 1.0 / self.ell

    @property
    def q(self) -> float:
        return 1.0 - 1.0 / self.ell

    def fixed(self, n: int) -> int:
        """Integer block length for a fixed-block method on a series of length n."""
        if self.ell != int(self.ell):
            raise InvalidSpecError(f"fixed-block methods need an integer block length, got {self.ell!r}")
        ell = int(self.ell)
        if ell > n:
            raise InvalidSpecError(f"block length {ell} exceeds series length {n}")
        return ell


def _spec(spec: BlockSpec | float) -> BlockSpec:
    return spec if isinstance(spec, BlockSpec) else BlockSpec(float(spec))


# ---------------------------------------------------------------------------
# Lag weights

def sb_weight(k: int, n: int, spec: BlockSpec | float) -> float:
    """q_{k,n} = (1 - k/n) q^k + (k/n) q^(n-k)."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"lag k must lie in [1, {n - 1}], got {k}")
    q = _spec(spec).q
    # written so that the k and n - k terms swap places exactly
    return ((n - k) * q**k + k * q ** (n - k)) / n


def sb_weights(n: int, spec: BlockSpec | float) -> NDArray[np.float64]:
    """Vector (q_{1,n}, ..., q_{n-1,n})."""
    q = _spec(spec).q
    k = np.arange(1, n, dtype=np.float64)
    with np.errstate(under="ignore"):
        return ((n - k) * q**k + k * q ** (n - k)) / n


def taper_autocorrelation(taper: TaperWindow, ell: int) -> NDArray[np.float64]:
    """v(k) = sum_{t=1}^{ell-k} w(t/ell) w((t+k)/ell) for k = 0, ..., ell-1."""
    w = np.array([taper(t / ell) for t in range(1, ell + 1)], dtype=np.float64)
    return np.array([np.sum(w[: ell - k] * w[k:]) for k in range(ell)])


def lag_weights(method: Method, n: int, spec: BlockSpec | float) -> NDArray[np.float64]:
    """
    Full weight vector (a_0, ..., a_{n-1}) such that the estimator equals
    sum_k a_k r_hat(k).
    """
    spec = _spec(spec)
    a = np.zeros(n)
    a[0] = 1.0
    if method.kind is Kind.SB:
        a[1:] = 2.0 * sb_weights(n, spec)
        return a
    if method.kind is Kind.NBB:
        raise InvalidSpecError("NBB has no lag-weight representation")
    ell = spec.fixed(n)
    k = np.arange(1, ell)
    if method.kind in (Kind.MBB, Kind.CBB):
        a[1:ell] = 2.0 * (ell - k) / ell
    else:
        v = taper_autocorrelation(method.taper, ell)
        if v[0] <= 0.0:
            raise InvalidSpecError(f"taper {method.taper.name} vanishes at block length {ell}")
        a[1:ell] = 2.0 * v[1:] / v[0]
    if method.kind is Kind.CBB:
        # mirror a_{n-k} = a_k for n - ell < k < n; overlapping ranges add
        a[n - ell + 1:] += a[1:ell][::-1].copy()
    return a


def _lag_weighted(acov: NDArray[np.float64], a: NDArray[np.float64]) -> float:
    return float(np.dot(a, acov))


# ---------------------------------------------------------------------------
# Closed-form estimators

def sb_estimate(series: TimeSeries | ArrayLike, spec: BlockSpec | float) -> float:
    """r_hat(0) + 2 sum_{k=1}^{n-1} q_{k,n} r_hat(k), the exact SB conditional variance."""
    x = as_series(series)
    if x.n < 2:
        raise ValueError("SB estimate needs n >= 2")
    return _lag_weighted(sample_autocovariances(x), lag_weights(SB, x.n, spec))


def nbb_estimate(series: TimeSeries | ArrayLike, spec: BlockSpec | float) -> float:
    """(ell/b) sum_i (block mean_i - grand block mean)^2 over b = floor(n/ell) disjoint blocks."""
    x = as_series(series).values
    ell = _spec(spec).fixed(x.size)
    b = x.size // ell
    means = x[: b * ell].reshape(b, ell).mean(axis=1)
    return float(ell * np.mean((means - means.mean()) ** 2))


def cbb_estimate(series: TimeSeries | ArrayLike, spec: BlockSpec | float) -> float:
    """r_hat(0) + 2 sum_{k<ell} (1 - k/ell) r_hat_cir(k)."""
    x = as_series(series)
    ell = _spec(spec).fixed(x.n)
    rc = circular_autocovariances(x)
    k = np.arange(1, ell)
    return float(rc[0] + 2.0 * np.sum((1.0 - k / ell) * rc[1:ell]))


def mbb_estimate(series: TimeSeries | ArrayLike, spec: BlockSpec | float) -> float:
    """Lag-window form r_hat(0) + 2 sum_{k<ell} (1 - k/ell) r_hat(k)."""
    x = as_series(series)
    return _lag_weighted(sample_autocovariances(x), lag_weights(MBB, x.n, spec))


def tbb_estimate(
    series: TimeSeries | ArrayLike,
    spec: BlockSpec | float,
    taper: TaperWindow | None = None,
) -> float:
    """r_hat(0) + sum_{k<ell} 2 v(k)/v(0) r_hat(k); defaults to the trapezoid taper."""
    x = as_series(series)
    method = Method(Kind.TBB, taper if taper is not None else trapezoid_taper())
    return _lag_weighted(sample_autocovariances(x), lag_weights(method, x.n, spec))


def estimate(series: TimeSeries | ArrayLike, method: Method | str, spec: BlockSpec | float) -> float:
    """Dispatch to the closed-form estimator for ``method``."""
    if isinstance(method, str):
        method = Method.parse(method)
    if method.kind is Kind.SB:
        return sb_estimate(series, spec)
    if method.kind is Kind.NBB:
        return nbb_estimate(series, spec)
    if method.kind is Kind.MBB:
        return mbb_estimate(series, spec)
    if method.kind is Kind.CBB:
        return cbb_estimate(series, spec)
    return tbb_estimate(series, spec, method.taper)


def estimates_from_acov(
    x: NDArray[np.float64],
    acov: NDArray[np.float64],
    method: Method,
    ell: float,
    weights: NDArray[np.float64] | None = None,
) -> float:
    """Fast path for the harness: reuse precomputed r_hat and weights."""
    if method.kind is Kind.NBB:
        return nbb_estimate(x, ell)
    if method.kind is Kind.CBB:
        return cbb_estimate(x, ell)
    if weights is None:
        weights = lag_weights(method, x.size, ell)
    return _lag_weighted(acov, weights)


# ---------------------------------------------------------------------------
# Resampling

def _sb_indices(n: int, p: float, rng: np.random.Generator, size: int) -> NDArray[np.intp]:
    """
    Index matrix (size, n) of SB resamples: geometric block lengths J_i with
    mean 1/p, uniform starts I_i, wrap-around blocks truncated to n.
    """
    lengths = rng.geometric(p, size=(size, n))
    starts = rng.integers(0, n, size=(size, n))
    # offsets at which each block begins in the concatenated sequence
    begin = np.zeros((size, n), dtype=np.int64)
    begin[:, 1:] = np.cumsum(lengths[:, :-1], axis=1)
    is_start = np.zeros((size, n + 1), dtype=bool)
    rows = np.broadcast_to(np.arange(size)[:, None], (size, n))
    valid = begin < n
    is_start[rows[valid], begin[valid]] = True
    block_id = np.cumsum(is_start[:, :n], axis=1) - 1
    pos = np.arange(n)[None, :]
    offset = pos - np.take_along_axis(begin, block_id, axis=1)
    return (np.take_along_axis(starts, block_id, axis=1) + offset) % n


def _block_indices(
    n: int, ell: int, kind: Kind, rng: np.random.Generator, size: int
) -> NDArray[np.intp]:
    """Index matrix of NBB/MBB (length b*ell) or CBB (length n) resamples."""
    within = np.arange(ell)
    if kind is Kind.NBB:
        b = n // ell
        starts = rng.integers(0, b, size=(size, b)) * ell
    elif kind is Kind.MBB:
        b = n // ell
        starts = rng.integers(0, n - ell + 1, size=(size, b))
    elif kind is Kind.CBB:
        b = -(-n // ell)
        starts = rng.integers(0, n, size=(size, b))
    else:
        raise InvalidSpecError(f"block_resample does not support {kind.value}")
    idx = (starts[:, :, None] + within[None, None, :]).reshape(size, -1) % n
    return idx[:, :n] if kind is Kind.CBB else idx


def sb_resample(series: TimeSeries | ArrayLike, spec: BlockSpec | float, seed: SeedLike) -> TimeSeries:
    """One stationary-bootstrap resample of length n."""
    x = as_series(series)
    idx = _sb_indices(x.n, _spec(spec).p, _rng(seed), 1)[0]
    return TimeSeries(x.values[idx])


def block_resample(
    series: TimeSeries | ArrayLike,
    method: Method | str,
    spec: BlockSpec | float,
    seed: SeedLike,
) -> TimeSeries:
    """
    One fixed-block resample.

    NBB and MBB return b*ell values (b = floor(n/ell)); CBB concatenates
    ceil(n/ell) wrap-around blocks and truncates to n.
    """
    if isinstance(method, str):
        method = Method.parse(method)
    x = as_series(series)
    ell = _spec(spec).fixed(x.n)
    idx = _block_indices(x.n, ell, method.kind, _rng(seed), 1)[0]
    return TimeSeries(x.values[idx])


def conditional_variance_mc(
    series: TimeSeries | ArrayLike,
    method: Method | str,
    spec: BlockSpec | float,
    reps: int,
    seed: SeedLike,
    *,
    return_se: bool = False,
    chunk: int = 8192,
) -> Union[float, tuple[float, float]]:
    """
    Monte Carlo estimate of (resample length) * Var*(resample mean | data).

    With ``return_se=True`` a (value, standard error) pair is returned; the
    standard error is the delta-method one for a sample variance,
    L * sqrt((m4 - s^4) / reps).
    """
    if isinstance(method, str):
        method = Method.parse(method)
    if reps < 2:
        raise ValueError("reps must be >= 2")
    x = as_series(series)
    spec = _spec(spec)
    rng = _rng(seed)
    if method.kind is Kind.SB:
        length = x.n
        draw = lambda size: _sb_indices(x.n, spec.p, rng, size)  # noqa: E731
    elif method.kind in (Kind.NBB, Kind.MBB, Kind.CBB):
        ell = spec.fixed(x.n)
        length = x.n if method.kind is Kind.CBB else (x.n // ell) * ell
        draw = lambda size: _block_indices(x.n, ell, method.kind, rng, size)  # noqa: E731
    else:
        raise InvalidSpecError("no resampler for TBB")

    means = np.empty(reps)
    done = 0
    while done < reps:
        size = min(chunk, reps - done)
        means[done : done + size] = x.values[draw(size)].mean(axis=1)
        done += size
    dev = means - means.mean()
    s2 = float(np.mean(dev**2))
    value = length * s2
    if not return_se:
        return value
    m4 = float(np.mean(dev**4))
    se = length * math.sqrt(max(m4 - s2 * s2, 0.0) / reps)
    return value, se
