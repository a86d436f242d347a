"""
Lag-weighted sums of sample autocovariances and their frequency-domain variance.

Every estimator except NBB can be written as T_n = sum_k a_k r_hat(k). The
variance of such a sum is driven by the smoothing window
H_n(w) = sum_{k>=1} a_k (1 - k/n) e^{-ikw} through the kernel
K_n = |H_n|^2 / (2 pi A_n): Var(T_n) ~ A_n (2 pi)^2 / n * int K_n f^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import fftconvolve

from ._exceptions import InvalidSpecError, NumericalIntegrityError
from .estimators import BlockSpec, Method, lag_weights
from .series import Ar1Model, TimeSeries, ar1_spectral_density, as_series, sample_autocovariances

__all__ = [
    "WeightScheme",
    "weights_for",
    "weighted_sum_Tn",
    "capital_A",
    "capital_B",
    "window_H",
    "kernel_K",
    "fejer_kernel",
    "fejer_convolution",
    "fejer_convolution_quadrature",
    "l0n",
    "periodic_trapezoid",
    "kernel_spectral_integral",
    "theorem2_Mn",
    "QUAD_POINTS",
]

# Uniform grid on [-pi, pi]: 2**14 intervals (2**14 + 1 points with both ends).
QUAD_POINTS = 2**14
DEFAULT_WEIGHT_CAP = 1e3


@dataclass(frozen=True, eq=False)
class WeightScheme:
    """Weights a_0, ..., a_{n-1} of a lag-weighted autocovariance sum."""

    a: NDArray[np.float64]
    label: str = "custom"
    cap: float = DEFAULT_WEIGHT_CAP

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=np.float64).ravel()
        if a.size < 1:
            raise InvalidSpecError("weight scheme is empty")
        if not np.all(np.isfinite(a)):
            raise InvalidSpecError("weights must be finite")
        if np.max(np.abs(a)) > self.cap:
            raise InvalidSpecError(f"max |a_k| = {np.max(np.abs(a)):g} exceeds cap {self.cap:g}")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return int(self.a.size)

    @property
    def tapered(self) -> NDArray[np.float64]:
        """b_k = a_k (1 - k/n) for k = 1..n-1 (index 0 of the result is k = 1)."""
        n = self.n
        k = np.arange(1, n)
        return self.a[1:] * (1.0 - k / n)

    def total_variation(self) -> float:
        """sum_{k=2}^{n-1} |a_k - a_{k-1}|."""
        return float(np.sum(np.abs(np.diff(self.a[1:]))))


def weights_for(method: Method | str, n: int, spec: BlockSpec | float) -> WeightScheme:
    if isinstance(method, str):
        method = Method.parse(method)
    ell = spec.ell if isinstance(spec, BlockSpec) else spec
    return WeightScheme(lag_weights(method, n, spec), label=f"{method.label}(ell={ell:g})")


def weighted_sum_Tn(series: TimeSeries | ArrayLike, w: WeightScheme) -> float:
    """T_n = sum_k a_k r_hat(k)."""
    x = as_series(series)
    if x.n != w.n:
        raise ValueError(f"series length {x.n} does not match weight scheme length {w.n}")
    return float(np.dot(w.a, sample_autocovariances(x)))


def capital_A(w: WeightScheme) -> float:
    """A_n = sum_{k=1}^{n-1} a_k^2 (1 - k/n)^2."""
    b = w.tapered
    return float(np.dot(b, b))


def capital_B(w: WeightScheme) -> float:
    n = w.n
    if n < 2:
        raise ValueError("B_n needs n >= 2")
    k = np.arange(1, n)
    abs_a = np.abs(w.a[1:])
    return float(
        1.0 / n
        + np.sum(abs_a) ** 2 * math.log(n) / n**2
        + np.sum(abs_a * (k / n) * (1.0 - k / n)) / n
    )


def window_H(w: WeightScheme, omega: ArrayLike) -> complex | NDArray[np.complex128]:
    """H_n(omega) = sum_{k=1}^{n-1} a_k (1 - k/n) e^{-i k omega}, by direct summation."""
    om = np.asarray(omega, dtype=np.float64)
    k = np.arange(1, w.n)
    out = np.exp(-1j * np.multiply.outer(om, k)) @ w.tapered
    return complex(out) if out.ndim == 0 else out


def kernel_K(w: WeightScheme, omega: ArrayLike) -> float | NDArray[np.float64]:
    """K_n(omega) = |H_n(omega)|^2 / (2 pi A_n)."""
    A = capital_A(w)
    if not A > 0.0:
        raise InvalidSpecError(f"A_n must be positive to form K_n ({w.label})")
    h = np.asarray(window_H(w, omega))
    out = (h.real**2 + h.imag**2) / (2.0 * np.pi * A)
    return float(out) if out.ndim == 0 else out


def _grid_size(degree: int, points: int) -> int:
    size = points
    while size < 2 * degree + 2:
        size *= 2
    return size


def _window_on_grid(w: WeightScheme, size: int) -> NDArray[np.complex128]:
    """H_n at omega_j = -pi + 2 pi j / size, j = 0..size-1, via one FFT."""
    coef = np.zeros(size)
    k = np.arange(1, w.n)
    # e^{-ik(-pi + 2 pi j/size)} = (-1)^k e^{-2 pi i jk/size}
    coef[1 : w.n] = w.tapered * np.where(k % 2 == 0, 1.0, -1.0)
    return np.fft.fft(coef)


def periodic_trapezoid(values: NDArray, size: int) -> complex | float:
    """
    Composite trapezoid over [-pi, pi] for 2 pi-periodic samples taken at
    omega_j = -pi + 2 pi j / size (the duplicate endpoint is folded in).
    """
    return (2.0 * np.pi / size) * np.sum(values)


def _grid(size: int) -> NDArray[np.float64]:
    return -np.pi + 2.0 * np.pi * np.arange(size) / size


def fejer_kernel(n: int, omega: ArrayLike) -> float | NDArray[np.float64]:
    """K_n^F(omega) = (2 pi)^-1 sum_{|t|<=n} (1 - |t|/n) e^{-i t omega} = |H_n^F|^2/(2 pi n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    om = np.asarray(omega, dtype=np.float64)
    half = np.sin(om / 2.0)
    small = np.abs(half) < 1e-8
    safe = np.where(small, 1.0, half)
    out = np.where(small, float(n), np.sin(n * om / 2.0) ** 2 / (n * safe**2)) / (2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def fejer_convolution_quadrature(n: int, k: int, omega: float, points: int = QUAD_POINTS) -> complex:
    """int_{-pi}^{pi} e^{ik lambda} K_n^F(omega - lambda) d lambda, by the trapezoid rule."""
    size = _grid_size(n, points)
    lam = _grid(size)
    return complex(periodic_trapezoid(np.exp(1j * k * lam) * fejer_kernel(n, omega - lam), size))


def fejer_convolution(n: int, k: int, omega: float, tol: float = 1e-6) -> complex:
    """
    (1 - k/n) e^{ik omega}, after confirming it against the quadrature of the
    Fejer convolution integral.
    """
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    exact = (1.0 - k / n) * complex(math.cos(k * omega), math.sin(k * omega))
    quad = fejer_convolution_quadrature(n, k, omega)
    if abs(quad - exact) > tol:
        raise NumericalIntegrityError(
            f"Fejer convolution mismatch at n={n}, k={k}, omega={omega}: {abs(quad - exact):.3e}"
        )
    return exact


def l0n(n: int, omega: ArrayLike) -> float | NDArray[np.float64]:
    """L_{0,n}: n near zero, 1/|omega| otherwise, with omega reduced to (-pi, pi]."""
    om = np.asarray(omega, dtype=np.float64)
    red = np.pi - np.mod(np.pi - om, 2.0 * np.pi)
    mag = np.abs(red)
    out = np.where(mag <= 1.0 / n, float(n), 1.0 / np.where(mag == 0.0, 1.0, mag))
    return float(out) if out.ndim == 0 else out


def _cov_products(model: Ar1Model, m: int) -> NDArray[np.float64]:
    """cov_product_sum(model, d) for d = 0..m-1, vectorised."""
    d = np.arange(m, dtype=np.float64)
    phi = model.phi
    r0 = model.variance
    with np.errstate(under="ignore"):
        return r0 * r0 * np.power(phi, d) * ((1.0 + phi * phi) / (1.0 - phi * phi) + d) / (2.0 * np.pi)


def _spectral_double_sum(w: WeightScheme, model: Ar1Model, A: float) -> float:
    b = w.tapered
    m = b.size
    if m == 0:
        return 0.0
    # sum_{j,k} b_j b_k c(j - k) = sum_d c(d) * autocorr_b(d)
    if m <= 4096:
        corr = np.correlate(b, b, mode="full")
    else:
        corr = fftconvolve(b, b[::-1], mode="full")
    d = np.arange(-(m - 1), m)
    c = _cov_products(model, m)
    return float(np.dot(corr, c[np.abs(d)]) / (2.0 * np.pi * A))


def _spectral_quadrature(w: WeightScheme, model: Ar1Model, A: float, points: int) -> float:
    size = _grid_size(w.n, points)
    h = _window_on_grid(w, size)
    K = (h.real**2 + h.imag**2) / (2.0 * np.pi * A)
    f = ar1_spectral_density(model, _grid(size))
    return float(periodic_trapezoid(K * f * f, size))


def kernel_spectral_integral(
    w: WeightScheme,
    model: Ar1Model,
    *,
    verify: bool = True,
    rtol: float = 1e-8,
    points: int = QUAD_POINTS,
) -> float:
    """
    int_{-pi}^{pi} K_n(omega) f(omega)^2 d omega for an AR(1) density.

    The exact double sum over covariance products is returned; with
    ``verify`` it is also checked against trapezoid quadrature and a
    NumericalIntegrityError is raised if they differ by more than ``rtol``.
    """
    A = capital_A(w)
    if not A > 0.0:
        raise InvalidSpecError(f"A_n must be positive ({w.label})")
    exact = _spectral_double_sum(w, model, A)
    if verify:
        quad = _spectral_quadrature(w, model, A, points)
        if abs(quad - exact) > rtol * abs(exact):
            raise NumericalIntegrityError(
                f"spectral integral: quadrature {quad!r} vs double sum {exact!r}"
            )
    return exact


def theorem2_Mn(w: WeightScheme, model: Ar1Model, n: int | None = None, *, verify: bool = True) -> float:
    """Leading variance of T_n: M_n = A_n (2 pi)^2 / n * int K_n f^2."""
    if n is None:
        n = w.n
    if n != w.n:
        raise ValueError(f"n={n} does not match weight scheme length {w.n}")
    return capital_A(w) * (2.0 * np.pi) ** 2 / n * kernel_spectral_integral(w, model, verify=verify)
