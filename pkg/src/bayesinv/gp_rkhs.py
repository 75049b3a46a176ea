"""Covariance kernels, Nystrom eigen-approximation, GP regression, and
kernels induced by differential penalty operators via spectral inversion.

Kernels are value objects with a broadcasting ``evaluate(x, x')`` callable.
Kernels with a known eigen-system under the uniform measure on [0, 1] carry
``analytic_eigen(j) -> (lambda_j, psi_j)`` with 1-based index j.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, interpolate, linalg

from .spline import spline_kernel

__all__ = [
    "CovarianceKernel",
    "GPRegressionFit",
    "ou_kernel",
    "squared_exponential_kernel",
    "brownian_motion_kernel",
    "spline_cubic_kernel",
    "spectral_numeric_kernel",
    "matrix_kernel",
    "custom_kernel",
    "gram",
    "nystrom_eigen",
    "rkhs_norm_truncated",
    "gp_fit",
    "gp_predict",
    "gp_predict_curve",
    "spectral_kernel",
    "penalty_quadratic_form",
    "export_gp_curve",
]

CONDITION_WARN_THRESHOLD = 1e12


@dataclass(frozen=True)
class CovarianceKernel:
    evaluate: Callable[..., np.ndarray]
    tag: str
    params: dict = field(default_factory=dict)
    analytic_eigen: Optional[Callable[[int], tuple]] = None


def ou_kernel(b: float) -> CovarianceKernel:
    """Ornstein-Uhlenbeck covariance (1/2b) exp(-b |x - x'|)."""
    if b <= 0:
        raise ValueError(f"OU rate b must be positive, got {b}")

    def evaluate(x, xp):
        return np.exp(-b * np.abs(np.asarray(x, dtype=float) - xp)) / (2.0 * b)

    return CovarianceKernel(evaluate, "ornstein_uhlenbeck", {"b": b})


def squared_exponential_kernel(b: float, d: int = 1) -> CovarianceKernel:
    """Squared-exponential covariance exp(-r^2/2b^2) / (2 pi b^2)^(d/2).

    For d > 1, inputs are points with d coordinates in the last axis.
    """
    if b <= 0:
        raise ValueError(f"length scale b must be positive, got {b}")
    if d < 1:
        raise ValueError(f"dimension d must be >= 1, got {d}")
    norm = (2.0 * math.pi * b * b) ** (-d / 2.0)

    def evaluate(x, xp):
        diff = np.asarray(x, dtype=float) - np.asarray(xp, dtype=float)
        r2 = diff**2 if d == 1 else np.sum(diff**2, axis=-1)
        return norm * np.exp(-r2 / (2.0 * b * b))

    return CovarianceKernel(evaluate, "squared_exponential", {"b": b, "d": d})


def brownian_motion_kernel() -> CovarianceKernel:
    """min(x, x') on [0, 1], with its closed-form eigen-system.

    Under the uniform measure, lambda_j = 1/((j - 1/2)^2 pi^2) and
    psi_j(x) = sqrt(2) sin((j - 1/2) pi x).
    """

    def evaluate(x, xp):
        return np.minimum(np.asarray(x, dtype=float), xp)

    def analytic_eigen(j: int):
        if j < 1:
            raise ValueError(f"eigen index must be >= 1, got {j}")
        freq = (j - 0.5) * math.pi
        return 1.0 / freq**2, lambda x: math.sqrt(2.0) * np.sin(freq * np.asarray(x))

    return CovarianceKernel(evaluate, "brownian_motion", {}, analytic_eigen)


def spline_cubic_kernel(variance: float = 1.0) -> CovarianceKernel:
    """Cubic-spline covariance variance * (|x-x'| v^2/2 + v^3/3), v = min."""
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")

    def evaluate(x, xp):
        return variance * spline_kernel(x, xp)

    return CovarianceKernel(evaluate, "spline_cubic", {"variance": variance})


def spectral_numeric_kernel(b, tau_max: float = 4.0, num: int = 2049) -> CovarianceKernel:
    """Stationary kernel tabulated by numeric spectral inversion of ``b``.

    Evaluation interpolates the tabulation; lags beyond tau_max are an error.
    """
    taus = np.linspace(0.0, tau_max, num)
    vals = spectral_kernel(b, taus)
    interp = interpolate.CubicSpline(taus, vals)

    def evaluate(x, xp):
        tau = np.abs(np.asarray(x, dtype=float) - xp)
        if np.any(tau > tau_max):
            raise ValueError(f"lag exceeds tabulated range [0, {tau_max}]")
        return interp(tau)

    return CovarianceKernel(evaluate, "spectral_numeric", {"b": list(map(float, b))})


def matrix_kernel(points, cov) -> CovarianceKernel:
    """Kernel backed by a covariance matrix on a fixed point set.

    Evaluation looks points up by value (1e-9 tolerance); used to restrict a
    grid prior covariance to a GP-regression kernel.
    """
    points = np.asarray(points, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (points.size, points.size):
        raise ValueError("covariance shape does not match point count")

    def lookup(vals):
        vals = np.asarray(vals, dtype=float)
        idx = np.searchsorted(points, vals)
        idx = np.clip(idx, 0, points.size - 1)
        left = np.clip(idx - 1, 0, points.size - 1)
        idx = np.where(
            np.abs(points[left] - vals) < np.abs(points[idx] - vals), left, idx
        )
        if np.any(np.abs(points[idx] - vals) > 1e-9):
            raise ValueError("matrix kernel evaluated off its point set")
        return idx

    def evaluate(x, xp):
        xi, xj = np.broadcast_arrays(lookup(x), lookup(xp))
        out = cov[xi, xj]
        if np.ndim(x) == 0 and np.ndim(xp) == 0:
            return float(out)
        return out

    return CovarianceKernel(evaluate, "custom", {"kind": "matrix"})


def custom_kernel(fn: Callable, tag: str = "custom", params: dict | None = None) -> CovarianceKernel:
    return CovarianceKernel(fn, tag, params or {})


def gram(kernel: CovarianceKernel, points) -> np.ndarray:
    """Gram matrix with entry (i, j) = evaluate(points[i], points[j])."""
    points = np.asarray(points, dtype=float)
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    if points.ndim == 1:
        return np.asarray(kernel.evaluate(points[:, None], points[None, :]), dtype=float)
    n = points.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = kernel.evaluate(points[i], points[j])
    return out


def nystrom_eigen(kernel: CovarianceKernel, n: int, count: int, seed: int):
    """Top eigenpairs of the Gram matrix on n uniform draws from [0, 1].

    Returns [(lambda_hat, u), ...] sorted by decreasing lambda_hat, where
    lambda_hat = lambda_j(Sigma_n) / n estimates the kernel eigenvalue and the
    eigenvectors u have unit Euclidean norm.
    """
    if count > n:
        raise ValueError(f"count {count} exceeds sample size {n}")
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 1.0, n)
    sigma_n = gram(kernel, points)
    try:
        vals, vecs = np.linalg.eigh(sigma_n)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("Gram matrix eigendecomposition failed") from exc
    order = np.argsort(vals)[::-1][:count]
    return [(float(vals[j]) / n, vecs[:, j].copy()) for j in order]


def rkhs_norm_truncated(kernel: CovarianceKernel, theta_coeffs, eigenvalues) -> float:
    """Squared RKHS norm sum theta_i^2 / lambda_i of a truncated expansion."""
    theta = np.asarray(theta_coeffs, dtype=float)
    lam = np.asarray(eigenvalues, dtype=float)
    if theta.shape != lam.shape:
        raise ValueError("coefficient and eigenvalue vectors must have equal length")
    if np.any(lam <= 0):
        raise ValueError("eigenvalues must be positive")
    return float(np.sum(theta**2 / lam))


@dataclass(frozen=True)
class GPRegressionFit:
    x_train: np.ndarray
    y_train: np.ndarray
    kernel: CovarianceKernel
    sigma: float
    coefficients: np.ndarray
    chol_lower: np.ndarray = field(repr=False, default=None)
    condition_estimate: float = 0.0
    ill_conditioned: bool = False


def gp_fit(x, y, kernel: CovarianceKernel, sigma: float) -> GPRegressionFit:
    """Solve (K + sigma^2 I) c = y; attaches a conditioning flag to the fit."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if np.unique(x).size != x.size:
        raise ValueError("training inputs must be distinct")
    kmat = gram(kernel, x) + sigma**2 * np.eye(x.size)
    try:
        chol = linalg.cholesky(kmat, lower=True)
    except linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("K + sigma^2 I is numerically singular") from exc
    coef = linalg.cho_solve((chol, True), y)
    cond = float(np.linalg.cond(kmat))
    return GPRegressionFit(
        x, y, kernel, float(sigma), coef, chol, cond, cond > CONDITION_WARN_THRESHOLD
    )


def gp_predict(fit: GPRegressionFit, x_star: float):
    """Posterior mean and variance at a single point.

    The mean is the representer form sum_i c_i K(x*, x_i). The variance is
    clamped to zero within a -1e-10 tolerance; anything lower is an error.
    """
    s = np.asarray(fit.kernel.evaluate(x_star, fit.x_train), dtype=float)
    mean = float(s @ fit.coefficients)
    w = linalg.cho_solve((fit.chol_lower, True), s)
    var = float(fit.kernel.evaluate(x_star, x_star) - s @ w)
    if var < -1e-10:
        raise ValueError(f"predictive variance {var} below the clamping tolerance")
    return mean, max(var, 0.0)


def gp_predict_curve(fit: GPRegressionFit, xs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized posterior mean and variance over a grid of points."""
    xs = np.asarray(xs, dtype=float)
    smat = np.asarray(fit.kernel.evaluate(xs[:, None], fit.x_train[None, :]), dtype=float)
    means = smat @ fit.coefficients
    w = linalg.cho_solve((fit.chol_lower, True), smat.T)
    diag_prior = np.asarray(fit.kernel.evaluate(xs, xs), dtype=float)
    variances = diag_prior - np.sum(smat * w.T, axis=1)
    if np.any(variances < -1e-10):
        raise ValueError("predictive variance below the clamping tolerance")
    return means, np.clip(variances, 0.0, None)


def _validate_spectrum_coeffs(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("b must be a non-empty coefficient vector")
    if np.any(b < 0):
        raise ValueError("spectrum coefficients must be non-negative")
    if b[0] <= 0:
        raise ValueError("b_0 must be positive for an integrable spectrum")
    if b.size < 2 or np.all(b[1:] == 0):
        raise ValueError(
            "the penalty needs derivative order M >= 1: with b_m = 0 for all "
            "m >= 1 the power spectrum does not decay and has no Fourier inverse"
        )
    return b


def spectral_kernel(b, tau_grid) -> np.ndarray:
    """Invert the power spectrum [sum_m b_m (4 pi^2 s^2)^m]^(-1) numerically.

    Returns kernel values at the requested lags, computed per lag with
    adaptive Fourier (cosine-weighted) quadrature over the half line.
    """
    b = _validate_spectrum_coeffs(b)
    powers = np.arange(b.size)

    def spectrum(s):
        return 1.0 / np.sum(b * (4.0 * math.pi**2 * s * s) ** powers)

    taus = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    out = np.empty(taus.shape)
    for i, tau in enumerate(np.abs(taus)):
        if tau == 0.0:
            val, _ = integrate.quad(spectrum, 0.0, np.inf, epsabs=1e-12, epsrel=1e-11)
        else:
            val, _ = integrate.quad(
                spectrum, 0.0, np.inf, weight="cos", wvar=2.0 * math.pi * tau, limlst=200
            )
        out[i] = 2.0 * val
    return out if np.asarray(tau_grid).ndim else float(out[0])


def _difference_stencil(m: int) -> np.ndarray:
    """Minimal central finite-difference stencil of order m (unscaled)."""
    stencil = np.array([1.0])
    for _ in range(m // 2):
        stencil = np.convolve(stencil, [1.0, -2.0, 1.0])
    if m % 2:
        stencil = np.convolve(stencil, [-0.5, 0.0, 0.5])
    return stencil


def penalty_quadratic_form(n: int, b, theta) -> float:
    """theta^T (sum_m b_m D_m^T D_m) theta approximating the derivative penalty.

    D_m applies the order-m central difference scaled by n^m with grid weight
    1/n folded in, so each term is a Riemann sum for int (theta^(m))^2.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("b must be a non-empty coefficient vector")
    if np.any(b < 0):
        raise ValueError("penalty coefficients must be non-negative")
    order = b.size - 1
    if n < 2 * order + 1:
        raise ValueError(f"need n >= {2 * order + 1} grid points for order {order}, got {n}")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (n,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({n},)")
    total = b[0] * float(theta @ theta) / n
    for m in range(1, order + 1):
        if b[m] == 0.0:
            continue
        stencil = _difference_stencil(m)
        diffs = np.convolve(theta, stencil[::-1], mode="valid") * float(n) ** m
        total += b[m] * float(diffs @ diffs) / n
    return total


def export_gp_curve(fit: GPRegressionFit, xs, path: str) -> None:
    """CSV of (x, mean, sd) over the given grid."""
    xs = np.asarray(xs, dtype=float)
    means, variances = gp_predict_curve(fit, xs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "mean", "sd"])
        for x, m, v in zip(xs, means, variances):
            writer.writerow([repr(float(x)), repr(float(m)), repr(math.sqrt(v))])
