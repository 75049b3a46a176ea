"""Closed-form Gaussian posterior for y = K theta + eps with finite-difference priors.

The posterior mean is the Tikhonov/MAP solution
(K^T K / sigma^2 + M^T M / tilde_sigma^2)^(-1) K^T y / sigma^2 and the inverse
Hessian of the regularized misfit is the posterior covariance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .fd_priors import (
    NONSMOOTH,
    SMOOTH_INTERIOR,
    SMOOTH_SOFT_BOUNDARY,
    SMOOTH_ZERO_BOUNDARY,
    PrecisionRoot,
)
from .forward_ops import ForwardOperator

__all__ = [
    "GaussianPosterior",
    "fit",
    "tikhonov_objective",
    "posterior_covariance",
    "sample",
    "discretized_penalty_norm",
    "export_posterior_bands",
]


@dataclass(frozen=True)
class GaussianPosterior:
    hessian: np.ndarray
    mean: np.ndarray
    sigma: float
    tilde_sigma: float
    operator: ForwardOperator
    prior: PrecisionRoot
    chol_lower: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.mean.shape[0]


def fit(op: ForwardOperator, prior: PrecisionRoot, y: np.ndarray, sigma: float) -> GaussianPosterior:
    """Compute the Gaussian posterior via a symmetric positive-definite solve.

    Raises a linear-algebra error when the Hessian is singular, i.e. when the
    forward operator and the prior together leave some direction of theta
    unconstrained (possible with the rank-deficient smooth-interior prior and
    a rank-deficient operator).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    y = np.asarray(y, dtype=float)
    if y.shape != (op.row_grid.n,):
        raise ValueError(f"y has shape {y.shape}, operator expects ({op.row_grid.n},)")
    if prior.n != op.col_grid.n:
        raise ValueError(
            f"prior acts on {prior.n} nodes but operator has {op.col_grid.n} columns"
        )
    kmat = op.matrix
    mmat = prior.matrix
    hess = kmat.T @ kmat / sigma**2 + mmat.T @ mmat / prior.tilde_sigma**2
    hess = 0.5 * (hess + hess.T)
    try:
        chol = linalg.cholesky(hess, lower=True)
    except linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "posterior Hessian is singular: the forward operator and the "
            f"'{prior.variant}' prior leave unconstrained directions"
        ) from exc
    rhs = kmat.T @ y / sigma**2
    mean = linalg.cho_solve((chol, True), rhs)
    return GaussianPosterior(hess, mean, sigma, prior.tilde_sigma, op, prior, chol)


def tikhonov_objective(post: GaussianPosterior, theta: np.ndarray, y: np.ndarray) -> float:
    """Regularized misfit ||y - K theta||^2/(2 sigma^2) + ||M theta||^2/(2 ts^2)."""
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    if theta.shape != (post.n,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({post.n},)")
    if y.shape != (post.operator.row_grid.n,):
        raise ValueError(f"y has shape {y.shape}, expected ({post.operator.row_grid.n},)")
    resid = y - post.operator.matrix @ theta
    pen = post.prior.matrix @ theta
    return float(resid @ resid / (2.0 * post.sigma**2) + pen @ pen / (2.0 * post.tilde_sigma**2))


def posterior_covariance(post: GaussianPosterior) -> np.ndarray:
    """H^(-1), computed from the stored Cholesky factorization."""
    cov = linalg.cho_solve((post.chol_lower, True), np.eye(post.n))
    return 0.5 * (cov + cov.T)


def sample(post: GaussianPosterior, k: int, seed: int) -> np.ndarray:
    """k independent posterior draws, one per row; deterministic per seed."""
    if k < 1:
        raise ValueError(f"number of draws must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((post.n, k))
    # chol_lower is L with H = L L^T, so L^{-T} z has covariance H^{-1}
    draws = linalg.solve_triangular(post.chol_lower.T, z, lower=False)
    return post.mean[None, :] + draws.T


_SMOOTH_VARIANTS = (SMOOTH_INTERIOR, SMOOTH_ZERO_BOUNDARY, SMOOTH_SOFT_BOUNDARY)


def discretized_penalty_norm(prior: PrecisionRoot, theta: np.ndarray, order: str) -> float:
    """Riemann-sum approximation of the continuum penalty encoded by the prior.

    order="laplacian" (smooth variants): approximates int_0^1 (theta'')^2,
    using 4 n^3 ||M theta||^2 over the interior second-difference rows.
    order="gradient" (non-smooth variant): approximates int_0^1 (theta')^2,
    using 4 n ||M theta||^2 over the interior first-difference rows.

    The factors of 4 undo the 1/2 prefactor carried by the difference
    matrices; n^3 = n^4 (difference-to-derivative) * 1/n (grid weight).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (prior.n,):
        raise ValueError(f"theta has shape {theta.shape}, prior expects ({prior.n},)")
    n = prior.n
    r = prior.matrix @ theta
    if order == "laplacian":
        if prior.variant not in _SMOOTH_VARIANTS:
            raise ValueError(f"laplacian order requires a smooth prior, got '{prior.variant}'")
        interior = r if prior.variant == SMOOTH_INTERIOR else r[1:-1]
        return float(4.0 * n**3 * interior @ interior)
    if order == "gradient":
        if prior.variant != NONSMOOTH:
            raise ValueError(f"gradient order requires the non-smooth prior, got '{prior.variant}'")
        interior = r[1:]
        return float(4.0 * n * interior @ interior)
    raise ValueError(f"order must be 'laplacian' or 'gradient', got '{order}'")


def export_posterior_bands(post: GaussianPosterior, path: str) -> None:
    """CSV of (x, mean, lower, upper) with +-2 posterior standard deviations."""
    sd = np.sqrt(np.diag(posterior_covariance(post)))
    xs = post.operator.col_grid.nodes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "mean", "lower", "upper"])
        for x, m, s in zip(xs, post.mean, sd):
            writer.writerow([repr(float(x)), repr(float(m)), repr(float(m - 2 * s)), repr(float(m + 2 * s))])
