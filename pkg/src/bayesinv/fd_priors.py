"""Finite-difference prior precision roots for a function sampled on a grid.

A precision root is a matrix M playing the role of Gamma^(-1/2): the prior on
theta is proportional to exp(-||M theta||^2 / (2 tilde_sigma^2)). Smooth
variants penalize second differences, the non-smooth variant penalizes first
differences, and jump variants down-weight selected increments.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PrecisionRoot",
    "SMOOTH_INTERIOR",
    "SMOOTH_ZERO_BOUNDARY",
    "SMOOTH_SOFT_BOUNDARY",
    "NONSMOOTH",
    "SINGLE_JUMP",
    "MULTI_JUMP",
    "build_smooth_interior",
    "build_smooth_zero_boundary",
    "build_smooth_soft_boundary",
    "build_nonsmooth",
    "build_jump",
    "prior_log_density",
    "save_precision_root",
    "load_precision_root",
]

SMOOTH_INTERIOR = "smooth_interior"
SMOOTH_ZERO_BOUNDARY = "smooth_zero_boundary"
SMOOTH_SOFT_BOUNDARY = "smooth_soft_boundary"
NONSMOOTH = "nonsmooth"
SINGLE_JUMP = "single_jump"
MULTI_JUMP = "multi_jump"


@dataclass(frozen=True)
class PrecisionRoot:
    matrix: np.ndarray
    variant: str
    tilde_sigma: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", mat)
        if self.tilde_sigma <= 0:
            raise ValueError(f"tilde_sigma must be positive, got {self.tilde_sigma}")

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def build_smooth_interior(n: int, tilde_sigma: float = 1.0) -> PrecisionRoot:
    """(n-2) x n second-difference rows (-1, 2, -1)/2 at interior nodes.

    Rank n-1 penalty: constants and linear trends are unpenalized.
    """
    if n < 3:
        raise ValueError(f"smooth interior prior needs n >= 3, got {n}")
    mat = np.zeros((n - 2, n))
    for i in range(n - 2):
        mat[i, i] = -0.5
        mat[i, i + 1] = 1.0
        mat[i, i + 2] = -0.5
    return PrecisionRoot(mat, SMOOTH_INTERIOR, tilde_sigma)


def build_smooth_zero_boundary(n: int, tilde_sigma: float = 1.0) -> PrecisionRoot:
    """Square tridiagonal variant assuming theta vanishes outside the interval."""
    if n < 2:
        raise ValueError(f"zero-boundary prior needs n >= 2, got {n}")
    mat = (
        np.diag(np.full(n, 1.0))
        + np.diag(np.full(n - 1, -0.5), 1)
        + np.diag(np.full(n - 1, -0.5), -1)
    )
    return PrecisionRoot(mat, SMOOTH_ZERO_BOUNDARY, tilde_sigma)


def build_smooth_soft_boundary(n: int, tilde_sigma: float = 1.0) -> PrecisionRoot:
    """Square variant with boundary rows (delta, 0, ...) and (..., 0, delta).

    delta^2 is set to 1 / e_mid^T (Lz^T Lz)^(-1) e_mid computed from the
    zero-boundary variant, so the boundary prior variance matches the
    mid-grid variance of the zero-boundary prior.
    """
    if n < 3:
        raise ValueError(f"soft-boundary prior needs n >= 3, got {n}")
    lz = build_smooth_zero_boundary(n).matrix
    gram = lz.T @ lz
    mid = n // 2
    e_mid = np.zeros(n)
    e_mid[mid] = 1.0
    try:
        mid_var = np.linalg.solve(gram, e_mid)[mid]
    except np.linalg.LinAlgError as exc:  # pragma: no cover - Lz is nonsingular
        raise np.linalg.LinAlgError("zero-boundary Gram matrix is singular") from exc
    delta = 1.0 / np.sqrt(mid_var)
    mat = lz.copy()
    mat[0, :] = 0.0
    mat[0, 0] = delta
    mat[-1, :] = 0.0
    mat[-1, -1] = delta
    return PrecisionRoot(mat, SMOOTH_SOFT_BOUNDARY, tilde_sigma, {"delta": float(delta)})


def build_nonsmooth(n: int, tilde_sigma: float = 1.0) -> PrecisionRoot:
    """Lower-bidiagonal first-difference rows, scaled by 1/2, theta(0) pinned."""
    if n < 2:
        raise ValueError(f"non-smooth prior needs n >= 2, got {n}")
    mat = np.diag(np.full(n, 0.5)) + np.diag(np.full(n - 1, -0.5), -1)
    return PrecisionRoot(mat, NONSMOOTH, tilde_sigma)


def build_jump(n: int, jumps, tilde_sigma: float = 1.0) -> PrecisionRoot:
    """Diagonal-rescaled first-difference prior, D L* with D = diag(entries).

    ``jumps`` is a list of (index, xi) pairs with 1-based increment index and
    diagonal entry xi in (0, 1). Entries are taken literally; pass xi^2 to
    follow the single-jump convention in which the increment noise has
    variance tilde_sigma^2 / xi^2.
    """
    base = build_nonsmooth(n, tilde_sigma)
    jumps = list(jumps)
    if not jumps:
        return base
    diag = np.ones(n)
    seen = set()
    for idx, xi in jumps:
        if not 1 <= idx <= n:
            raise ValueError(f"jump index {idx} outside 1..{n}")
        if idx in seen:
            raise ValueError(f"duplicate jump index {idx}")
        if not 0.0 < xi < 1.0:
            raise ValueError(f"jump entry must lie in (0, 1), got {xi}")
        seen.add(idx)
        diag[idx - 1] = xi
    variant = SINGLE_JUMP if len(jumps) == 1 else MULTI_JUMP
    mat = diag[:, None] * base.matrix
    return PrecisionRoot(mat, variant, tilde_sigma, {"jumps": [(int(i), float(x)) for i, x in jumps]})


def prior_log_density(root: PrecisionRoot, theta: np.ndarray) -> float:
    """Unnormalized log prior -||M theta||^2 / (2 tilde_sigma^2)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (root.n,):
        raise ValueError(f"theta has shape {theta.shape}, prior expects ({root.n},)")
    r = root.matrix @ theta
    return float(-(r @ r) / (2.0 * root.tilde_sigma**2))


def save_precision_root(root: PrecisionRoot, basepath: str) -> None:
    header = {
        "variant": root.variant,
        "tilde_sigma": root.tilde_sigma,
        "params": root.params,
    }
    with open(basepath + ".json", "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
    with open(basepath + ".csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in root.matrix:
            writer.writerow([repr(float(v)) for v in row])


def load_precision_root(basepath: str) -> PrecisionRoot:
    with open(basepath + ".json") as fh:
        header = json.load(fh)
    with open(basepath + ".csv", newline="") as fh:
        mat = np.array([[float(v) for v in row] for row in csv.reader(fh)])
    params = header["params"]
    if "jumps" in params:
        params["jumps"] = [(int(i), float(x)) for i, x in params["jumps"]]
    return PrecisionRoot(mat, header["variant"], header["tilde_sigma"], params)
