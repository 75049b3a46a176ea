"""Forward integral operators discretized to matrices on regular grids.

Each operator represents a linear map theta -> K theta, where the matrix entry
(i, j) is the scalar kernel evaluated at (x_i, t_j) times the column-grid
spacing (left-endpoint quadrature). Observations follow y = K theta + noise.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "ForwardOperator",
    "make_gaussian_blur",
    "make_travel_time",
    "make_gravity",
    "make_diffraction",
    "make_groundwater",
    "make_identity",
    "apply",
    "simulate_data",
    "save_operator",
    "load_operator",
]


@dataclass(frozen=True)
class Grid:
    """Regular grid of n nodes a + i*(b-a)/n for i = 0..n-1."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2, got n={self.n}")
        if not self.b > self.a:
            raise ValueError(f"grid needs b > a, got [{self.a}, {self.b}]")

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.a + np.arange(self.n) * self.spacing


@dataclass(frozen=True)
class ForwardOperator:
    """Dense discretization of an integral kernel, plus grid metadata."""

    matrix: np.ndarray
    row_grid: Grid
    col_grid: Grid
    kernel_tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", mat)
        if mat.shape != (self.row_grid.n, self.col_grid.n):
            raise ValueError(
                f"matrix shape {mat.shape} does not match grids "
                f"({self.row_grid.n}, {self.col_grid.n})"
            )
        if not np.all(np.isfinite(mat)):
            raise ValueError("operator matrix contains non-finite entries")

    @property
    def shape(self):
        return self.matrix.shape


def _discretize(kernel, row_grid: Grid, col_grid: Grid, tag: str, params: dict) -> ForwardOperator:
    x = row_grid.nodes[:, None]
    t = col_grid.nodes[None, :]
    mat = kernel(x, t) * col_grid.spacing
    return ForwardOperator(mat, row_grid, col_grid, tag, params)


def make_gaussian_blur(grid: Grid, psi: float) -> ForwardOperator:
    """Gaussian convolution kernel exp(-(x-t)^2 / 2 psi^2) / sqrt(2 pi psi^2)."""
    if psi <= 0:
        raise ValueError(f"psi must be positive, got {psi}")
    norm = 1.0 / math.sqrt(2.0 * math.pi * psi * psi)

    def kernel(x, t):
        return norm * np.exp(-((x - t) ** 2) / (2.0 * psi * psi))

    return _discretize(kernel, grid, grid, "gaussian_blur", {"psi": psi})


def make_travel_time(grid: Grid) -> ForwardOperator:
    """Heaviside kernel: cumulative travel time t(z) = integral_0^z s(u) du."""

    def kernel(x, t):
        return (t <= x).astype(float)

    return _discretize(kernel, grid, grid, "travel_time", {})


def make_gravity(grid: Grid, h: float) -> ForwardOperator:
    """Vertical gravity anomaly kernel h / ((t - x)^2 + h^2)^(3/2) at height h."""
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")

    def kernel(x, t):
        return h / ((t - x) ** 2 + h * h) ** 1.5

    return _discretize(kernel, grid, grid, "gravity", {"h": h})


def make_diffraction(grid: Grid) -> ForwardOperator:
    """Slit diffraction kernel on angles in [-pi/2, pi/2].

    (cos s + cos theta)^2 * sinc^2(pi (sin s + sin theta)), with sinc(0) = 1
    by continuity.
    """
    half_pi = math.pi / 2.0
    if grid.a < -half_pi - 1e-12 or grid.b > half_pi + 1e-12:
        raise ValueError("diffraction grid must lie within [-pi/2, pi/2]")

    def kernel(s, th):
        amp = (np.cos(s) + np.cos(th)) ** 2
        z = math.pi * (np.sin(s) + np.sin(th))
        # np.sinc is sin(pi u)/(pi u); feed z/pi to get sin(z)/z
        return amp * np.sinc(z / math.pi) ** 2

    return _discretize(kernel, grid, grid, "diffraction", {})


def make_groundwater(grid: Grid, D: float, nu: float, x_obs: float, T: float) -> ForwardOperator:
    """Advection-diffusion source-history kernel f(x_obs, T_i - t_j).

    f(x, tau) = x / (2 sqrt(pi D tau^3)) * exp(-(x - nu tau)^2 / (4 D tau))
    for tau > 0 and 0 otherwise (causality). The exponent is negative, which
    is the decaying Green's function of the transport equation.
    """
    if D <= 0:
        raise ValueError(f"diffusion coefficient D must be positive, got {D}")
    if T <= 0:
        raise ValueError(f"time horizon T must be positive, got {T}")
    if x_obs <= 0:
        raise ValueError(f"observation well location x_obs must be positive, got {x_obs}")
    if abs(grid.a) > 1e-12 or abs(grid.b - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"grid must cover [0, T) = [0, {T}), got [{grid.a}, {grid.b})")

    def kernel(ti, tj):
        tau = ti - tj
        pos = tau > 0
        tau_safe = np.where(pos, tau, 1.0)
        val = (
            x_obs
            / (2.0 * np.sqrt(math.pi * D * tau_safe**3))
            * np.exp(-((x_obs - nu * tau_safe) ** 2) / (4.0 * D * tau_safe))
        )
        return np.where(pos, val, 0.0)

    return _discretize(
        kernel, grid, grid, "groundwater", {"D": D, "nu": nu, "x_obs": x_obs, "T": T}
    )


def make_identity(grid: Grid) -> ForwardOperator:
    """Identity forward map (direct noisy observation of theta on the grid)."""
    return ForwardOperator(np.eye(grid.n), grid, grid, "identity", {})


def apply(op: ForwardOperator, theta: np.ndarray) -> np.ndarray:
    """Matrix-vector product K theta."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (op.col_grid.n,):
        raise ValueError(
            f"theta has shape {theta.shape}, operator expects ({op.col_grid.n},)"
        )
    return op.matrix @ theta


def simulate_data(op: ForwardOperator, theta_true: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Draw y = K theta_true + eps with eps ~ N(0, sigma^2 I), fixed by seed."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    clean = apply(op, theta_true)
    rng = np.random.default_rng(seed)
    return clean + sigma * rng.standard_normal(clean.shape[0])


def save_operator(op: ForwardOperator, basepath: str) -> None:
    """Write <basepath>.csv (dense matrix) and <basepath>.json (header)."""
    header = {
        "kernel_tag": op.kernel_tag,
        "params": op.params,
        "row_grid": {"a": op.row_grid.a, "b": op.row_grid.b, "n": op.row_grid.n},
        "col_grid": {"a": op.col_grid.a, "b": op.col_grid.b, "n": op.col_grid.n},
    }
    with open(basepath + ".json", "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
    with open(basepath + ".csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in op.matrix:
            writer.writerow([repr(float(v)) for v in row])


def load_operator(basepath: str) -> ForwardOperator:
    with open(basepath + ".json") as fh:
        header = json.load(fh)
    with open(basepath + ".csv", newline="") as fh:
        mat = np.array([[float(v) for v in row] for row in csv.reader(fh)])
    row_grid = Grid(**header["row_grid"])
    col_grid = Grid(**header["col_grid"])
    return ForwardOperator(mat, row_grid, col_grid, header["kernel_tag"], header["params"])
