"""Uniform 1-D grid and discrete operators under zero Dirichlet boundaries.

All fields store interior node values only; the boundary values are
identically zero and enter the stencils as ghost values. The quadrature
``h * sum`` is the trapezoid rule for functions vanishing at both ends,
so every operator and integral here is second-order accurate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True)
class Grid:
    """Uniform interior-node grid on (a, b) with spacing h = (b-a)/(n+1).

    Nodes are x_j = a + j*h for j = 1..n; both endpoints are excluded
    (their values are fixed to zero by the boundary condition).
    """

    a: float
    b: float
    n: int
    h: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got ({self.a}, {self.b})")
        if self.n < 1:
            raise ValueError(f"need at least one interior node, got n={self.n}")
        h = (self.b - self.a) / (self.n + 1)
        x = self.a + h * np.arange(1, self.n + 1)
        x.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "x", x)

    def field(self, values) -> "Field":
        return Field(self, np.asarray(values, dtype=float))

    def sample(self, func) -> "Field":
        """Evaluate a callable at the interior nodes."""
        return self.field(func(self.x))

    def zeros(self) -> "Field":
        return self.field(np.zeros(self.n))


@dataclass(frozen=True)
class Field:
    """Interior values of a scalar function vanishing on the boundary."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __add__(self, other):
        return Field(self.grid, self.values + _values_on(self.grid, other))

    def __sub__(self, other):
        return Field(self.grid, self.values - _values_on(self.grid, other))

    def __mul__(self, other):
        return Field(self.grid, self.values * _values_on(self.grid, other))

    __rmul__ = __mul__

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())


def _values_on(grid: Grid, other):
    if isinstance(other, Field):
        if other.grid is not grid and (other.grid.a, other.grid.b, other.grid.n) != (
            grid.a,
            grid.b,
            grid.n,
        ):
            raise GridMismatchError("operands live on different grids")
        return other.values
    return other


def _check_same_grid(f: Field, g: Field):
    if f.grid is g.grid:
        return
    if (f.grid.a, f.grid.b, f.grid.n) != (g.grid.a, g.grid.b, g.grid.n):
        raise GridMismatchError(
            f"incompatible grids: ({f.grid.a},{f.grid.b},n={f.grid.n}) vs "
            f"({g.grid.a},{g.grid.b},n={g.grid.n})"
        )


def laplacian(f: Field) -> Field:
    """Second-order central difference of f'' with zero ghost values."""
    v = f.values
    out = -2.0 * v
    out[:-1] += v[1:]
    out[1:] += v[:-1]
    return Field(f.grid, out / f.grid.h**2)


def flux_divergence(u: Field, w: Field, unit_ghost: bool = False) -> Field:
    """Conservative discretization of (u * w')'.

    Face fluxes F_{j+1/2} = 0.5*(u_j + u_{j+1}) * (w_{j+1} - w_j)/h with
    zero ghost values for both arguments; the returned node values are
    (F_{j+1/2} - F_{j-1/2})/h, so h * sum(output) telescopes to the
    boundary fluxes exactly.

    ``unit_ghost`` extends u by one instead of zero outside the
    interior, which makes ``flux_divergence(ones, w)`` reproduce
    ``laplacian(w)`` at every node including the first and last.
    """
    _check_same_grid(u, w)
    h = u.grid.h
    ghost = 1.0 if unit_ghost else 0.0
    ue = np.concatenate(([ghost], u.values, [ghost]))
    we = np.concatenate(([0.0], w.values, [0.0]))
    flux = 0.5 * (ue[:-1] + ue[1:]) * np.diff(we) / h
    return Field(u.grid, np.diff(flux) / h)


def boundary_fluxes(u: Field, w: Field) -> tuple[float, float]:
    """The two outermost face fluxes (F_{1/2}, F_{n+1/2}); h*sum of
    flux_divergence(u, w) equals their difference."""
    _check_same_grid(u, w)
    h = u.grid.h
    f_lo = 0.5 * u.values[0] * (w.values[0] - 0.0) / h
    f_hi = 0.5 * u.values[-1] * (0.0 - w.values[-1]) / h
    return f_lo, f_hi


def inner_product(f: Field, g: Field) -> float:
    """L2 inner product by the trapezoid rule (exact boundary zeros)."""
    _check_same_grid(f, g)
    return float(f.grid.h * np.dot(f.values, g.values))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.h) * np.linalg.norm(f.values))


def gradient_energy(f: Field) -> float:
    """Discrete Dirichlet energy: h * sum of squared forward differences
    over all n+1 intervals, boundary intervals included.

    Identical to the quadratic form of the (negated) discrete Laplacian,
    so Rayleigh quotients built from it are exact at the matrix level.
    """
    ve = np.concatenate(([0.0], f.values, [0.0]))
    d = np.diff(ve) / f.grid.h
    return float(f.grid.h * np.dot(d, d))
