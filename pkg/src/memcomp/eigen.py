"""Weighted Dirichlet eigenproblems  phi'' + lam * r(x) * phi = 0.

The principal pair is computed by inverse power iteration on the pencil
L phi = lam R phi, where L is the negated discrete Laplacian (SPD
tridiagonal, factorized once) and R = diag(r).  Sign-changing weights
are admitted: converged modes failing the positivity/admissibility check
are deflated and the iteration continues on the complement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import AdmissibilityError, ConvergenceError
from .grid import Field, Grid, gradient_energy, inner_product, l2_norm

BUILTIN_PROFILES = {
    "cos1": lambda x: np.cos(x) + 1.0,
    "sin1": lambda x: np.sin(x) + 1.0,
    "one": lambda x: np.ones_like(x),
}


@dataclass(frozen=True)
class ResourceProfile:
    """Resource function r(x) sampled at grid nodes.

    ``kind`` is either one of the builtin names (cos1, sin1, one) or
    "tabulated". The profile must be positive somewhere on the grid.
    """

    kind: str
    samples: Field

    def __post_init__(self):
        if self.samples.max() <= 0.0:
            raise AdmissibilityError(
                "resource profile has no positive values on the grid"
            )

    @classmethod
    def builtin(cls, name: str, grid: Grid) -> "ResourceProfile":
        try:
            func = BUILTIN_PROFILES[name]
        except KeyError:
            raise KeyError(f"unknown builtin profile {name!r}") from None
        return cls(name, grid.sample(func))

    @classmethod
    def cos1(cls, grid: Grid) -> "ResourceProfile":
        return cls.builtin("cos1", grid)

    @classmethod
    def sin1(cls, grid: Grid) -> "ResourceProfile":
        return cls.builtin("sin1", grid)

    @classmethod
    def tabulated(cls, values, grid: Grid) -> "ResourceProfile":
        return cls("tabulated", grid.field(values))

    def on_grid(self, grid: Grid) -> "ResourceProfile":
        """Re-sample onto another grid (builtin kinds only)."""
        if self.kind in BUILTIN_PROFILES:
            return ResourceProfile.builtin(self.kind, grid)
        if (grid.a, grid.b, grid.n) == (
            self.samples.grid.a,
            self.samples.grid.b,
            self.samples.grid.n,
        ):
            return self
        raise ValueError("cannot re-sample a tabulated profile onto a new grid")


@dataclass(frozen=True)
class EigenPair:
    """Principal eigenvalue with its L2-normalized positive eigenfunction."""

    lambda_star: float
    phi: Field
    residual: float
    iterations: int


def _neg_laplacian_banded(grid: Grid) -> np.ndarray:
    ab = np.zeros((2, grid.n))
    ab[0, 1:] = -1.0 / grid.h**2
    ab[1, :] = 2.0 / grid.h**2
    return ab


def _apply_neg_laplacian(v: np.ndarray, h: float) -> np.ndarray:
    out = 2.0 * v.copy()
    out[:-1] -= v[1:]
    out[1:] -= v[:-1]
    return out / h**2


def principal_eigen(
    r: ResourceProfile,
    grid: Grid,
    tol: float = 1e-12,
    residual_tol: float = 1e-10,
    max_iter: int = 500,
) -> EigenPair:
    """Smallest admissible eigenvalue of L phi = lam R phi with phi > 0.

    Admissible means the weighted mass integral(r phi^2) is positive;
    the returned eigenfunction is sign-fixed positive and L2-normalized.
    Iteration starts from the all-ones vector and stops once successive
    eigenvalue estimates differ by less than ``tol`` and the equation
    residual drops below ``residual_tol``.
    """
    rv = r.samples.values
    if rv.shape != (grid.n,):
        rv = r.on_grid(grid).samples.values
    if rv.max() <= 0.0:
        raise AdmissibilityError("resource profile non-positive at all nodes")

    h = grid.h
    cb = sla.cholesky_banded(_neg_laplacian_banded(grid))

    def solve_L(b):
        return sla.cho_solve_banded((cb, False), b)

    deflated: list[np.ndarray] = []

    def project_out(v):
        for w, Lw, nrm2 in deflated:
            v = v - (np.dot(Lw, v) / nrm2) * w
        return v

    for _attempt in range(4):
        x = project_out(np.ones(grid.n))
        lam_prev = None
        lam = np.nan
        resid = np.inf
        for it in range(1, max_iter + 1):
            y = solve_L(rv * x)
            y = project_out(y)
            nrm = np.sqrt(h) * np.linalg.norm(y)
            if nrm == 0.0:
                raise ConvergenceError("inverse iteration collapsed to zero")
            y /= nrm
            Ly = _apply_neg_laplacian(y, h)
            denom = float(np.dot(y, rv * y))
            if denom == 0.0:
                x = y
                continue
            lam = float(np.dot(y, Ly)) / denom
            resid = np.sqrt(h) * np.linalg.norm(Ly - lam * rv * y)
            x = y
            if lam_prev is not None and abs(lam - lam_prev) < tol and resid < residual_tol:
                break
            lam_prev = lam
        else:
            raise ConvergenceError(
                f"eigensolver did not converge in {max_iter} iterations "
                f"(last residual {resid:.3e})"
            )

        if np.sum(x) < 0:
            x = -x
        mass = h * float(np.dot(x, rv * x))
        if mass > 0.0 and x.min() > 0.0:
            phi = Field(grid, x)
            return EigenPair(lam, phi, float(resid), it)
        # wrong branch of the pencil: deflate it and retry
        Lx = _apply_neg_laplacian(x, h)
        deflated.append((x, Lx, float(np.dot(x, Lx))))

    raise ConvergenceError(
        "no positive admissible eigenfunction found after deflation attempts"
    )


def second_eigenvalue_shifted(r: ResourceProfile, lam: float, grid: Grid) -> float:
    """Second-smallest eigenvalue of the operator -(Delta + lam*r(x))."""
    rv = r.on_grid(grid).samples.values
    d = 2.0 / grid.h**2 - lam * rv
    e = np.full(grid.n - 1, -1.0 / grid.h**2)
    w = sla.eigvalsh_tridiagonal(d, e, select="i", select_range=(1, 1))
    return float(w[0])


def rayleigh_quotient(r: ResourceProfile, f: Field) -> float:
    """Dirichlet energy over weighted mass; the functional the principal
    eigenvalue minimizes over fields with positive weighted mass."""
    rv = r.on_grid(f.grid).samples
    mass = inner_product(rv * f, f)
    if mass <= 0.0:
        raise AdmissibilityError("field has non-positive weighted mass")
    return gradient_energy(f) / mass


def richardson(value_coarse: float, h_coarse: float, value_fine: float, h_fine: float) -> float:
    """Second-order Richardson extrapolation for a general spacing ratio."""
    ratio2 = (h_coarse / h_fine) ** 2
    return value_fine + (value_fine - value_coarse) / (ratio2 - 1.0)


def extrapolated_principal_eigenvalue(
    profile_name: str, a: float, b: float, n_fine: int = 1000
) -> float:
    """Principal eigenvalue extrapolated from grids n_fine/2 and n_fine."""
    g2 = Grid(a, b, n_fine)
    g1 = Grid(a, b, n_fine // 2)
    lam2 = principal_eigen(ResourceProfile.builtin(profile_name, g2), g2).lambda_star
    lam1 = principal_eigen(ResourceProfile.builtin(profile_name, g1), g1).lambda_star
    return richardson(lam1, g1.h, lam2, g2.h)


__all__ = [
    "ResourceProfile",
    "EigenPair",
    "principal_eigen",
    "second_eigenvalue_shifted",
    "rayleigh_quotient",
    "richardson",
    "extrapolated_principal_eigenvalue",
    "l2_norm",
]
