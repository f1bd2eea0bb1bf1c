"""Spatially nonhomogeneous positive steady states.

Three levels of construction:

* leading order      u = s*cos(omega)*phi,  v = s*sin(omega)*psi
* first order        adds the amplitude-derivative corrections w1'(0),
                     w2'(0) from the bordered singular systems
* refined            damped Newton on the full discrete elliptic system
                     at the user's growth-rate targets

The expansion coefficients lambda_i'(0) are evaluated with the same
discrete quadrature as the eigenfunctions, which makes the bordered
first-order systems consistent to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import EigenPair
from .errors import (
    AdmissibilityError,
    ConvergenceError,
    DegenerateExpansionError,
    SubcriticalTargetError,
)
from .grid import Field, Grid, flux_divergence, inner_product
from .model import ModelParams


@dataclass(frozen=True)
class SteadyState:
    """A steady state of the coupled system at some construction order."""

    s: float
    u: Field
    v: Field
    order: str  # "leading" | "first-order" | "refined"
    lambda1_prime0: float | None = None
    lambda2_prime0: float | None = None
    w1_prime0: Field | None = None
    w2_prime0: Field | None = None
    newton_residual: float | None = None
    positive: bool = True

    @property
    def grid(self) -> Grid:
        return self.u.grid


def lambda_primes(params: ModelParams, eig1: EigenPair, eig2: EigenPair, kappas):
    """First-order expansion slopes of the two growth-rate branches.

    Numerators combine the self/cross competition integrals with the
    self-advection integral; denominators are the weighted eigenfunction
    masses, which must be positive for admissibility.
    """
    r1 = params.r1.on_grid(eig1.phi.grid).samples
    r2 = params.r2.on_grid(eig2.phi.grid).samples
    den1 = inner_product(r1 * eig1.phi, eig1.phi)
    den2 = inner_product(r2 * eig2.phi, eig2.phi)
    if den1 <= 0 or den2 <= 0:
        raise AdmissibilityError("weighted eigenfunction mass is non-positive")
    num1 = (
        eig1.lambda_star * (params.a11 * kappas.kappa3 + params.a12 * kappas.kappa4)
        - params.d1 * kappas.kappa1
    )
    num2 = (
        eig2.lambda_star * (params.a21 * kappas.kappa5 + params.a22 * kappas.kappa6)
        - params.d2 * kappas.kappa2
    )
    return num1 / den1, num2 / den2


def s_from_lambda(lambda_target: float, lambda_star: float, lambda_prime0: float) -> float:
    """Invert the first-order expansion lambda(s) = lambda* + lambda'(0)*s."""
    if lambda_prime0 == 0.0:
        raise DegenerateExpansionError("expansion slope vanishes; cannot invert")
    s = (lambda_target - lambda_star) / lambda_prime0
    if s < 0.0:
        raise SubcriticalTargetError(
            f"target {lambda_target} lies on the wrong side of the critical value "
            f"{lambda_star} for slope {lambda_prime0}"
        )
    return s


def leading_state(s: float, omega: float, eig1: EigenPair, eig2: EigenPair) -> SteadyState:
    if s < 0:
        raise ValueError("amplitude s must be non-negative")
    u = (s * np.cos(omega)) * eig1.phi
    v = (s * np.sin(omega)) * eig2.phi
    return SteadyState(s=s, u=u, v=v, order="leading")


def _dense_laplacian(grid: Grid) -> np.ndarray:
    n, h = grid.n, grid.h
    L = np.zeros((n, n))
    np.fill_diagonal(L, -2.0)
    np.fill_diagonal(L[1:], 1.0)
    np.fill_diagonal(L[:, 1:], 1.0)
    return L / h**2


def _bordered_solve(A: np.ndarray, kernel: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the singular system A w = rhs subject to kernel . w = 0 by
    augmenting with the kernel vector as border row and column."""
    n = A.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = A
    M[:n, n] = kernel
    M[n, :n] = kernel
    b = np.concatenate([rhs, [0.0]])
    try:
        sol = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"bordered system singular: {exc}") from exc
    return sol[:n]


def solve_w_prime(
    params: ModelParams, eig1: EigenPair, eig2: EigenPair, lam_primes: tuple[float, float]
) -> tuple[Field, Field]:
    """First-order correction fields, orthogonal to their eigenfunctions.

    Each correction solves a singular linear system whose operator has
    the corresponding eigenfunction in its kernel; solvability is exactly
    the choice of the expansion slopes, so the bordered formulation is
    consistent by construction.
    """
    grid = eig1.phi.grid
    lam1p, lam2p = lam_primes
    cw, sw = np.cos(params.omega), np.sin(params.omega)
    phi, psi = eig1.phi, eig2.phi
    r1 = params.r1.on_grid(grid).samples
    r2 = params.r2.on_grid(grid).samples
    L = _dense_laplacian(grid)

    uhat = cw * phi
    vhat = sw * psi
    g1 = (
        params.d1 * flux_divergence(uhat, uhat).values
        + lam1p * (r1 * uhat).values
        - eig1.lambda_star
        * uhat.values
        * (params.a11 * uhat.values + params.a12 * vhat.values)
    )
    g2 = (
        params.d2 * flux_divergence(vhat, vhat).values
        + lam2p * (r2 * vhat).values
        - eig2.lambda_star
        * vhat.values
        * (params.a21 * uhat.values + params.a22 * vhat.values)
    )
    A1 = L + np.diag(eig1.lambda_star * r1.values)
    A2 = L + np.diag(eig2.lambda_star * r2.values)
    w1 = _bordered_solve(A1, phi.values, -g1)
    w2 = _bordered_solve(A2, psi.values, -g2)
    return Field(grid, w1), Field(grid, w2)


def first_order_state(
    s: float, params: ModelParams, eig1: EigenPair, eig2: EigenPair, kappas
) -> SteadyState:
    """Leading state plus the first-order corrections s^2 * w'(0)."""
    lp = lambda_primes(params, eig1, eig2, kappas)
    w1, w2 = solve_w_prime(params, eig1, eig2, lp)
    base = leading_state(s, params.omega, eig1, eig2)
    u = base.u + (s * s) * w1
    v = base.v + (s * s) * w2
    return SteadyState(
        s=s,
        u=u,
        v=v,
        order="first-order",
        lambda1_prime0=lp[0],
        lambda2_prime0=lp[1],
        w1_prime0=w1,
        w2_prime0=w2,
        positive=bool(u.min() > 0 and v.min() > 0),
    )


def steady_residual(u: Field, v: Field, params: ModelParams) -> tuple[Field, Field]:
    """Residual fields of the discrete elliptic system at (u, v)."""
    grid = u.grid
    r1 = params.r1.on_grid(grid).samples.values
    r2 = params.r2.on_grid(grid).samples.values
    uv, vv = u.values, v.values
    lap_u = _apply_lap(uv, grid.h)
    lap_v = _apply_lap(vv, grid.h)
    F1 = (
        lap_u
        + params.d1 * flux_divergence(u, u).values
        + params.lambda1 * uv * (r1 - params.a11 * uv - params.a12 * vv)
    )
    F2 = (
        lap_v
        + params.d2 * flux_divergence(v, v).values
        + params.lambda2 * vv * (r2 - params.a21 * uv - params.a22 * vv)
    )
    return Field(grid, F1), Field(grid, F2)


def _apply_lap(v: np.ndarray, h: float) -> np.ndarray:
    out = -2.0 * v.copy()
    out[:-1] += v[1:]
    out[1:] += v[:-1]
    return out / h**2


def _flux_jacobians(w: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians of flux_divergence(u, w): (d/du at fixed w, d/dw at fixed u=w)."""
    n = len(w)
    we = np.concatenate(([0.0], w, [0.0]))
    dw = np.diff(we)  # dw[i] = w_{i+1} - w_i on faces i = 0..n
    J_first = (
        np.diag((dw[1:] - dw[:-1]) / (2 * h**2))
        + np.diag(dw[1:n] / (2 * h**2), 1)
        + np.diag(-dw[1:n] / (2 * h**2), -1)
    )
    um = 0.5 * (we[:-1] + we[1:])  # face averages of w itself
    J_second = (
        np.diag(-(um[1:] + um[:-1]) / h**2)
        + np.diag(um[1:n] / h**2, 1)
        + np.diag(um[1:n] / h**2, -1)
    )
    return J_first, J_second


def _newton_matrix(u: np.ndarray, v: np.ndarray, params: ModelParams, grid: Grid):
    r1 = params.r1.on_grid(grid).samples.values
    r2 = params.r2.on_grid(grid).samples.values
    L = _dense_laplacian(grid)
    Ju1, Ju2 = _flux_jacobians(u, grid.h)
    Jv1, Jv2 = _flux_jacobians(v, grid.h)
    J11 = L + params.d1 * (Ju1 + Ju2) + np.diag(
        params.lambda1 * (r1 - 2 * params.a11 * u - params.a12 * v)
    )
    J12 = np.diag(-params.lambda1 * params.a12 * u)
    J21 = np.diag(-params.lambda2 * params.a21 * v)
    J22 = L + params.d2 * (Jv1 + Jv2) + np.diag(
        params.lambda2 * (r2 - params.a21 * u - 2 * params.a22 * v)
    )
    return np.block([[J11, J12], [J21, J22]])


def refine_steady_state(
    initial: SteadyState,
    params: ModelParams,
    tol: float = 1e-9,
    target: float = 1e-12,
    max_iter: int = 80,
    max_backtrack: int = 40,
) -> SteadyState:
    """Damped Newton iteration on the discrete elliptic system.

    Iterates from ``initial`` with residual-monotone backtracking until
    the max-norm residual drops below ``target`` (or stalls); raises if
    it cannot reach ``tol``. Positivity of the converged state is
    reported through the ``positive`` flag, never enforced.
    """
    grid = initial.grid
    n = grid.n
    params = params.on_grid(grid)
    u = initial.u.values.copy()
    v = initial.v.values.copy()

    def resid(uv, vv):
        F1, F2 = steady_residual(Field(grid, uv), Field(grid, vv), params)
        return np.concatenate([F1.values, F2.values])

    F = resid(u, v)
    res = float(np.abs(F).max())
    for _ in range(max_iter):
        if res < target:
            break
        J = _newton_matrix(u, v, params, grid)
        try:
            delta = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"Newton matrix singular: {exc}") from exc
        step = 1.0
        improved = False
        for _bt in range(max_backtrack):
            u_try = u + step * delta[:n]
            v_try = v + step * delta[n:]
            F_try = resid(u_try, v_try)
            res_try = float(np.abs(F_try).max())
            if res_try < res:
                u, v, F, res = u_try, v_try, F_try, res_try
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    if res > tol:
        raise ConvergenceError(
            f"Newton refinement stalled at residual {res:.3e} (tolerance {tol:.1e})"
        )
    uf, vf = Field(grid, u), Field(grid, v)
    return SteadyState(
        s=initial.s,
        u=uf,
        v=vf,
        order="refined",
        lambda1_prime0=initial.lambda1_prime0,
        lambda2_prime0=initial.lambda2_prime0,
        w1_prime0=initial.w1_prime0,
        w2_prime0=initial.w2_prime0,
        newton_residual=res,
        positive=bool(u.min() > 0 and v.min() > 0),
    )


def memory_strength_margins(params: ModelParams, state: SteadyState) -> dict:
    """Check |d_i| * max(state) < 1 for both species.

    This is the standing smallness condition on the memory coefficients:
    when it fails, the delayed self-advection can overpower the random
    diffusion at high wavenumbers and the linear theory no longer
    guarantees spectral bounds.
    """
    gu = abs(params.d1) * max(state.u.max(), 0.0)
    gv = abs(params.d2) * max(state.v.max(), 0.0)
    return {
        "u_strength": gu,
        "v_strength": gv,
        "satisfied": bool(gu < 1.0 and gv < 1.0),
    }
