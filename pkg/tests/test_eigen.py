import math
import time

import numpy as np
import pytest
import scipy.linalg as sla

from memcomp import Grid, ResourceProfile, principal_eigen, richardson, second_eigenvalue_shifted
from memcomp.eigen import extrapolated_principal_eigenvalue, rayleigh_quotient
from memcomp.errors import AdmissibilityError

PI = math.pi


def dense_operators(grid, r):
    n, h = grid.n, grid.h
    L = np.zeros((n, n))
    np.fill_diagonal(L, 2.0)
    np.fill_diagonal(L[1:], -1.0)
    np.fill_diagonal(L[:, 1:], -1.0)
    return L / h**2, np.diag(r)


class TestUniformWeight:
    def test_discrete_eigenvalue_exact(self):
        grid = Grid(0.0, PI, 300)
        pair = principal_eigen(ResourceProfile.builtin("one", grid), grid)
        mu = 2.0 * (1.0 - math.cos(grid.h)) / grid.h**2
        assert abs(pair.lambda_star - mu) < 1e-11

    def test_eigenfunction_is_normalized_sine(self):
        grid = Grid(0.0, PI, 1000)
        pair = principal_eigen(ResourceProfile.builtin("one", grid), grid)
        ref = math.sqrt(2.0 / PI) * np.sin(grid.x)
        assert np.abs(pair.phi.values - ref).max() < 1e-4
        assert np.abs(pair.phi.values - ref).max() < 1e-9  # discrete mode is exact

    def test_extrapolates_to_one(self):
        lam = extrapolated_principal_eigenvalue("one", 0.0, PI, 1000)
        assert abs(lam - 1.0) < 1e-6


class TestBuiltinProfiles:
    def test_cos1_value(self):
        t0 = time.perf_counter()
        lam = extrapolated_principal_eigenvalue("cos1", 0.0, PI, 1000)
        assert time.perf_counter() - t0 < 1.0
        assert abs(lam - 0.9291) < 5e-4

    def test_sin1_value(self):
        lam = extrapolated_principal_eigenvalue("sin1", 0.0, PI, 1000)
        assert abs(lam - 0.5403) < 5e-4

    def test_grid_convergence_ratio(self):
        lams = {}
        for n in (250, 500, 1000):
            g = Grid(0.0, PI, n)
            lams[n] = principal_eigen(ResourceProfile.cos1(g), g).lambda_star
        # eigenvalue error is O(h^2): differences shrink ~4x per refinement
        d1 = lams[250] - lams[500]
        d2 = lams[500] - lams[1000]
        assert 3.5 < d1 / d2 < 4.5


class TestPairProperties:
    def test_normalization(self, eig_cos1_1000, grid1000):
        nrm2 = grid1000.h * np.dot(eig_cos1_1000.phi.values, eig_cos1_1000.phi.values)
        assert abs(nrm2 - 1.0) < 1e-10

    def test_positivity(self, eig_cos1_1000):
        assert eig_cos1_1000.phi.values.min() > 0.0

    def test_residual(self, eig_cos1_1000):
        assert eig_cos1_1000.residual < 1e-10

    def test_rayleigh_consistency(self, eig_cos1_1000, grid1000):
        q = rayleigh_quotient(ResourceProfile.cos1(grid1000), eig_cos1_1000.phi)
        assert abs(q - eig_cos1_1000.lambda_star) < 1e-8

    def test_minimality(self, eig_cos1_1000, grid1000, rng):
        prof = ResourceProfile.cos1(grid1000)
        lam = eig_cos1_1000.lambda_star
        tried = 0
        while tried < 20:
            f = grid1000.field(rng.normal(size=grid1000.n))
            try:
                q = rayleigh_quotient(prof, f)
            except AdmissibilityError:
                continue
            tried += 1
            assert q >= lam - 1e-8

    def test_simplicity_dense_oracle(self):
        grid = Grid(0.0, PI, 300)
        r = np.cos(grid.x) + 1.0
        L, R = dense_operators(grid, r)
        w = sla.eigh(L, R, eigvals_only=True)
        pair = principal_eigen(ResourceProfile.cos1(grid), grid)
        assert abs(pair.lambda_star - w[0]) < 1e-9
        assert w[1] > pair.lambda_star + 0.1


class TestSecondEigenvalueShifted:
    def test_unshifted_uniform(self):
        grid = Grid(0.0, PI, 400)
        val = second_eigenvalue_shifted(ResourceProfile.builtin("one", grid), 0.0, grid)
        assert abs(val - 4.0) < 10.0 * grid.h**2

    def test_shift_by_one(self):
        grid = Grid(0.0, PI, 400)
        val = second_eigenvalue_shifted(ResourceProfile.builtin("one", grid), 1.0, grid)
        assert abs(val - 3.0) < 10.0 * grid.h**2

    def test_positive_at_principal_shift(self):
        grid = Grid(0.0, PI, 300)
        prof = ResourceProfile.cos1(grid)
        lam = principal_eigen(prof, grid).lambda_star
        val = second_eigenvalue_shifted(prof, lam, grid)
        assert val > 0.0
        # dense symmetric-tridiagonal oracle
        r = np.cos(grid.x) + 1.0
        A = np.diag(2.0 / grid.h**2 - lam * r)
        A += np.diag(np.full(grid.n - 1, -1.0 / grid.h**2), 1)
        A += np.diag(np.full(grid.n - 1, -1.0 / grid.h**2), -1)
        w = np.linalg.eigvalsh(A)
        assert abs(val - w[1]) < 1e-9


class TestSignChangingWeight:
    def test_admissible_pair_found(self):
        grid = Grid(0.0, PI, 200)
        prof = ResourceProfile.tabulated(np.sin(grid.x) - 0.3, grid)
        pair = principal_eigen(prof, grid)
        assert pair.phi.values.min() > 0
        mass = grid.h * np.dot(pair.phi.values**2, prof.samples.values)
        assert mass > 0
        # generalized dense oracle: smallest eigenvalue among the
        # positive-mass branch
        L, R = dense_operators(grid, prof.samples.values)
        w, vecs = sla.eig(L, R)
        w = np.real_if_close(w)
        candidates = []
        for i in range(len(w)):
            vec = np.real(vecs[:, i])
            if np.iscomplexobj(w[i]) or not np.isfinite(np.real(w[i])):
                continue
            if np.dot(vec * prof.samples.values, vec) > 0 and np.real(w[i]) > 0:
                candidates.append(np.real(w[i]))
        assert abs(pair.lambda_star - min(candidates)) < 1e-8

    def test_everywhere_nonpositive_rejected(self):
        grid = Grid(0.0, PI, 64)
        with pytest.raises(AdmissibilityError):
            ResourceProfile.tabulated(-np.ones(grid.n), grid)


def test_richardson_quadratic_error_model():
    # synthetic value with a pure h^2 error term extrapolates exactly
    truth = 0.73
    f = lambda h: truth + 2.5 * h * h
    assert abs(richardson(f(0.02), 0.02, f(0.01), 0.01) - truth) < 1e-14
