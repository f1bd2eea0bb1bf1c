import math
from dataclasses import replace

import numpy as np
import pytest

from memcomp import Grid, ResourceProfile, principal_eigen
from memcomp.errors import (
    AdmissibilityError,
    CharacteristicInconsistencyError,
    DegenerateGeometryError,
    NoHopfError,
)
from memcomp.hopf import (
    HopfData,
    KappaSet,
    KSet,
    characteristic_residual,
    classify_region,
    compute_Ks,
    compute_kappas,
    hopf_point,
    region_lines,
    sn0_imaginary,
    sn0_values,
    tau_sequence,
    transversality_sign,
    transversality_value,
)
from memcomp.model import preset_q1, preset_q2

PI = math.pi


class TestKappas:
    def test_uniform_weight_closed_forms(self):
        grid = Grid(0.0, PI, 800)
        eig = principal_eigen(ResourceProfile.builtin("one", grid), grid)
        kap_div = compute_kappas(eig, eig, PI / 4, grid, self_flux="divergence_form")
        c = math.sqrt(2.0) / 2.0
        # int sin^3 = 4/3, int sin cos^2 = 2/3, amplitude (2/pi)^{3/2}
        k3_ref = c * (2.0 / PI) ** 1.5 * (4.0 / 3.0)
        k1_ref = -c * (2.0 / 3.0) * (2.0 / PI) ** 1.5
        assert abs(kap_div.kappa3 - k3_ref) < 1e-4
        assert abs(kap_div.kappa1 - k1_ref) < 1e-4
        kap_grad = compute_kappas(eig, eig, PI / 4, grid)
        # Dirichlet energy of the normalized principal mode is the eigenvalue
        assert abs(kap_grad.kappa1 + c * eig.lambda_star) < 1e-6

    def test_right_angle_limit_zeros(self, eig_cos1_1000, eig_sin1_1000, grid1000):
        kap = compute_kappas(eig_cos1_1000, eig_sin1_1000, PI / 2 - 1e-13, grid1000)
        for v in (kap.kappa1, kap.kappa3, kap.kappa5, kap.kappa7):
            assert abs(v) < 1e-12

    def test_cubic_positivity(self, q1_bundle):
        for v in q1_bundle.kappas.cubic():
            assert v > 0


class TestKSet:
    def test_formulas(self, q1_bundle):
        k = q1_bundle.kappas
        K = q1_bundle.Ks
        lam1, lam2 = q1_bundle.eig1.lambda_star, q1_bundle.eig2.lambda_star
        assert abs(K.K1 - 0.5 * lam1 * k.kappa3) < 1e-15
        assert abs(K.K2 - 1.5 * lam2 * k.kappa6) < 1e-15
        assert abs(K.K3 - 1.0 * lam2 * k.kappa8) < 1e-15
        assert abs(K.K4 - 0.5 * lam1 * k.kappa7) < 1e-15

    def test_scaling_in_a11(self, q1_bundle, grid1000):
        p = preset_q1(grid1000)
        K_a = compute_Ks(q1_bundle.kappas, p, 1.0, 1.0)
        K_b = compute_Ks(q1_bundle.kappas, replace(p, a11=2 * p.a11), 1.0, 1.0)
        assert abs(K_b.K1 - 2 * K_a.K1) < 1e-14

    def test_zero_coefficient_rejected(self):
        with pytest.raises(AdmissibilityError):
            KSet(K1=0.0, K2=1.0, K3=1.0, K4=1.0)


class TestRegionLines:
    def test_bands_are_parallel(self, q1_bundle):
        lines = region_lines(q1_bundle.kappas, q1_bundle.Ks)
        assert lines.l1[0] == lines.l2[0]
        assert lines.l3[0] == lines.l4[0]
        assert lines.l1[1] == -lines.l2[1]
        assert lines.l3[1] == -lines.l4[1]

    def test_zero_kappa1_gives_horizontal_band(self, q1_bundle):
        kap = replace(q1_bundle.kappas, kappa1=0.0)
        lines = region_lines(kap, q1_bundle.Ks)
        assert lines.l1[0] == 0.0 and lines.l2[0] == 0.0

    def test_degenerate_geometry(self, q1_bundle):
        kap = replace(q1_bundle.kappas, kappa2=0.0)
        with pytest.raises(DegenerateGeometryError):
            region_lines(kap, q1_bundle.Ks)


class TestClassifyRegion:
    def test_reference_points(self, q1_bundle, q2_bundle):
        rep = classify_region(1.0, -1.0, q1_bundle.kappas, q1_bundle.Ks)
        assert rep.region == "D2"
        rep = classify_region(0.1, 0.5, q1_bundle.kappas, q1_bundle.Ks)
        assert rep.region == "D2"
        rep = classify_region(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks)
        assert rep.region == "D3_1" and rep.H2 and rep.H5
        rep = classify_region(2.0, 1.4, q2_bundle.kappas, q2_bundle.Ks)
        assert rep.region == "D3_2" and rep.H3 and rep.H6

    def test_band_overlap_resolves_to_d2(self, q1_bundle):
        rep = classify_region(0.0, 0.05, q1_bundle.kappas, q1_bundle.Ks)
        assert rep.in_d1_band and rep.in_d2_band
        assert rep.region == "D2"

    def test_boundary_flag(self, q1_bundle):
        lines = region_lines(q1_bundle.kappas, q1_bundle.Ks)
        d1 = 0.37
        d2 = lines.l1[0] * d1 + lines.l1[1]
        rep = classify_region(d1, d2, q1_bundle.kappas, q1_bundle.Ks)
        assert rep.on_boundary and rep.region is None

    def test_partition_property(self, q1_bundle, rng):
        labels = {"D1": 0, "D2": 0, "D3_1": 0, "D3_2": 0}
        for _ in range(10_000):
            d1, d2 = rng.uniform(-4, 4, size=2)
            rep = classify_region(d1, d2, q1_bundle.kappas, q1_bundle.Ks)
            if rep.on_boundary:
                continue
            assert rep.region in labels
            labels[rep.region] += 1
            assert not (rep.region == "D1" and rep.in_d2_band)
        assert all(v > 0 for v in labels.values())

    def test_point_symmetry(self, q1_bundle, rng):
        for _ in range(200):
            d1, d2 = rng.uniform(-3, 3, size=2)
            a = classify_region(d1, d2, q1_bundle.kappas, q1_bundle.Ks)
            b = classify_region(-d1, -d2, q1_bundle.kappas, q1_bundle.Ks)
            if not (a.on_boundary or b.on_boundary):
                assert a.region == b.region


class TestHopfPoint:
    def test_unit_circle_and_cosine(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        assert abs(data.p1_0**2 + data.p2_0**2 - 1.0) < 1e-12
        assert abs(math.cos(data.theta_0) - data.d_star) < 1e-12
        assert data.h_0 > 0

    def test_branch_sign_patterns(self, q1_bundle, q2_bundle):
        a = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        assert a.p1_0 < 0 and a.p2_0 < 0
        b = hopf_point(2.0, 1.4, q2_bundle.kappas, q2_bundle.Ks, "H3H6")
        assert b.p1_0 > 0 and b.p2_0 > 0

    def test_cosine_equations_hold(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        A = 1.0 * q1_bundle.kappas.kappa1
        B = 3.0 * q1_bundle.kappas.kappa2
        K = q1_bundle.Ks
        assert abs(A * math.cos(data.theta_0) - K.K1 - K.K4 * data.p1_0) < 1e-10
        assert abs(B * math.cos(data.theta_0) - K.K2 - K.K3 * data.p1_0) < 1e-10

    def test_sine_branch_minimizes_residual(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        other = 2 * PI - data.theta_0
        res_other = characteristic_residual(
            1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks,
            data.p1_0, data.p2_0, data.h_0, other,
        )
        assert data.char_residual <= res_other

    def test_residual_tolerance_raises(self, q1_bundle):
        # the projected system is overdetermined; demanding a tiny
        # residual on all four equations must fail for generic points
        with pytest.raises(CharacteristicInconsistencyError):
            hopf_point(
                1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5", residual_tol=1e-10
            )

    def test_no_hopf_outside_unit_interval(self, q1_bundle):
        with pytest.raises(NoHopfError):
            hopf_point(0.01, 0.015, q1_bundle.kappas, q1_bundle.Ks, "H2H5")


class TestTauSequence:
    def test_uniform_gaps(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        taus = tau_sequence(data, 0.8, 6)
        gaps = np.diff(taus)
        expected = 2 * PI / (0.8 * data.h_0)
        assert np.abs(gaps - expected).max() < 1e-12 * expected

    def test_reference_thresholds_at_leading_order(self, q1_bundle, q2_bundle):
        a = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        tau0 = tau_sequence(a, q1_bundle.s1, 0)[0]
        assert abs(tau0 - 4.6458) <= 1.0
        b = hopf_point(2.0, 1.4, q2_bundle.kappas, q2_bundle.Ks, "H3H6")
        tau0b = tau_sequence(b, q2_bundle.s1, 0)[0]
        assert abs(tau0b - 3.3592) <= 1.0

    def test_rejects_nonpositive_amplitude(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        with pytest.raises(ValueError):
            tau_sequence(data, 0.0, 3)


def synthetic_consistent_system():
    """Construct (kappas, Ks, HopfData) satisfying all four crossing
    equations and the unit circle simultaneously: pick the angle pair
    and three coefficients freely, then back-solve the remaining ones."""
    p1, p2 = -0.6, -0.8
    theta = 2.2
    K1, K2, K4 = 0.3, 0.45, 0.2
    A = (K1 + K4 * p1) / math.cos(theta)
    h0 = -A * math.sin(theta) - K4 * p2
    # fourth equation pins K3 through the second cosine equation:
    #   B cos = K2 + K3 p1  and  B sin = K3 p2 - h0
    K3 = (K2 * math.sin(theta) + h0 * math.cos(theta)) / (
        p2 * math.cos(theta) - p1 * math.sin(theta)
    )
    B = (K2 + K3 * p1) / math.cos(theta)
    kap = KappaSet(
        kappa1=A, kappa2=B, kappa3=1.0, kappa4=1.0, kappa5=1.0,
        kappa6=1.0, kappa7=1.0, kappa8=1.0,
    )
    Ks = KSet(K1=K1, K2=K2, K3=K3, K4=K4)
    data = HopfData(
        d1=1.0, d2=1.0, branch="H2H5", p1_0=p1, p2_0=p2, h_0=h0,
        theta_0=theta, d_star=math.cos(theta), char_residual=0.0,
    )
    return kap, Ks, data


class TestSn0:
    def test_two_formula_agreement_on_consistent_system(self):
        kap, Ks, data = synthetic_consistent_system()
        res = characteristic_residual(
            1.0, 1.0, kap, Ks, data.p1_0, data.p2_0, data.h_0, data.theta_0
        )
        assert res < 1e-12
        direct = sn0_imaginary(data, kap, Ks, 0, formula="direct")
        proof = sn0_imaginary(data, kap, Ks, 0, formula="proof")
        assert abs(direct - proof) < 1e-10 * max(1.0, abs(direct))
        for n in (1, 2, 5):
            d = sn0_imaginary(data, kap, Ks, n, formula="direct")
            p = sn0_imaginary(data, kap, Ks, n, formula="proof")
            assert abs(d - p) < 1e-10 * max(1.0, abs(d))

    def test_positive_under_reference_parameters(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        assert sn0_imaginary(data, q1_bundle.kappas, q1_bundle.Ks, 0) > 0
        assert sn0_imaginary(data, q1_bundle.kappas, q1_bundle.Ks, 0, "direct") > 0

    def test_monotone_in_n(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        vals = [sn0_imaginary(data, q1_bundle.kappas, q1_bundle.Ks, n) for n in range(4)]
        diffs = np.diff(vals)
        assert np.all(diffs > 0)
        assert np.abs(np.diff(diffs)).max() < 1e-9  # affine in n


class TestTransversality:
    def test_positive_for_both_reference_cases(self, q1_bundle, q2_bundle):
        a = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        assert transversality_sign(a, q1_bundle.kappas, q1_bundle.Ks) == 1
        b = hopf_point(2.0, 1.4, q2_bundle.kappas, q2_bundle.Ks, "H3H6")
        assert transversality_sign(b, q2_bundle.kappas, q2_bundle.Ks) == 1

    def test_sign_matches_numerator(self, q1_bundle):
        data = hopf_point(1.0, 3.0, q1_bundle.kappas, q1_bundle.Ks, "H2H5")
        K = q1_bundle.Ks
        num = -2.0 * data.h_0 * (K.K4 - K.K3) * data.p2_0 + 4.0 * data.h_0**2
        val = transversality_value(data, q1_bundle.kappas, q1_bundle.Ks)
        assert math.copysign(1.0, num) == math.copysign(1.0, val)

    def test_degenerate_crossing_flag(self):
        kap, Ks, data = synthetic_consistent_system()
        # tune (p2, h) so the numerator -2h(K4-K3)p2 + 4h^2 vanishes exactly
        p2 = data.p2_0 if (Ks.K4 - Ks.K3) * data.p2_0 > 0 else -data.p2_0
        h_star = (Ks.K4 - Ks.K3) * p2 / 2.0
        data = replace(data, p2_0=p2, h_0=h_star)
        assert transversality_sign(data, kap, Ks) == 0
