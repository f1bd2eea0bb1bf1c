"""Hopf-analysis quantities: interaction integrals, region geometry,
crossing data, delay sequence, and transversality.

Everything here is a closed-form evaluation over the principal
eigenpairs; no time integration is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import EigenPair
from .errors import (
    AdmissibilityError,
    CharacteristicInconsistencyError,
    DegenerateGeometryError,
    NoHopfError,
)
from .grid import Grid, flux_divergence, gradient_energy, inner_product


@dataclass(frozen=True)
class KappaSet:
    """Weighted eigenfunction integrals entering every bifurcation formula.

    kappa1/kappa2 carry the self-advection contribution of each species;
    kappa3..kappa8 are the positive cubic interaction integrals.
    """

    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    kappa5: float
    kappa6: float
    kappa7: float
    kappa8: float
    self_flux: str = "gradient_energy"

    def cubic(self):
        return (
            self.kappa3,
            self.kappa4,
            self.kappa5,
            self.kappa6,
            self.kappa7,
            self.kappa8,
        )


@dataclass(frozen=True)
class KSet:
    """Competition-weighted cubic integrals controlling region geometry."""

    K1: float
    K2: float
    K3: float
    K4: float

    def __post_init__(self):
        for name in ("K1", "K2", "K3", "K4"):
            if not getattr(self, name) > 0:
                raise AdmissibilityError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class RegionLines:
    """Slope/intercept pairs for the six classification lines.

    l1/l2 bound the band whose interior is delay-independently stable;
    l3/l4 bound the second band; l5 and the two l6 variants are the
    origin-through ratio bounds (intercept zero by construction).
    """

    l1: tuple[float, float]
    l2: tuple[float, float]
    l3: tuple[float, float]
    l4: tuple[float, float]
    l5: tuple[float, float]
    l6_ratio_narrow: tuple[float, float]  # (K2-K3)k1/((K1-K4)k2) variant
    l6_ratio_wide: tuple[float, float]  # (K2+K3)k1/((K1+K4)k2) variant


@dataclass(frozen=True)
class RegionReport:
    region: str | None  # "D1" | "D2" | "D3_1" | "D3_2" | None on a boundary
    on_boundary: bool
    in_d1_band: bool
    in_d2_band: bool
    H2: bool
    H3: bool
    H5: bool
    H6: bool
    d_star: float | None
    lines: RegionLines


@dataclass(frozen=True)
class HopfData:
    """Crossing data at the leading order in the amplitude."""

    d1: float
    d2: float
    branch: str  # "H2H5" | "H3H6"
    p1_0: float
    p2_0: float
    h_0: float
    theta_0: float
    d_star: float
    char_residual: float
    tau: np.ndarray = field(default_factory=lambda: np.empty(0))
    s: float | None = None
    transversality_sign: int | None = None
    Sn0_im: float | None = None


def compute_kappas(
    eig1: EigenPair,
    eig2: EigenPair,
    omega: float,
    grid: Grid | None = None,
    self_flux: str = "gradient_energy",
) -> KappaSet:
    """Quadrature evaluation of the eight interaction integrals.

    ``self_flux`` selects the convention for the two self-advection
    integrals: "gradient_energy" evaluates -trig * int |grad phi|^2
    (the convention under which the reference line tables and crossing
    data reproduce), "divergence_form" evaluates the literal
    int phi * div(phi grad phi) = -int phi |grad phi|^2 via the
    conservative flux stencil. The cubic integrals are identical in
    both conventions.
    """
    phi, psi = eig1.phi, eig2.phi
    cw, sw = math.cos(omega), math.sin(omega)
    if self_flux == "gradient_energy":
        i1 = -gradient_energy(phi)
        i2 = -gradient_energy(psi)
    elif self_flux == "divergence_form":
        i1 = inner_product(phi, flux_divergence(phi, phi))
        i2 = inner_product(psi, flux_divergence(psi, psi))
    else:
        raise ValueError(f"unknown self_flux convention {self_flux!r}")
    phi2 = phi * phi
    psi2 = psi * psi
    return KappaSet(
        kappa1=cw * i1,
        kappa2=sw * i2,
        kappa3=cw * inner_product(phi2, phi),
        kappa4=sw * inner_product(phi2, psi),
        kappa5=cw * inner_product(psi2, phi),
        kappa6=sw * inner_product(psi2, psi),
        kappa7=cw * inner_product(phi2, psi),
        kappa8=sw * inner_product(psi2, phi),
        self_flux=self_flux,
    )


def compute_Ks(kappas: KappaSet, params, lambda1_star: float, lambda2_star: float) -> KSet:
    return KSet(
        K1=params.a11 * lambda1_star * kappas.kappa3,
        K2=params.a22 * lambda2_star * kappas.kappa6,
        K3=params.a21 * lambda2_star * kappas.kappa8,
        K4=params.a12 * lambda1_star * kappas.kappa7,
    )


def region_lines(kappas: KappaSet, Ks: KSet) -> RegionLines:
    k1, k2 = kappas.kappa1, kappas.kappa2
    K1, K2, K3, K4 = Ks.K1, Ks.K2, Ks.K3, Ks.K4
    if k2 == 0.0:
        raise DegenerateGeometryError("kappa2 vanishes; band slopes undefined")
    if K4 == 0.0:
        raise DegenerateGeometryError("K4 vanishes; second band undefined")
    s12 = -k1 / k2
    c12 = (K1 + K2) / k2
    s34 = K3 * k1 / (K4 * k2)
    c34 = abs(K1 * K3 - K2 * K4) / (K4 * k2)
    l5 = K2 * k1 / (K1 * k2)
    if K1 == K4:
        raise DegenerateGeometryError("K1 == K4; narrow ratio bound undefined")
    l6n = (K2 - K3) * k1 / ((K1 - K4) * k2)
    l6w = (K2 + K3) * k1 / ((K1 + K4) * k2)
    return RegionLines(
        l1=(s12, c12),
        l2=(s12, -c12),
        l3=(s34, c34),
        l4=(s34, -c34),
        l5=(l5, 0.0),
        l6_ratio_narrow=(l6n, 0.0),
        l6_ratio_wide=(l6w, 0.0),
    )


def d_star_value(d1: float, d2: float, kappas: KappaSet, Ks: KSet) -> float:
    den = d1 * kappas.kappa1 * Ks.K3 - d2 * kappas.kappa2 * Ks.K4
    if den == 0.0:
        raise DegenerateGeometryError(
            "d1*kappa1*K3 == d2*kappa2*K4: critical cosine undefined"
        )
    return (Ks.K1 * Ks.K3 - Ks.K2 * Ks.K4) / den


def classify_region(
    d1: float,
    d2: float,
    kappas: KappaSet,
    Ks: KSet,
    boundary_tol: float = 1e-12,
) -> RegionReport:
    """Assign (d1, d2) to one of the stability regions.

    Band membership is order-insensitive (between the min and max of the
    two boundary values), because the sign of kappa2 flips the literal
    inequality order. The complement is split by which sides of the two
    band centre lines the point falls on: same side of both gives the
    first sub-region, opposite sides the second. Points within
    ``boundary_tol`` of any band edge are flagged and left unassigned.
    """
    lines = region_lines(kappas, Ks)
    H2 = Ks.K1 * Ks.K3 - Ks.K2 * Ks.K4 < 0 and Ks.K1 > Ks.K4 and Ks.K3 > Ks.K4
    H3 = Ks.K1 * Ks.K3 - Ks.K2 * Ks.K4 > 0 and Ks.K1 > Ks.K4 and Ks.K3 < Ks.K4

    def band(slope, half_width):
        center = slope * d1
        lo, hi = center - abs(half_width), center + abs(half_width)
        inside = lo < d2 < hi
        on_edge = min(abs(d2 - lo), abs(d2 - hi)) < boundary_tol
        return inside, on_edge, center

    in_d2, edge_d2, c2 = band(lines.l1[0], lines.l1[1])
    in_d1, edge_d1, c1 = band(lines.l3[0], lines.l3[1])
    on_boundary = edge_d1 or edge_d2

    try:
        dstar = d_star_value(d1, d2, kappas, Ks)
    except DegenerateGeometryError:
        dstar = None

    region: str | None
    if on_boundary:
        region = None
    elif in_d2:
        region = "D2"
    elif in_d1:
        region = "D1"
    else:
        same_side = (d2 - c1) * (d2 - c2) > 0
        region = "D3_1" if same_side else "D3_2"

    def ratio_window(lo_slope, hi_slope):
        if d1 == 0.0:
            return False
        ratio = d2 / d1
        lo, hi = min(lo_slope, hi_slope), max(lo_slope, hi_slope)
        return lo < ratio < hi

    H5 = H2 and region == "D3_1" and ratio_window(lines.l5[0], lines.l6_ratio_narrow[0])
    H6 = H3 and region == "D3_2" and ratio_window(lines.l5[0], lines.l6_ratio_wide[0])

    return RegionReport(
        region=region,
        on_boundary=on_boundary,
        in_d1_band=in_d1,
        in_d2_band=in_d2,
        H2=H2,
        H3=H3,
        H5=H5,
        H6=H6,
        d_star=dstar,
        lines=lines,
    )


def characteristic_residual(
    d1: float,
    d2: float,
    kappas: KappaSet,
    Ks: KSet,
    p1: float,
    p2: float,
    h0: float,
    theta: float,
) -> float:
    """Max absolute residual of the four projected crossing equations."""
    A = d1 * kappas.kappa1
    B = d2 * kappas.kappa2
    e1 = A * math.cos(theta) - Ks.K1 - Ks.K4 * p1
    e2 = A * math.sin(theta) + Ks.K4 * p2 + h0
    e3 = B * math.cos(theta) - Ks.K2 - Ks.K3 * p1
    e4 = B * math.sin(theta) - Ks.K3 * p2 + h0
    return max(abs(e1), abs(e2), abs(e3), abs(e4))


def hopf_point(
    d1: float,
    d2: float,
    kappas: KappaSet,
    Ks: KSet,
    branch: str = "H2H5",
    residual_tol: float | None = None,
) -> HopfData:
    """Closed-form crossing data (p1, p2, h, theta) at leading order.

    The pair (p1, p2) lies on the unit circle by construction and the
    two cosine equations hold to rounding; theta takes the arccos branch
    whose sign of sin(theta) minimizes the residual of the two sine
    equations. The projected system is overdetermined (five scalar
    constraints for four unknowns), so that residual is generally not
    small; it is recorded on the result, and a hard cap can be requested
    via ``residual_tol``.
    """
    if branch not in ("H2H5", "H3H6"):
        raise ValueError(f"unknown branch {branch!r}")
    A = d1 * kappas.kappa1
    B = d2 * kappas.kappa2
    K1, K2, K3, K4 = Ks.K1, Ks.K2, Ks.K3, Ks.K4
    den = A * K3 - B * K4
    if den == 0.0:
        raise DegenerateGeometryError(
            "d1*kappa1*K3 == d2*kappa2*K4: crossing formulas undefined"
        )
    dstar = (K1 * K3 - K2 * K4) / den
    if not -1.0 <= dstar <= 1.0:
        raise NoHopfError(
            f"critical cosine {dstar:.6f} outside [-1, 1]: no purely imaginary crossing"
        )
    num = B * K1 - A * K2
    p1 = num / den
    disc = den * den - num * num
    p2 = math.sqrt(max(disc, 0.0)) / (B * K4 - A * K3)
    h0 = (B * K4 + A * K3) / (A - B) * p2
    if h0 <= 0.0:
        p2 = -p2
        h0 = -h0

    theta_a = math.acos(dstar)
    theta_b = 2.0 * math.pi - theta_a
    res_a = characteristic_residual(d1, d2, kappas, Ks, p1, p2, h0, theta_a)
    res_b = characteristic_residual(d1, d2, kappas, Ks, p1, p2, h0, theta_b)
    theta, res = (theta_a, res_a) if res_a <= res_b else (theta_b, res_b)
    if residual_tol is not None and res > residual_tol:
        raise CharacteristicInconsistencyError(
            f"both crossing-phase branches leave residual {res:.3e} "
            f"> {residual_tol:.1e}"
        )
    return HopfData(
        d1=d1,
        d2=d2,
        branch=branch,
        p1_0=p1,
        p2_0=p2,
        h_0=h0,
        theta_0=theta,
        d_star=dstar,
        char_residual=res,
    )


def tau_sequence(hopf: HopfData, s: float, n_max: int) -> np.ndarray:
    """Critical delays tau_n = (theta + 2*pi*n) / (s * h) for n = 0..n_max."""
    if s <= 0.0:
        raise ValueError("amplitude s must be positive")
    n = np.arange(n_max + 1)
    return (hopf.theta_0 + 2.0 * np.pi * n) / (s * hopf.h_0)


def sn0_values(hopf: HopfData, kappas: KappaSet, Ks: KSet, n: int = 0):
    """(Re, Im) of the non-degeneracy functional at the crossing, with
    the imaginary part evaluated directly from the crossing data."""
    A = hopf.d1 * kappas.kappa1
    B = hopf.d2 * kappas.kappa2
    p1, p2, h0, th = hopf.p1_0, hopf.p2_0, hopf.h_0, hopf.theta_0
    T = (th + 2.0 * math.pi * n) / h0
    re = (
        1.0
        + (p1 * p1 - p2 * p2)
        + T * (math.cos(th) * (A + B) + 2.0 * p1 * p2 * B * math.sin(th))
    )
    im = 2.0 * p1 * p2 + T * (
        2.0 * p1 * p2 * B * math.cos(th) - (A + B) * math.sin(th)
    )
    return re, im


def sn0_imaginary(
    hopf: HopfData, kappas: KappaSet, Ks: KSet, n: int = 0, formula: str = "proof"
) -> float:
    """Imaginary part of the non-degeneracy functional.

    ``formula="proof"`` uses the simplified combination in which the
    sine terms have been eliminated through the crossing equations;
    ``formula="direct"`` evaluates the trigonometric form as-is. The two
    agree exactly only when the crossing equations themselves are
    exactly satisfied.
    """
    if formula == "direct":
        return sn0_values(hopf, kappas, Ks, n)[1]
    if formula != "proof":
        raise ValueError(f"unknown formula {formula!r}")
    p1, p2, h0, th = hopf.p1_0, hopf.p2_0, hopf.h_0, hopf.theta_0
    K1, K2, K3, K4 = Ks.K1, Ks.K2, Ks.K3, Ks.K4
    A = hopf.d1 * kappas.kappa1
    B = hopf.d2 * kappas.kappa2
    phase = th + 2.0 * math.pi * n
    quotient = B * (K1 * K3 - K2 * K4) / (A * K3 - B * K4)
    return (
        2.0 * p1 * p2
        + 2.0 * phase
        + (phase / h0) * (p2 * (K4 - K3) + 2.0 * p1 * p2 * quotient)
    )


def transversality_value(hopf: HopfData, kappas: KappaSet, Ks: KSet, n: int = 0) -> float:
    """Leading-order limit of the real-part derivative of the crossing
    eigenvalue with respect to the delay, scaled by |S_n|^2 > 0."""
    re, im = sn0_values(hopf, kappas, Ks, n)
    s2 = re * re + im * im
    if s2 == 0.0:
        raise DegenerateGeometryError("non-degeneracy functional vanished")
    numerator = (
        -2.0 * hopf.h_0 * (Ks.K4 - Ks.K3) * hopf.p2_0 + 4.0 * hopf.h_0**2
    )
    return numerator / s2


def transversality_sign(
    hopf: HopfData, kappas: KappaSet, Ks: KSet, n: int = 0, zero_tol: float = 1e-12
) -> int:
    """Sign of the crossing speed: +1, -1, or 0 for a degenerate crossing."""
    value = transversality_value(hopf, kappas, Ks, n)
    if abs(value) < zero_tol:
        return 0
    return 1 if value > 0 else -1


def assemble_hopf_data(
    d1: float,
    d2: float,
    kappas: KappaSet,
    Ks: KSet,
    branch: str,
    s: float,
    n_max: int = 4,
    residual_tol: float | None = None,
) -> HopfData:
    """One-stop construction of the full crossing record."""
    from dataclasses import replace

    data = hopf_point(d1, d2, kappas, Ks, branch, residual_tol=residual_tol)
    taus = tau_sequence(data, s, n_max)
    sign = transversality_sign(data, kappas, Ks)
    sn0 = sn0_imaginary(data, kappas, Ks, 0)
    return replace(data, tau=taus, s=s, transversality_sign=sign, Sn0_im=sn0)
