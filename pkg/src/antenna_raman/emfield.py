"""Quasi-static electromagnetic environment corrections.

Stand-in for full-wave solvers: the metal nanoparticle is a point dipole
(quasi-static sphere polarizability) above a dielectric half-space handled
by image theory.  Fields crossing the interface use the standard
quasi-static transmitted-dipole weight 2/(1+eps).  The geometry, bottom
to top along the z axis:

    emitter at z = -depth (inside the substrate, on the particle axis)
    substrate surface at z = 0, molecule at z = +molecule_height
    nanoparticle center at z = gap + radius

Outputs per gap:

* k_inc : |E| enhancement of the transmitted pump at the emitter
* k_mol : enhancement of the emitter near field at the molecule
* f_p   : radiative-rate enhancement of the emitter (scattering
          interference plus particle absorption)

This model reproduces trends and order-of-magnitude contrasts, not exact
boundary-element curves; it misses gap hot-spot structure by construction
(point dipole), which mainly suppresses k_mol toward 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import C0, EPS0, TWO_PI
from .errors import ConfigError, ModelValidityError

MIN_GAP_M = 0.5e-9


@dataclass(frozen=True)
class EmGeometry:
    radius: float  # m
    eps_metal: complex
    eps_substrate: float
    wavelength: float  # m
    emitter_depth: float  # m
    molecule_height: float  # m
    incidence_deg: float

    @classmethod
    def from_scenario(cls, scenario) -> "EmGeometry":
        return cls(
            radius=scenario.np_radius_nm * 1e-9,
            eps_metal=scenario.eps_metal,
            eps_substrate=scenario.eps_substrate,
            wavelength=scenario.em_wavelength_nm * 1e-9,
            emitter_depth=scenario.depth_nm * 1e-9,
            molecule_height=scenario.molecule_height_nm * 1e-9,
            incidence_deg=scenario.incidence_angle_deg,
        )


@dataclass(frozen=True)
class EmFactors:
    gap: float  # m
    k_inc: float
    k_mol: float
    f_p: float


def sphere_response(eps_metal: complex) -> complex:
    """Quasi-static sphere polarizability factor (eps-1)/(eps+2)."""
    return (eps_metal - 1.0) / (eps_metal + 2.0)


def sphere_polarizability(radius: float, eps_metal: complex, eps_host: float = 1.0) -> complex:
    """Polarizability volume 4 pi R^3 (eps-eps_h)/(eps+2 eps_h) in m^3.

    Amplitude convention: induced dipole = eps0 * eps_host * alpha * E.
    """
    if radius <= 0.0:
        raise ConfigError("sphere radius must be positive")
    denom = eps_metal + 2.0 * eps_host
    if abs(denom) < 1e-12 * (abs(eps_metal) + 2.0 * abs(eps_host)):
        raise ModelValidityError(
            "dipole resonance pole: eps_metal + 2 eps_host vanishes, the "
            "lossless quasi-static response diverges"
        )
    return 4.0 * math.pi * radius**3 * (eps_metal - eps_host) / denom


def image_strength(eps_substrate: float) -> float:
    """Image-dipole weight (eps-1)/(eps+1) of the half-space."""
    return (eps_substrate - 1.0) / (eps_substrate + 1.0)


def _check_gap(gap: float):
    if gap < MIN_GAP_M:
        raise ModelValidityError(
            f"gap {gap * 1e9:.2f} nm is below {MIN_GAP_M * 1e9:.1f} nm; the "
            "point-dipole picture has no validity there"
        )


def _dressed_response(geom: EmGeometry, gap: float):
    """Particle response including its own substrate image feedback.

    Returns (f_eff_z, f_eff_x, chi_z): the image of a vertical dipole at
    height h adds f*beta*(R/h)^3/4 of positive feedback; a horizontal one
    gets half that.
    """
    f = sphere_response(geom.eps_metal)
    beta = image_strength(geom.eps_substrate)
    h = gap + geom.radius
    chi_z = f * beta * (geom.radius / h) ** 3 / 4.0
    chi_x = chi_z / 2.0
    return f / (1.0 - chi_z), f / (1.0 - chi_x), chi_z


def em_factors(geom: EmGeometry, gap: float) -> EmFactors:
    """Field and decay-rate corrections for one particle-surface gap."""
    _check_gap(gap)
    f_eff_z, f_eff_x, chi_z = _dressed_response(geom, gap)

    n2 = math.sqrt(geom.eps_substrate)
    t_d = 2.0 / (1.0 + geom.eps_substrate)  # transmitted-dipole weight
    h = gap + geom.radius
    r_emitter = h + geom.emitter_depth

    # ---- pump enhancement at the emitter (p-polarized plane wave) -------
    ti = math.radians(geom.incidence_deg)
    st = math.sin(ti) / n2
    ct = math.sqrt(1.0 - st**2)
    t_p = 2.0 * math.cos(ti) / (n2 * math.cos(ti) + ct)
    # transmitted pump without the particle, transverse to the refracted ray
    e_wo_x = t_p * ct
    e_wo_z = t_p * st

    ratio3 = (geom.radius / r_emitter) ** 3
    d_ez = 2.0 * t_d * ratio3 * f_eff_z * math.sin(ti)
    d_ex = -t_d * ratio3 * f_eff_x * math.cos(ti)
    with_x = e_wo_x + d_ex
    with_z = e_wo_z + d_ez
    k_inc = math.sqrt(
        (abs(with_x) ** 2 + abs(with_z) ** 2) / (e_wo_x**2 + e_wo_z**2)
    )

    # ---- emitter near field at the molecule -----------------------------
    beta = image_strength(geom.eps_substrate)
    s = geom.emitter_depth + geom.molecule_height
    e_direct = 2.0 * t_d / s**3
    p_np = t_d * 2.0 / r_emitter**3 * f_eff_z * geom.radius**3
    r_back = h - geom.molecule_height
    r_back_im = h + geom.molecule_height
    e_scat = 2.0 * p_np / r_back**3 + 2.0 * beta * p_np / r_back_im**3
    k_mol = abs(e_direct + e_scat) / e_direct

    # ---- radiative-rate enhancement of the emitter ----------------------
    p_ratio = 2.0 * t_d * ratio3 * f_eff_z  # induced dipole per unit emitter dipole
    radiative = abs(1.0 + p_ratio) ** 2

    omega = TWO_PI * C0 / geom.wavelength
    alpha_im = 4.0 * math.pi * geom.radius**3 * sphere_response(geom.eps_metal).imag
    e_loc = 2.0 * t_d / (4.0 * math.pi * EPS0 * r_emitter**3)  # per unit p_e
    e_loc_tot = abs(e_loc / (1.0 - chi_z))
    p_abs = 0.5 * omega * EPS0 * alpha_im * e_loc_tot**2
    p_rad0 = n2 * omega**4 / (12.0 * math.pi * EPS0 * C0**3)
    f_p = radiative + p_abs / p_rad0

    return EmFactors(gap=gap, k_inc=k_inc, k_mol=k_mol, f_p=f_p)


def efficiency_correction(factors: EmFactors, gamma_total_over_gamma0: float = 4.0) -> float:
    """Combined multiplicative correction to the antenna-routed efficiency."""
    from .analytic import quenching_factor

    return (
        factors.k_inc**2
        * factors.k_mol**2
        * quenching_factor(factors.f_p, gamma_total_over_gamma0) ** 2
    )


def corrected_efficiency_sweep(scenario, gap_grid):
    """Rows of (gap, EmFactors, corrected eta_sigma, eta_conventional)."""
    from .analytic import corrected_eta_sigma, eta_conventional, eta_sigma
    from .models import derived_parameters

    derived = derived_parameters(scenario)
    geom = EmGeometry.from_scenario(scenario)
    eta_s = eta_sigma(derived)
    eta_c = eta_conventional(derived)
    rows = []
    for gap in gap_grid:
        fac = em_factors(geom, float(gap))
        corrected = corrected_eta_sigma(
            eta_s, fac.k_inc, fac.k_mol, fac.f_p, scenario.gamma_total_over_gamma0
        )
        rows.append((float(gap), fac, corrected, eta_c))
    return rows
