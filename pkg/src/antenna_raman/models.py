"""Parameter derivation chain and Hamiltonian/channel builders.

Everything downstream works in SI with angular frequencies; this module is
the single place where scenario-file units (ordinary Hz, nm, uW/um^2, deg)
are converted.

The physical system: a narrow two-level emitter ("antenna") buried a few
nm inside a high-index host, a molecule adsorbed nearby, and a broad
plasmonic mode ("cavity") above, all driven by a laser at omega_l.  The
rotating frame at omega_l leaves detunings delta_sigma and delta_a and a
static vibrational term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, EPS0, HBAR, TWO_PI, UW_PER_UM2
from .errors import ConfigError
from .hilbert import OperatorSet, QUBIT_LOWERING
from .lindblad import CollapseChannel

PRESETS = ("hybrid", "conventional", "antenna_only", "resonant_serrs")
DETUNING_POLICIES = ("explicit", "resonant", "stokes_matched")


def fresnel_tp(n1: float, n2: float, theta_i_deg: float) -> float:
    """p-polarized amplitude transmission at a planar interface."""
    ti = math.radians(theta_i_deg)
    sin_t = n1 * math.sin(ti) / n2
    if abs(sin_t) > 1.0:
        raise ConfigError("total internal reflection: no transmitted wave")
    ct = math.sqrt(1.0 - sin_t**2)
    return 2.0 * n1 * math.cos(ti) / (n2 * math.cos(ti) + n1 * ct)


def incident_field(intensity: float) -> float:
    """Drive field amplitude E_inc for intensity I (W/m^2), c eps0 E^2 = 4 I."""
    return math.sqrt(4.0 * intensity / (C0 * EPS0))


def dipole_from_linewidth(gamma_rad: float, omega: float, n_host: float) -> float:
    """Transition dipole giving radiative rate gamma_rad inside index n_host."""
    return math.sqrt(3.0 * math.pi * EPS0 * HBAR * C0**3 * gamma_rad / (n_host * omega**3))


def jc_self_energy(g_jc: float, delta_sigma: float, delta_a: float, kappa: float):
    """Emitter decay enhancement and line shift from a lossy linear mode.

    Returns (rate, shift): the emitter linewidth becomes gamma + rate and
    its resonance moves by shift when coherently coupled (strength g_jc)
    to a mode detuned by delta_a with linewidth kappa.
    """
    dt = delta_sigma - delta_a
    denom = dt**2 + kappa**2 / 4.0
    return g_jc**2 * kappa / denom, g_jc**2 * dt / denom


def jc_coupling_from_purcell(f_p: float, kappa: float, gamma: float, delta: float = 0.0) -> float:
    """Coherent coupling that yields decay enhancement rate = f_p * gamma."""
    return math.sqrt(f_p * gamma * (delta**2 + kappa**2 / 4.0) / kappa)


def coherent_amplitudes(
    omega_rabi: float,
    omega_rabi_a: float,
    delta_sigma: float,
    delta_a: float,
    gamma_total: float,
    kappa: float,
    g_jc: float,
):
    """Steady coherent amplitudes of the driven emitter-mode pair.

    Eliminating the mode leaves a two-level problem with a complex
    effective drive (direct plus mode-routed) and a dressed resonance;
    Bloch saturation then applies to the emitter amplitude, and the mode
    amplitude follows from it.  Returns (population, <sigma>, <a>).
    """
    mode_response = delta_a - 0.5j * kappa
    drive = omega_rabi - g_jc * omega_rabi_a / mode_response
    dressed = (delta_sigma - 0.5j * gamma_total) - g_jc**2 / mode_response
    population = abs(drive) ** 2 / (
        dressed.real**2 + dressed.imag**2 + 2.0 * abs(drive) ** 2
    )
    alpha_sigma = -drive * (1.0 - 2.0 * population) / dressed
    alpha_a = -(omega_rabi_a + g_jc * alpha_sigma) / mode_response
    return population, alpha_sigma, alpha_a


@dataclass(frozen=True)
class DerivedParams:
    """Full derived parameter set; angular frequencies in rad/s."""

    preset: str
    # frequencies and detunings
    omega_l: float
    omega_sigma: float
    omega_a: float
    omega_b: float
    delta_sigma: float
    delta_a: float
    delta_a_nominal: float
    # linewidths
    gamma0: float
    gamma_total: float
    kappa: float
    gamma_b: float
    n_b_th: float
    # drive
    intensity: float  # W/m^2
    spot_area: float  # m^2
    t_p: float
    e_inc: float  # V/m
    omega_rabi: float
    omega_rabi_a: float
    # fields and couplings
    d_sigma: float  # C m
    e_sigma: float  # V/m
    e_a: float  # V/m
    raman_rq0: float  # C m^2/V
    g0_sigma: float
    g0_a: float
    g0_a_alt: float  # 2x normalization variant kept for comparison
    g_jc: float
    g_res: float | None
    # figures of merit
    q_factor: float
    c0_sigma: float
    c0_a: float
    i_sat_antenna: float  # W/m^2
    i_threshold_plasmon: float  # W/m^2
    # emitter response dressed by the coherent emitter-cavity coupling
    jc_rate: float
    jc_shift: float
    alpha_sigma_bare: complex
    sigma_population: float
    alpha_sigma: complex
    alpha_a: complex
    # engine settings carried along for model building
    cavity_levels: int
    phonon_levels: int
    tau_points: int


def resolve_detuning(policy: str, delta_a_hz: float, omega_b: float) -> float:
    if policy == "explicit":
        return TWO_PI * delta_a_hz
    if policy == "resonant":
        return 0.0
    if policy == "stokes_matched":
        return -omega_b
    raise ConfigError(f"unknown detuning policy {policy!r}; pick from {DETUNING_POLICIES}")


def derived_parameters(scenario) -> DerivedParams:
    """Run the full parameter chain for a parsed scenario."""
    if scenario.preset not in PRESETS:
        raise ConfigError(f"unknown preset {scenario.preset!r}; pick from {PRESETS}")

    omega_l = TWO_PI * scenario.omega_l_hz
    omega_sigma = TWO_PI * scenario.omega_sigma_hz
    omega_a = TWO_PI * scenario.omega_a_hz
    omega_b = TWO_PI * scenario.omega_b_hz
    gamma0 = TWO_PI * scenario.gamma0_hz
    gamma_total = scenario.gamma_total_over_gamma0 * gamma0
    kappa = TWO_PI * scenario.kappa_hz
    gamma_b = TWO_PI * scenario.gamma_b_hz

    delta_sigma = omega_sigma - omega_l
    delta_a = resolve_detuning(scenario.detuning_policy, scenario.delta_a_hz, omega_b)
    delta_a_nominal = omega_a - omega_l

    intensity = scenario.intensity_uw_per_um2 * UW_PER_UM2
    if intensity <= 0:
        raise ConfigError("drive intensity must be positive")
    e_inc = incident_field(intensity)
    t_p = fresnel_tp(1.0, scenario.host_index, scenario.incidence_angle_deg)

    d_sigma = dipole_from_linewidth(gamma0, omega_sigma, scenario.host_index)
    omega_rabi = d_sigma * t_p * e_inc / HBAR

    separation = scenario.separation_nm * 1e-9
    e_sigma = d_sigma / (4.0 * math.pi * EPS0 * separation**3)
    v_eff = scenario.v_eff_nm3 * 1e-27
    e_a = math.sqrt(HBAR * omega_a / (2.0 * EPS0 * v_eff))

    raman_rq0 = 4.0 * math.pi * EPS0 * scenario.raman_volume_m3
    g0_sigma = 0.5 * raman_rq0 * e_sigma * e_a / HBAR
    g0_a = 0.5 * raman_rq0 * e_a**2 / HBAR
    if scenario.g0_sigma_hz is not None:
        g0_sigma = TWO_PI * scenario.g0_sigma_hz
    if scenario.g0_a_hz is not None:
        g0_a = TWO_PI * scenario.g0_a_hz

    q_factor = omega_a / kappa
    omega_rabi_a = math.sqrt(intensity * scenario.sigma_ext_m2 / (4.0 * HBAR * q_factor))

    c0_sigma = 4.0 * g0_sigma**2 / (gamma_total * gamma_b)
    c0_a = 4.0 * g0_a**2 / (kappa * gamma_b)

    i_sat_antenna = gamma_total**2 * HBAR**2 * C0 * EPS0 / (16.0 * d_sigma**2 * t_p**2)
    i_threshold_plasmon = kappa**2 * HBAR * q_factor / scenario.sigma_ext_m2

    g_jc = TWO_PI * scenario.g_jc_hz
    g_res = None if scenario.g_res_hz is None else TWO_PI * scenario.g_res_hz
    if scenario.preset == "resonant_serrs" and g_res is None:
        raise ConfigError("preset resonant_serrs requires coupling.g_res_hz")

    jc_rate, jc_shift = jc_self_energy(g_jc, delta_sigma, delta_a, kappa)
    alpha_sigma_bare = -omega_rabi / (delta_sigma - 0.5j * gamma_total)
    # antenna_only drops the mode entirely, so its amplitudes must too
    drive_a, mix = (0.0, 0.0) if scenario.preset == "antenna_only" else (omega_rabi_a, g_jc)
    sigma_population, alpha_sigma, alpha_a = coherent_amplitudes(
        omega_rabi, drive_a, delta_sigma, delta_a, gamma_total, kappa, mix
    )

    return DerivedParams(
        preset=scenario.preset,
        omega_l=omega_l,
        omega_sigma=omega_sigma,
        omega_a=omega_a,
        omega_b=omega_b,
        delta_sigma=delta_sigma,
        delta_a=delta_a,
        delta_a_nominal=delta_a_nominal,
        gamma0=gamma0,
        gamma_total=gamma_total,
        kappa=kappa,
        gamma_b=gamma_b,
        n_b_th=scenario.n_b_th,
        intensity=intensity,
        spot_area=scenario.spot_area_m2,
        t_p=t_p,
        e_inc=e_inc,
        omega_rabi=omega_rabi,
        omega_rabi_a=omega_rabi_a,
        d_sigma=d_sigma,
        e_sigma=e_sigma,
        e_a=e_a,
        raman_rq0=raman_rq0,
        g0_sigma=g0_sigma,
        g0_a=g0_a,
        g0_a_alt=2.0 * g0_a,
        g_jc=g_jc,
        g_res=g_res,
        q_factor=q_factor,
        c0_sigma=c0_sigma,
        c0_a=c0_a,
        i_sat_antenna=i_sat_antenna,
        i_threshold_plasmon=i_threshold_plasmon,
        jc_rate=jc_rate,
        jc_shift=jc_shift,
        alpha_sigma_bare=alpha_sigma_bare,
        sigma_population=sigma_population,
        alpha_sigma=alpha_sigma,
        alpha_a=alpha_a,
        cavity_levels=scenario.cavity_levels,
        phonon_levels=scenario.phonon_levels,
        tau_points=scenario.tau_points,
    )


def phonon_channels(gamma_b: float, n_b_th: float, b: np.ndarray):
    channels = [CollapseChannel(b, gamma_b * (n_b_th + 1.0), "phonon-decay")]
    if n_b_th > 0.0:
        channels.append(CollapseChannel(b.conj().T, gamma_b * n_b_th, "phonon-pump"))
    return channels


def build_full_model(derived: DerivedParams, ops: OperatorSet):
    """Hamiltonian and channels on the composite space for cavity presets."""
    if derived.preset == "antenna_only":
        raise ConfigError("antenna_only reduces to a two-level model; use build_qubit_model")

    sigma, a, b = ops.sigma, ops.a, ops.b
    sig_dag, a_dag = sigma.conj().T, a.conj().T
    swap = sig_dag @ a + a_dag @ sigma
    x_b = b + b.conj().T
    n_a = a_dag @ a

    H = (
        derived.delta_sigma * (sig_dag @ sigma)
        + derived.delta_a * n_a
        + derived.omega_b * (b.conj().T @ b)
        + derived.omega_rabi * (sigma + sig_dag)
        + derived.omega_rabi_a * (a + a_dag)
        + derived.g_jc * swap
    )
    if derived.preset == "resonant_serrs":
        H = H + derived.g_res * (sig_dag @ sigma) @ x_b
    else:
        g0s = derived.g0_sigma if derived.preset == "hybrid" else 0.0
        H = H - g0s * (swap @ x_b) - derived.g0_a * (n_a @ x_b)

    channels = [
        CollapseChannel(sigma, derived.gamma_total, "antenna-decay"),
        CollapseChannel(a, derived.kappa, "cavity-decay"),
    ]
    channels += phonon_channels(derived.gamma_b, derived.n_b_th, b)
    return H, channels


def build_qubit_model(derived: DerivedParams):
    """Two-level reduction used by the antenna_only preset.

    Without cavity couplings the vibrational factor is driven by nothing
    and stays thermal; it factors out of every antenna observable, so the
    dynamics lives entirely in the two-level space.
    """
    sigma = QUBIT_LOWERING
    sig_dag = sigma.conj().T
    H = derived.delta_sigma * (sig_dag @ sigma) + derived.omega_rabi * (sigma + sig_dag)
    channels = [CollapseChannel(sigma, derived.gamma_total, "antenna-decay")]
    return H, channels


def validity_warnings(derived: DerivedParams):
    """Regime checks; the CLI escalates these under --strict."""
    warnings = []
    if derived.kappa > 0.5 * derived.omega_a:
        warnings.append(
            "cavity linewidth exceeds half its frequency; Markov/rotating-frame "
            "treatment of the cavity channel is marginal"
        )
    if derived.gamma_b > 0.5 * derived.omega_b:
        warnings.append("vibrational linewidth exceeds half the phonon frequency")
    if derived.gamma_total > 0.1 * derived.omega_sigma:
        warnings.append("antenna linewidth is not small against its frequency")
    if derived.omega_rabi > 0.2 * derived.omega_l:
        warnings.append("antenna drive too strong for the rotating frame")
    if derived.omega_rabi_a > 0.2 * derived.omega_a:
        warnings.append("cavity drive too strong for the rotating frame")
    return warnings
