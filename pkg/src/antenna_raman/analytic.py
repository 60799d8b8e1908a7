"""Closed-form results: two-level response, linearized sideband spectra,
vibrational rate equation, and the detection-efficiency chain.

The linearized route treats the driven modes as classical amplitudes plus
fluctuations.  The vibration modulates the radiating mode through every
pathway at once, so the coherent amplitudes interfere, while the
emitter's incoherent (saturation) population scatters on top of its
coherent part.  The squared source amplitude feeding the sidebands is

    source_sq = g0s^2 <s+ s> + 2 g0s g0a Re[<s>* <a>] + g0a^2 |<a>|^2

and the emitted sidebands are Lorentzians of width gamma_eff centered at
omega_l -/+ omega_b, weighted by the phonon occupation (n+1 Stokes, n
anti-Stokes) and filtered by the radiating mode's response.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, EPS0, HBAR, KB
from .errors import ConfigError, NumericalError
from .models import DerivedParams


# ---------------------------------------------------------------- two-level

def bloch_steady_state(delta: float, omega: float, gamma: float):
    """Steady state of a driven, damped two-level system.

    H = delta s+s + omega (s + s+), decay rate gamma.
    Returns (population, coherence <s>).
    """
    denom = delta**2 + gamma**2 / 4.0 + 2.0 * omega**2
    population = omega**2 / denom
    coherence = -omega * (1.0 - 2.0 * population) / (delta - 0.5j * gamma)
    return population, coherence


def mollow_sideband_offset(omega: float, delta: float = 0.0) -> float:
    """Sideband distance from the drive line in the strong-drive spectrum.

    The dressed-state splitting for H = delta s+s + omega (s + s+); equals
    2*omega on resonance.
    """
    return math.sqrt(4.0 * omega**2 + delta**2)


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose occupation of a mode at angular frequency omega (rad/s)."""
    if temperature <= 0.0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (KB * temperature))


# ------------------------------------------------ vibrational rate equation

def optomech_rates(source_sq: float, delta_a: float, omega_b: float, kappa: float):
    """Phonon heating (plus) and cooling (minus) rates from the sidebands.

    source_sq is the squared effective source amplitude (rad^2/s^2)
    modulating the radiating mode, e.g. g0^2 |alpha|^2 for one pathway.
    """
    plus = source_sq * kappa / ((delta_a + omega_b) ** 2 + kappa**2 / 4.0)
    minus = source_sq * kappa / ((delta_a - omega_b) ** 2 + kappa**2 / 4.0)
    return plus, minus


def effective_phonon_linewidth(gamma_b: float, plus: float, minus: float) -> float:
    return gamma_b + minus - plus


def phonon_steady_state(gamma_b: float, n_th: float, plus: float, minus: float) -> float:
    """Stationary phonon occupation of dn/dt = -(gamma_b+minus-plus) n
    + gamma_b n_th + plus."""
    denom = effective_phonon_linewidth(gamma_b, plus, minus)
    if denom <= 0.0:
        raise NumericalError(
            f"vibrational mode is unstable: effective linewidth {denom:.3e} <= 0"
        )
    if plus == 0.0 and minus == 0.0:
        return n_th  # thermal equilibrium, no sideband backaction
    return (gamma_b * n_th + plus) / denom


@dataclass(frozen=True)
class RateBalance:
    plus: float
    minus: float
    gamma_eff: float
    n_eff: float  # non-physical (inf) when stable is False
    stable: bool


def rate_balance(gamma_b: float, n_th: float, plus: float, minus: float) -> RateBalance:
    """Sideband rate bookkeeping for one working point.

    An unstable balance (gamma_eff <= 0, runaway vibrational pumping) comes
    back flagged rather than raising, so sweeps can tabulate it.
    """
    gamma_eff = effective_phonon_linewidth(gamma_b, plus, minus)
    if gamma_eff <= 0.0:
        return RateBalance(plus, minus, gamma_eff, math.inf, False)
    n_eff = phonon_steady_state(gamma_b, n_th, plus, minus)
    return RateBalance(plus, minus, gamma_eff, n_eff, True)


# ------------------------------------------------------- linearized spectra

def sideband_denominators(delta_a: float, omega_b: float, kappa: float):
    """Radiating-mode response denominators at the two sidebands."""
    d_s = (delta_a + omega_b) ** 2 + kappa**2 / 4.0
    d_as = (delta_a - omega_b) ** 2 + kappa**2 / 4.0
    return d_s, d_as


@dataclass(frozen=True)
class LinearizedInputs:
    source_sq: float  # squared sideband source amplitude (rad^2/s^2)
    omega_l: float
    omega_b: float
    delta_a: float
    kappa: float
    gamma_eff: float
    n_eff: float
    # coherent working point the source was linearized around
    population: float = 0.0
    sigma_amp: complex = 0.0j
    cavity_amp: complex = 0.0j

    @property
    def omega_stokes(self) -> float:
        return self.omega_l - self.omega_b

    @property
    def omega_antistokes(self) -> float:
        return self.omega_l + self.omega_b


def raman_source_power(derived: DerivedParams) -> float:
    """Squared effective amplitude modulating the radiating mode.

    Coherent pathways interfere.  The emitter self-term carries the full
    excited population: its incoherent part scatters just as well, and at
    these widths (gamma << gamma_eff) both land in the same sideband line.
    """
    if derived.preset == "antenna_only":
        raise ConfigError("preset antenna_only has no radiating mode to carry sidebands")
    p = derived.sigma_population
    s = derived.alpha_sigma
    a = derived.alpha_a
    if derived.preset == "resonant_serrs":
        # population-coupled vibration; reaches the mode via the coherent
        # swap, whose transfer at the sidebands is g_jc / (emitter response)
        transfer = derived.g_jc**2 / (derived.omega_b**2 + derived.gamma_total**2 / 4.0)
        return derived.g_res**2 * abs(s) ** 2 * transfer
    g0s = derived.g0_sigma if derived.preset == "hybrid" else 0.0
    g0a = derived.g0_a
    return (
        g0s**2 * p
        + 2.0 * g0s * g0a * (s.conjugate() * a).real
        + g0a**2 * abs(a) ** 2
    )


def linearized_inputs(derived: DerivedParams) -> LinearizedInputs:
    """Assemble effective linearized parameters from the derived chain."""
    source_sq = raman_source_power(derived)
    plus, minus = optomech_rates(source_sq, derived.delta_a, derived.omega_b, derived.kappa)
    gamma_eff = effective_phonon_linewidth(derived.gamma_b, plus, minus)
    n_eff = phonon_steady_state(derived.gamma_b, derived.n_b_th, plus, minus)
    return LinearizedInputs(
        source_sq=source_sq,
        omega_l=derived.omega_l,
        omega_b=derived.omega_b,
        delta_a=derived.delta_a,
        kappa=derived.kappa,
        gamma_eff=gamma_eff,
        n_eff=n_eff,
        population=derived.sigma_population,
        sigma_amp=derived.alpha_sigma,
        cavity_amp=derived.alpha_a,
    )


def incoherent_emitter_weight(delta: float, omega: float, gamma: float) -> float:
    """Steady-state population fluctuation of the driven emitter.

    This is the line weight left once the coherent amplitude is subtracted;
    it tends to |coherence|^2 at weak drive and levels off at 1/2 when the
    emitter saturates.
    """
    population, coherence = bloch_steady_state(delta, omega, gamma)
    return population - abs(coherence) ** 2


def mollow_regime_inputs(derived: DerivedParams, weight: float | None = None) -> LinearizedInputs:
    """Emitter-channel line inputs for the saturated-drive regime.

    The coherent-amplitude linearization dies off as the emitter saturates;
    carrying the weight with the population fluctuation keeps the sideband
    source finite and pins the strong-drive Stokes plateau.  An explicit
    weight bypasses the Bloch solve.
    """
    if weight is None:
        weight = incoherent_emitter_weight(
            derived.delta_sigma, derived.omega_rabi, derived.gamma_total
        )
    if not 0.0 <= weight <= 1.0:
        raise ConfigError(f"emitter line weight must lie in [0, 1], got {weight}")
    source_sq = derived.g0_sigma**2 * weight
    plus, minus = optomech_rates(source_sq, derived.delta_a, derived.omega_b, derived.kappa)
    gamma_eff = effective_phonon_linewidth(derived.gamma_b, plus, minus)
    n_eff = phonon_steady_state(derived.gamma_b, derived.n_b_th, plus, minus)
    return LinearizedInputs(
        source_sq=source_sq,
        omega_l=derived.omega_l,
        omega_b=derived.omega_b,
        delta_a=derived.delta_a,
        kappa=derived.kappa,
        gamma_eff=gamma_eff,
        n_eff=n_eff,
        population=derived.sigma_population,
        sigma_amp=derived.alpha_sigma,
        cavity_amp=derived.alpha_a,
    )


def mollow_regime_spectrum(omega, derived: DerivedParams, weight: float | None = None) -> np.ndarray:
    """Sideband spectrum with the emitter-fluctuation line weight."""
    return linearized_spectrum(omega, mollow_regime_inputs(derived, weight))


def linearized_spectrum(omega, inputs: LinearizedInputs) -> np.ndarray:
    """Sideband emission spectrum of the radiating mode, omega^4-weighted.

    Exact fluctuation spectrum of a linear mode driven by a Lorentzian
    vibrational noise source: phonon line shape times the mode's response
    at the emission frequency.
    """
    omega = np.asarray(omega, dtype=float)
    offset = omega - inputs.omega_l
    mode = (offset - inputs.delta_a) ** 2 + inputs.kappa**2 / 4.0
    hw = inputs.gamma_eff / 2.0
    stokes = (inputs.n_eff + 1.0) / ((offset + inputs.omega_b) ** 2 + hw**2)
    anti = inputs.n_eff / ((offset - inputs.omega_b) ** 2 + hw**2)
    return omega**4 * inputs.source_sq * inputs.gamma_eff * (stokes + anti) / mode


def stokes_peak_height(inputs: LinearizedInputs) -> float:
    """Single-line peak value at the Stokes center (other line's tail ignored)."""
    d_s, _ = sideband_denominators(inputs.delta_a, inputs.omega_b, inputs.kappa)
    return (
        4.0
        * inputs.omega_stokes**4
        * inputs.source_sq
        * (inputs.n_eff + 1.0)
        / (d_s * inputs.gamma_eff)
    )


def antistokes_peak_height(inputs: LinearizedInputs) -> float:
    _, d_as = sideband_denominators(inputs.delta_a, inputs.omega_b, inputs.kappa)
    return (
        4.0
        * inputs.omega_antistokes**4
        * inputs.source_sq
        * inputs.n_eff
        / (d_as * inputs.gamma_eff)
    )


def peak_intensities(inputs: LinearizedInputs):
    """(Stokes, anti-Stokes) closed-form peak pair."""
    return stokes_peak_height(inputs), antistokes_peak_height(inputs)


def line_area(peak_height: float, gamma_eff: float) -> float:
    """Integrated line weight of a Lorentzian given its peak value."""
    return math.pi * peak_height * gamma_eff / 2.0


# --------------------------------------------------------- efficiency chain

def cavity_mode_dipole(derived: DerivedParams) -> float:
    """Effective transition dipole of the radiating mode, from its
    drive response: d_a = hbar Omega_a / E_inc (intensity-independent)."""
    return HBAR * derived.omega_rabi_a / derived.e_inc


def eta_prime(derived: DerivedParams) -> float:
    """Detection-efficiency prefactor (kg/s): Stokes power radiated by the
    mode per unit pump intensity, before the Raman coupling is attached.

    Evaluated at the nominal mode detuning omega_a - omega_l so the figure
    of merit does not depend on the dynamical detuning choice.
    """
    omega_s = derived.omega_l - derived.omega_b
    d_a = cavity_mode_dipole(derived)
    d_s, _ = sideband_denominators(derived.delta_a_nominal, derived.omega_b, derived.kappa)
    return (
        derived.omega_l
        * omega_s**3
        * d_a**2
        / (4.0 * math.pi**2 * EPS0 * C0**3 * derived.spot_area)
        * (derived.n_b_th + 1.0)
        / d_s
        * (8.0 * math.pi / 3.0)
    )


def eta_sigma(derived: DerivedParams) -> float:
    """Antenna-routed Stokes conversion efficiency (linear drive regime)."""
    alpha2 = derived.omega_rabi**2 / (derived.delta_sigma**2 + derived.gamma_total**2 / 4.0)
    return eta_prime(derived) * derived.g0_sigma**2 * alpha2 / derived.intensity


def eta_conventional(derived: DerivedParams) -> float:
    """Direct (mode-pumped) Stokes conversion efficiency, nominal detuning."""
    d_a_nom = derived.delta_a_nominal
    alpha2 = derived.omega_rabi_a**2 / (d_a_nom**2 + derived.kappa**2 / 4.0)
    return eta_prime(derived) * derived.g0_a**2 * alpha2 / derived.intensity


def quenching_factor(f_p: float, gamma_total_over_gamma0: float = 4.0) -> float:
    """Drive-amplitude penalty from radiative-rate enhancement.

    The baseline linewidth is gamma0 * ratio (radiative + fixed
    non-radiative); enhancing the radiative part by f_p rescales the
    total, and the antenna amplitude goes down with it.
    """
    r = gamma_total_over_gamma0
    return r / (f_p + r - 1.0)


def corrected_eta_sigma(
    eta: float, k_inc: float, k_mol: float, f_p: float, gamma_total_over_gamma0: float = 4.0
) -> float:
    """Apply electromagnetic environment corrections to eta_sigma."""
    return eta * k_inc**2 * k_mol**2 * quenching_factor(f_p, gamma_total_over_gamma0) ** 2


def pump_photon_flux(intensity: float, spot_area: float, omega_l: float) -> float:
    return intensity * spot_area / (HBAR * omega_l)


def stokes_photon_flux(eta: float, intensity: float, spot_area: float, omega_l: float) -> float:
    return eta * pump_photon_flux(intensity, spot_area, omega_l)


def saturated_stokes_flux(derived: DerivedParams, intensity: float) -> float:
    """Stokes photon rate with the antenna response saturating.

    Replaces the linear coherent amplitude by the actual two-level
    population at the given intensity; beyond saturation the result stops
    growing with intensity.
    """
    omega = derived.omega_rabi * math.sqrt(intensity / derived.intensity)
    population, _ = bloch_steady_state(derived.delta_sigma, omega, derived.gamma_total)
    rate_scale = eta_prime(derived) * derived.g0_sigma**2 * population
    return rate_scale * derived.spot_area / (HBAR * derived.omega_l)


@dataclass(frozen=True)
class EfficiencyReport:
    eta_prime: float  # kg/s
    eta_sigma: float
    eta_conventional: float
    stokes_flux: float  # photons/s, saturation-aware
    pump_flux: float  # photons/s
    stokes_power: float  # W

    @property
    def eta_effective(self) -> float:
        """Realized conversion efficiency: the flux ratio by construction."""
        return self.stokes_flux / self.pump_flux


def efficiency_report(derived: DerivedParams, intensity: float | None = None) -> EfficiencyReport:
    """Bundle the efficiency chain at one pump intensity.

    eta_sigma / eta_conventional are the linear-response figures; the
    fluxes use the saturating antenna response at the requested intensity.
    """
    if intensity is None:
        intensity = derived.intensity
    flux = saturated_stokes_flux(derived, intensity)
    pump = pump_photon_flux(intensity, derived.spot_area, derived.omega_l)
    power = flux * HBAR * (derived.omega_l - derived.omega_b)
    return EfficiencyReport(
        eta_prime=eta_prime(derived),
        eta_sigma=eta_sigma(derived),
        eta_conventional=eta_conventional(derived),
        stokes_flux=flux,
        pump_flux=pump,
        stokes_power=power,
    )
