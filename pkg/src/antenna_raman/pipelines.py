"""Reproduction experiments: parameter tables, spectra, intensity sweeps,
and electromagnetic-correction sweeps, plus their CSV/JSON serialization.

Every CLI command wraps one run_* function here, and the acceptance-style
checks drive the same functions, so the two paths cannot drift apart.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import curve_fit

from . import analytic, emfield
from .constants import EV, HBAR, TWO_PI, UW_PER_UM2
from .correlators import exact_spectrum_evaluator, SpectrumResult, spectrum_exact
from .errors import ConfigError, ModelValidityError, NumericalError
from .hilbert import HilbertConfig, build_operators, expectation
from .lindblad import assemble_liouvillian, steady_state
from .models import (
    DerivedParams,
    build_full_model,
    build_qubit_model,
    derived_parameters,
    validity_warnings,
)
from .scenario import Scenario, scenario_sha256

# the two canonical intensity grids (uW/um^2): a dense log sweep through
# antenna saturation, and the wide Stokes-vs-pump comparison ladder
SATURATION_GRID = tuple(np.geomspace(6.8e-4, 0.17, 30))
STOKES_GRID = (1.7e-5, 1.1e-4, 6.9e-4, 4.4e-3, 2.7e-2, 0.17, 1.2, 6.9, 43.4)

TRUNCATION_OCCUPANCY_LIMIT = 1e-3


# --------------------------------------------------------------- utilities

def _top_level_occupancies(rho: np.ndarray, config: HilbertConfig):
    """Population of the highest cavity and phonon levels."""
    probs = np.real(np.diag(rho)).reshape(
        config.antenna_levels, config.cavity_levels, config.phonon_levels
    )
    return float(probs[:, -1, :].sum()), float(probs[:, :, -1].sum())


def _check_truncation(rho, config, strict: bool):
    top_c, top_p = _top_level_occupancies(rho, config)
    warnings = []
    if top_c > TRUNCATION_OCCUPANCY_LIMIT:
        warnings.append(f"highest cavity level holds {top_c:.2e} population")
    if top_p > TRUNCATION_OCCUPANCY_LIMIT:
        warnings.append(f"highest phonon level holds {top_p:.2e} population")
    if warnings and strict:
        raise ModelValidityError(
            "; ".join(warnings) + "; raise engine.cavity_levels/phonon_levels"
        )
    return warnings


def _collect_warnings(derived, strict: bool):
    warnings = validity_warnings(derived)
    if warnings and strict:
        raise ModelValidityError("; ".join(warnings))
    return warnings


# ------------------------------------------------------------------ params

@dataclass(frozen=True)
class ParamsResult:
    derived: DerivedParams
    rows: list
    warnings: list


def run_params(scenario: Scenario, strict: bool = False) -> ParamsResult:
    d = derived_parameters(scenario)
    warnings = _collect_warnings(d, strict)
    rows = [
        ("d_sigma_debye", d.d_sigma / (1e-21 / 299792458.0), "D"),
        ("d_sigma", d.d_sigma, "C m"),
        ("t_p", d.t_p, ""),
        ("e_inc", d.e_inc, "V/m"),
        ("omega_rabi_over_2pi", d.omega_rabi / TWO_PI, "Hz"),
        ("omega_rabi_a_over_2pi", d.omega_rabi_a / TWO_PI, "Hz"),
        ("e_sigma", d.e_sigma, "V/m"),
        ("e_a", d.e_a, "V/m"),
        ("hbar_g0_sigma_ev", HBAR * d.g0_sigma / EV, "eV"),
        ("hbar_g0_a_ev", HBAR * d.g0_a / EV, "eV"),
        ("hbar_g0_a_alt_ev", HBAR * d.g0_a_alt / EV, "eV"),
        ("g0_sigma_over_2pi", d.g0_sigma / TWO_PI, "Hz"),
        ("g0_a_over_2pi", d.g0_a / TWO_PI, "Hz"),
        ("c0_sigma", d.c0_sigma, ""),
        ("c0_a", d.c0_a, ""),
        ("i_sat_antenna_uw_um2", d.i_sat_antenna / UW_PER_UM2, "uW/um^2"),
        ("i_threshold_plasmon_uw_um2", d.i_threshold_plasmon / UW_PER_UM2, "uW/um^2"),
        ("q_factor", d.q_factor, ""),
        ("jc_rate_over_gamma", d.jc_rate / d.gamma_total, ""),
        ("jc_shift_over_gamma", d.jc_shift / d.gamma_total, ""),
        ("n_th_300K", analytic.thermal_occupancy(d.omega_b, 300.0), ""),
        ("eta_prime", analytic.eta_prime(d), "kg/s"),
        ("eta_sigma", analytic.eta_sigma(d), ""),
        ("eta_conventional", analytic.eta_conventional(d), ""),
        ("pump_photon_flux", analytic.pump_photon_flux(d.intensity, d.spot_area, d.omega_l), "1/s"),
        ("saturated_stokes_flux", analytic.saturated_stokes_flux(d, 1e-2 * UW_PER_UM2), "1/s"),
    ]
    return ParamsResult(derived=d, rows=rows, warnings=warnings)


# ---------------------------------------------------------------- spectrum

@dataclass(frozen=True)
class PeakInfo:
    omega: float
    height: float


@dataclass(frozen=True)
class SpectrumOutcome:
    result: SpectrumResult
    peaks: dict
    population: float
    coherence_sq: float
    warnings: list = field(default_factory=list)


def _solve_preset(derived: DerivedParams, strict: bool = False):
    """Build, solve and wrap the scenario's model; returns the pieces the
    spectrum and sweep paths share."""
    if derived.preset == "antenna_only":
        H, channels = build_qubit_model(derived)
        ops = None
        config = None
    else:
        config = HilbertConfig(
            cavity_levels=derived.cavity_levels, phonon_levels=derived.phonon_levels
        )
        ops = build_operators(config)
        H, channels = build_full_model(derived, ops)
    L = assemble_liouvillian(H, channels)
    rho = steady_state(L)
    warnings = []
    if config is not None:
        warnings = _check_truncation(rho.matrix, config, strict)
    return L, rho, ops, warnings


def _emission_pair(derived, ops):
    """Correlator operator pair (A, B) for the radiating channel."""
    if derived.preset == "antenna_only":
        from .hilbert import QUBIT_LOWERING

        sig = QUBIT_LOWERING
        return sig.conj().T, sig
    return ops.a.conj().T, ops.a


def _fit_sideband(evaluate, center: float, gamma_eff: float, points: int = 61) -> PeakInfo:
    """Line amplitude above the local background around one sideband.

    At strong drive the carrier's inelastic wing under the sideband can
    exceed the line itself, so the quotable height is the fitted
    Lorentzian amplitude on top of a smooth (linear) baseline, the way a
    measured Raman line is read off a luminescent background.
    """
    halfwidth = 3.0 * gamma_eff
    grid = np.linspace(center - halfwidth, center + halfwidth, points)
    vals = evaluate(grid)
    scale = float(vals.max())
    if scale <= 0.0:
        raise NumericalError(
            f"no spectral weight in the scan window around {center:.4e} rad/s"
        )
    x = (grid - center) / gamma_eff
    y = vals / scale

    def model(xx, height, x0, hw, c0, c1):
        return height * hw**2 / ((xx - x0) ** 2 + hw**2) + c0 + c1 * xx

    edge = 0.5 * (y[0] + y[-1])
    p0 = (max(y.max() - edge, 1e-12), 0.0, 0.5, edge, (y[-1] - y[0]) / (x[-1] - x[0]))
    bounds = ([0.0, -2.5, 0.05, -np.inf, -np.inf], [np.inf, 2.5, 5.0, np.inf, np.inf])
    try:
        popt, _ = curve_fit(model, x, y, p0=p0, bounds=bounds, maxfev=20000)
    except RuntimeError as exc:
        raise NumericalError(
            f"sideband line fit failed to converge around {center:.4e} rad/s"
        ) from exc
    height, x0 = popt[0], popt[1]
    return PeakInfo(omega=float(center + x0 * gamma_eff), height=float(height * scale))


def extract_sideband_peaks(evaluate, derived: DerivedParams) -> dict:
    lin = analytic.linearized_inputs(derived)
    return {
        "stokes": _fit_sideband(evaluate, derived.omega_l - derived.omega_b, lin.gamma_eff),
        "antistokes": _fit_sideband(evaluate, derived.omega_l + derived.omega_b, lin.gamma_eff),
    }


def _default_window(derived: DerivedParams, points: int):
    if derived.preset == "antenna_only":
        span = max(10.0 * derived.omega_rabi, 6.0 * derived.gamma_total)
    else:
        span = 1.5 * derived.omega_b
    return np.linspace(derived.omega_l - span, derived.omega_l + span, points)


def run_spectrum(
    scenario: Scenario,
    method: str = "auto",
    window=None,
    points: int = 2001,
    strict: bool = False,
) -> SpectrumOutcome:
    derived = derived_parameters(scenario)
    warnings = _collect_warnings(derived, strict)
    L, rho, ops, trunc_warnings = _solve_preset(derived, strict)
    warnings = warnings + trunc_warnings

    A, B = _emission_pair(derived, ops)
    if derived.preset == "antenna_only":
        sig = B
    else:
        sig = ops.sigma
    population = float(np.real(expectation(sig.conj().T @ sig, rho.matrix)))
    coherence_sq = float(abs(expectation(sig, rho.matrix)) ** 2)

    omega_grid = np.asarray(window, dtype=float) if window is not None else _default_window(
        derived, points
    )
    evaluate = exact_spectrum_evaluator(L, rho, A, B, derived.omega_l, method=method)
    result = spectrum_exact(
        L, rho, A, B, omega_grid, derived.omega_l, method=method, evaluator=evaluate
    )
    if derived.preset == "antenna_only":
        peaks = {"maxima": _local_maxima(result)}
    else:
        peaks = extract_sideband_peaks(evaluate, derived)
    return SpectrumOutcome(
        result=result,
        peaks=peaks,
        population=population,
        coherence_sq=coherence_sq,
        warnings=warnings,
    )


def run_closed_form_spectrum(
    scenario: Scenario,
    model: str,
    window=None,
    points: int = 2001,
    strict: bool = False,
) -> SpectrumOutcome:
    """Closed-form sideband spectrum: 'linearized' carries the coherent
    working point, 'mollow' swaps in the emitter-fluctuation line weight."""
    derived = derived_parameters(scenario)
    if derived.preset == "antenna_only":
        raise ConfigError(
            "closed-form sideband spectra need a radiating mode; "
            "preset antenna_only has none"
        )
    warnings = _collect_warnings(derived, strict)
    if model == "linearized":
        lin = analytic.linearized_inputs(derived)
    elif model == "mollow":
        lin = analytic.mollow_regime_inputs(derived)
    else:
        raise ConfigError(f"unknown closed-form spectrum model {model!r}")
    omega_grid = np.asarray(window, dtype=float) if window is not None else _default_window(
        derived, points
    )
    density = analytic.linearized_spectrum(omega_grid, lin)
    result = SpectrumResult(
        omega=omega_grid,
        density=density,
        omega_l=derived.omega_l,
        diagnostics={"method": model},
    )
    peaks = {
        "stokes": PeakInfo(
            omega=lin.omega_stokes, height=analytic.stokes_peak_height(lin)
        ),
        "antistokes": PeakInfo(
            omega=lin.omega_antistokes, height=analytic.antistokes_peak_height(lin)
        ),
    }
    return SpectrumOutcome(
        result=result,
        peaks=peaks,
        population=derived.sigma_population,
        coherence_sq=abs(derived.alpha_sigma) ** 2,
        warnings=warnings,
    )


def _local_maxima(result: SpectrumResult):
    d = result.density
    # strict interior maxima above 1e-6 of the global top; flat-top safe
    idx = [
        k
        for k in range(1, d.size - 1)
        if d[k] > d[k - 1] and d[k] >= d[k + 1] and d[k] > 1e-6 * d.max()
    ]
    return [PeakInfo(omega=float(result.omega[k]), height=float(d[k])) for k in idx]


# ------------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepRow:
    intensity_uw_um2: float
    population: float
    coherence_sq: float
    stokes: float | None = None
    antistokes: float | None = None
    conv_stokes: float | None = None
    conv_antistokes: float | None = None

    @property
    def attributed_stokes(self) -> float | None:
        if self.stokes is None or self.conv_stokes is None:
            return None
        return self.stokes - self.conv_stokes


def _saturation_row(scenario: Scenario, method: str) -> SweepRow:
    derived = derived_parameters(scenario)
    H, channels = build_qubit_model(derived)
    L = assemble_liouvillian(H, channels)
    rho = steady_state(L)
    from .hilbert import QUBIT_LOWERING

    pop = float(np.real(expectation(QUBIT_LOWERING.conj().T @ QUBIT_LOWERING, rho.matrix)))
    coh = float(abs(expectation(QUBIT_LOWERING, rho.matrix)) ** 2)
    return SweepRow(
        intensity_uw_um2=scenario.intensity_uw_per_um2, population=pop, coherence_sq=coh
    )


def _stokes_row(scenario: Scenario, method: str) -> SweepRow:
    def peaks_for(sc):
        derived = derived_parameters(sc)
        L, rho, ops, _ = _solve_preset(derived)
        A, B = _emission_pair(derived, ops)
        evaluate = exact_spectrum_evaluator(L, rho, A, B, derived.omega_l, method=method)
        pk = extract_sideband_peaks(evaluate, derived)
        sig = ops.sigma
        pop = float(np.real(expectation(sig.conj().T @ sig, rho.matrix)))
        coh = float(abs(expectation(sig, rho.matrix)) ** 2)
        return pk, pop, coh

    peaks, pop, coh = peaks_for(scenario)
    conv_peaks, _, _ = peaks_for(replace(scenario, preset="conventional"))
    return SweepRow(
        intensity_uw_um2=scenario.intensity_uw_per_um2,
        population=pop,
        coherence_sq=coh,
        stokes=peaks["stokes"].height,
        antistokes=peaks["antistokes"].height,
        conv_stokes=conv_peaks["stokes"].height,
        conv_antistokes=conv_peaks["antistokes"].height,
    )


def _sweep_worker(args):
    scenario, mode, method = args
    if mode == "saturation":
        return _saturation_row(scenario, method)
    return _stokes_row(scenario, method)


def run_sweep(
    scenario: Scenario,
    mode: str,
    intensities=None,
    method: str = "auto",
    workers: int = 1,
    strict: bool = False,
) -> list:
    """Sweep drive intensity; rows come back in input order."""
    if mode not in ("saturation", "stokes"):
        raise ConfigError(f"unknown sweep mode {mode!r}")
    if intensities is None:
        intensities = SATURATION_GRID if mode == "saturation" else STOKES_GRID
    base = replace(scenario, preset="antenna_only") if mode == "saturation" else scenario
    _collect_warnings(derived_parameters(base), strict)

    jobs = [
        (replace(base, intensity_uw_per_um2=float(i)), mode, method) for i in intensities
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(j) for j in jobs]
    return rows


# ---------------------------------------------------------------------- em

def run_em(scenario: Scenario, gap_grid=None) -> list:
    if gap_grid is None:
        gap_grid = np.linspace(
            scenario.gap_min_nm * 1e-9, scenario.gap_max_nm * 1e-9, scenario.gap_points
        )
    return emfield.corrected_efficiency_sweep(scenario, gap_grid)


# ------------------------------------------------------------ serialization

def _fmt_cell(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.16e" % float(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_meta(path, scenario: Scenario, payload: dict):
    meta = {
        "scenario_sha256": scenario_sha256(scenario),
        "package_version": _package_version(),
        **payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _package_version() -> str:
    from . import __version__

    return __version__


def params_csv_rows(result: ParamsResult):
    return [(name, value, unit) for name, value, unit in result.rows]


def spectrum_csv_rows(outcome: SpectrumOutcome):
    return list(zip(outcome.result.omega / TWO_PI, outcome.result.density))


def sweep_csv_rows(rows, mode: str):
    if mode == "saturation":
        return [(r.intensity_uw_um2, r.population, r.coherence_sq) for r in rows]
    return [
        (
            r.intensity_uw_um2,
            r.population,
            r.coherence_sq,
            r.stokes,
            r.antistokes,
            r.conv_stokes,
            r.conv_antistokes,
            r.attributed_stokes,
        )
        for r in rows
    ]


SWEEP_HEADERS = {
    "saturation": ["intensity_uw_um2", "population", "coherence_sq"],
    "stokes": [
        "intensity_uw_um2",
        "population",
        "coherence_sq",
        "stokes_peak",
        "antistokes_peak",
        "conv_stokes_peak",
        "conv_antistokes_peak",
        "attributed_stokes_peak",
    ],
}


def em_csv_rows(rows, gamma_total_over_gamma0: float):
    out = []
    for gap, fac, corrected, eta_c in rows:
        out.append(
            (
                gap * 1e9,
                fac.k_inc,
                fac.k_mol,
                fac.f_p,
                analytic.quenching_factor(fac.f_p, gamma_total_over_gamma0),
                corrected,
                eta_c,
                corrected / eta_c,
            )
        )
    return out


EM_HEADER = [
    "gap_nm",
    "k_inc",
    "k_mol",
    "f_p",
    "quenching_factor",
    "corrected_eta_sigma",
    "eta_conventional",
    "efficiency_ratio",
]
