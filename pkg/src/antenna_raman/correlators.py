"""Two-time correlators and emission spectra.

Correlator convention (quantum regression):

    C(tau) = <A(0) B(tau)> = Tr[ B exp(L tau) (rho_ss A) ],   C(0) = <A B>

For an emission spectrum of operator o, call with A = o^+, B = o.  The
one-sided spectrum in the frame rotating at omega_l is

    S(omega) = pf(omega) * 2 Re Int_0^inf dtau e^{i(omega-omega_l) tau}
                                             (C(tau) - C_inf)

with C_inf = <A><B> (coherent part subtracted) and pf either omega^4
(radiated-power weighting) or 1.

Three evaluation routes, exact to solver precision except the first:

* grid:      propagate C on a uniform tau grid, integrate by trapezoid
* eig:       dense eigendecomposition of the generator, poles summed
             analytically (handles widely separated time scales)
* resolvent: one shifted linear solve per frequency (sparse-friendly)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .lindblad import Liouvillian, DensityMatrix

# spectra more negative than -NEGATIVE_DENSITY_TOL * max are treated as a
# numerical failure; anything shallower is clipped to zero
NEGATIVE_DENSITY_TOL = 1e-6

_EIG_SUPERDIM_LIMIT = 4096


@dataclass(frozen=True)
class CorrelationSeries:
    tau: np.ndarray
    values: np.ndarray
    plateau: complex
    pair: tuple = ("A", "B")


@dataclass(frozen=True)
class SpectrumResult:
    omega: np.ndarray
    density: np.ndarray
    omega_l: float
    diagnostics: dict = field(default_factory=dict, repr=False)


def _vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m, dtype=complex).reshape(-1)


def _expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def _initial_matrices(rho_ss: DensityMatrix, A: np.ndarray, B: np.ndarray):
    rho = rho_ss.matrix
    a_mean = _expectation(A, rho)
    b_mean = _expectation(B, rho)
    m0 = rho @ A
    m_perp = m0 - a_mean * rho  # traceless: no stationary component
    return m0, m_perp, a_mean, b_mean


def two_time_correlator(
    L: Liouvillian,
    rho_ss: DensityMatrix,
    A: np.ndarray,
    B: np.ndarray,
    tau_grid: np.ndarray,
    pair: tuple = ("A", "B"),
) -> CorrelationSeries:
    """Propagate <A(0)B(tau)> on a uniform, increasing tau grid."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 2 or tau[0] != 0.0:
        raise ValueError("tau_grid must be 1-d, start at 0 and have >= 2 points")
    steps = np.diff(tau)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("tau_grid must be uniform")
    dt = float(steps[0])

    m0, _, a_mean, b_mean = _initial_matrices(rho_ss, A, B)
    v = _vec(m0)
    b_row = _vec(B.T)

    values = np.empty(tau.size, dtype=complex)
    values[0] = b_row @ v

    if not L.is_sparse and L.superdim <= 1024:
        propagator = sla.expm(L.matrix * dt)
        for k in range(1, tau.size):
            v = propagator @ v
            values[k] = b_row @ v
    else:
        A_op = L.matrix
        for k in range(1, tau.size):
            v = spla.expm_multiply(A_op, v, start=0.0, stop=dt, num=2, endpoint=True)[-1]
            values[k] = b_row @ v

    return CorrelationSeries(tau=tau, values=values, plateau=a_mean * b_mean, pair=pair)


def _required_span(tau, resid_curve, decay_tol):
    """Estimate the tau span needed for the envelope to reach decay_tol."""
    half = tau.size // 2
    mask = resid_curve[half:] > 0
    if mask.sum() < 4:
        return None
    t_fit = tau[half:][mask]
    y_fit = np.log(resid_curve[half:][mask])
    slope = np.polyfit(t_fit, y_fit, 1)[0]
    if slope >= 0:
        return None
    target = decay_tol * resid_curve.max()
    extra = (np.log(resid_curve[-1]) - np.log(target)) / (-slope)
    return tau[-1] + max(extra, 0.0)


def _finalize_density(density: np.ndarray) -> np.ndarray:
    top = float(np.max(np.abs(density))) if density.size else 0.0
    if top == 0.0:
        return density
    floor = -NEGATIVE_DENSITY_TOL * top
    low = float(density.min())
    if low < floor:
        raise NumericalError(
            f"spectral density reaches {low:.3e}, below the tolerated "
            f"negative excursion {floor:.3e}; increase resolution or "
            "check the model"
        )
    return np.where(density < 0.0, 0.0, density)


def _prefactor(omega: np.ndarray, kind: str) -> np.ndarray:
    if kind == "omega4":
        return omega.astype(float) ** 4
    if kind == "none":
        return np.ones_like(omega, dtype=float)
    raise ValueError(f"unknown prefactor {kind!r}")


def spectrum_from_correlator(
    series: CorrelationSeries,
    omega_l: float,
    omega_grid: np.ndarray,
    prefactor: str = "omega4",
    decay_tol: float = 1e-3,
) -> SpectrumResult:
    """Integrate a tau-grid correlator into a spectrum (trapezoid rule)."""
    omega = np.asarray(omega_grid, dtype=float)
    resid = series.values - series.plateau
    resid_abs = np.abs(resid)
    amp = float(resid_abs.max())
    if amp > 0 and resid_abs[-1] > decay_tol * amp:
        need = _required_span(series.tau, resid_abs, decay_tol)
        hint = (
            f"extend the grid to about tau_max = {need:.3e} s"
            if need is not None
            else "the correlator shows no decay on this grid"
        )
        raise NumericalError(
            f"correlator has not decayed at tau_max = {series.tau[-1]:.3e} s "
            f"(residual {resid_abs[-1] / amp:.2e} of peak); {hint}"
        )

    weights = np.full(series.tau.size, series.tau[1] - series.tau[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5

    density = np.empty(omega.size, dtype=float)
    block = 256
    for start in range(0, omega.size, block):
        om = omega[start : start + block]
        phases = np.exp(1j * np.outer(om - omega_l, series.tau))
        density[start : start + block] = 2.0 * np.real(phases @ (weights * resid))

    density *= _prefactor(omega, prefactor)
    density = _finalize_density(density)
    return SpectrumResult(
        omega=omega,
        density=density,
        omega_l=omega_l,
        diagnostics={"method": "grid", "tau_max": float(series.tau[-1])},
    )


def _eig_evaluator(L, m_perp, b_row, omega_l, prefactor):
    evals, vecs = sla.eig(L.matrix)
    coeffs = sla.solve(vecs, _vec(m_perp))
    weights = (b_row @ vecs) * coeffs
    # the stationary mode carries exactly zero weight analytically; zero it
    # to keep noise from the near-singular pole out of the sum
    weights[np.argmin(np.abs(evals))] = 0.0

    def evaluate(omega):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        delta = omega - omega_l
        dens = np.empty(omega.size, dtype=float)
        block = 512
        for start in range(0, omega.size, block):
            d = delta[start : start + block]
            denom = evals[:, None] + 1j * d[None, :]
            dens[start : start + block] = 2.0 * np.real((-weights) @ (1.0 / denom))
        return dens * _prefactor(omega, prefactor)

    return evaluate


def _shifted_solve(L, shift, rhs):
    """Solve (L + shift*I) x = rhs for one complex shift."""
    n = L.superdim
    if L.is_sparse:
        M = (L.matrix + shift * sp.identity(n, dtype=complex, format="csr")).tocsc()
        try:
            return spla.splu(M).solve(rhs)
        except MemoryError:
            ilu = spla.spilu(M, drop_tol=1e-6, fill_factor=20)
            x, info = spla.lgmres(
                M, rhs, M=spla.LinearOperator((n, n), ilu.solve), rtol=1e-10, maxiter=400
            )
            if info != 0:
                raise NumericalError(
                    f"iterative resolvent solve failed to converge (info={info})"
                )
            return x
    M = L.matrix + shift * np.eye(n, dtype=complex)
    return sla.solve(M, rhs)


def _resolvent_evaluator(L, m_perp, b_row, omega_l, prefactor):
    rhs = _vec(m_perp)

    def evaluate(omega):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        dens = np.empty(omega.size, dtype=float)
        for k, om in enumerate(omega):
            delta = om - omega_l
            if delta == 0.0:
                # the generator is singular at zero shift; nudge by an
                # amount far below any physical linewidth
                delta = 1e-9 * _spectral_scale(L)
            x = _shifted_solve(L, 1j * delta, rhs)
            dens[k] = 2.0 * np.real(-(b_row @ x))
        return dens * _prefactor(omega, prefactor)

    return evaluate


def _spectral_scale(L) -> float:
    if L.is_sparse:
        return float(np.max(np.abs(L.matrix.diagonal()))) or 1.0
    return float(np.max(np.abs(np.diag(L.matrix)))) or 1.0


def exact_spectrum_evaluator(
    L: Liouvillian,
    rho_ss: DensityMatrix,
    A: np.ndarray,
    B: np.ndarray,
    omega_l: float,
    prefactor: str = "omega4",
    method: str = "auto",
):
    """Return a callable omega -> spectral density using an exact route.

    "eig" diagonalizes the dense generator once (fast repeated evaluation);
    "resolvent" does one shifted solve per frequency and also works for
    sparse generators.  "auto" picks eig when the generator is dense and
    small enough.
    """
    _, m_perp, _, _ = _initial_matrices(rho_ss, A, B)
    b_row = _vec(B.T)

    if method == "auto":
        method = "eig" if (not L.is_sparse and L.superdim <= _EIG_SUPERDIM_LIMIT) else "resolvent"
    if method == "eig":
        if L.is_sparse:
            raise NumericalError("eig spectrum path requires a dense generator")
        return _eig_evaluator(L, m_perp, b_row, omega_l, prefactor)
    if method == "resolvent":
        return _resolvent_evaluator(L, m_perp, b_row, omega_l, prefactor)
    raise ValueError(f"unknown spectrum method {method!r}")


def spectrum_exact(
    L: Liouvillian,
    rho_ss: DensityMatrix,
    A: np.ndarray,
    B: np.ndarray,
    omega_grid: np.ndarray,
    omega_l: float,
    prefactor: str = "omega4",
    method: str = "auto",
    evaluator=None,
) -> SpectrumResult:
    """Spectral density on a grid; pass a prebuilt evaluator to reuse its
    decomposition (big systems pay one factorization per frequency)."""
    if evaluator is None:
        evaluator = exact_spectrum_evaluator(L, rho_ss, A, B, omega_l, prefactor, method)
    omega = np.asarray(omega_grid, dtype=float)
    density = _finalize_density(evaluator(omega))
    return SpectrumResult(
        omega=omega,
        density=density,
        omega_l=omega_l,
        diagnostics={"method": method},
    )
