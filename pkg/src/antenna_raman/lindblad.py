"""Liouvillian assembly and steady states for GKSL master equations.

Master equation convention (rate enters with a factor 1/2):

    drho/dt = -i [H, rho] + sum_k (r_k / 2) (2 O_k rho O_k^+
                                             - O_k^+ O_k rho - rho O_k^+ O_k)

so a cavity with channel (a, kappa) loses photons at rate kappa:
d<a^+a>/dt = -kappa <a^+a>.

Vectorization is C-order, vec(rho) = rho.reshape(-1), for which

    vec(A rho B) = (A kron B^T) vec(rho)
    Tr[B X]      = vec(B^T) . vec(X)

The superoperator is dense up to superdim 4096 (composite dim 64) and a
CSR sparse matrix beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError

# largest superoperator kept dense (64^2); beyond this, kron products and
# LU factors get built sparse
DENSE_SUPERDIM = 4096


@dataclass(frozen=True)
class CollapseChannel:
    """One dissipation channel: operator, rate (rad/s), optional label."""

    operator: np.ndarray
    rate: float
    label: str = ""


@dataclass(frozen=True)
class Liouvillian:
    """Assembled generator. matrix is ndarray (dense) or CSR (sparse)."""

    matrix: object
    dim: int

    @property
    def superdim(self) -> int:
        return self.dim * self.dim

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)


def _kron(a, b, sparse: bool):
    if sparse:
        return sp.kron(sp.csr_matrix(a), sp.csr_matrix(b), format="csr")
    return np.kron(a, b)


def assemble_liouvillian(H: np.ndarray, channels) -> Liouvillian:
    """Build the generator for Hamiltonian H and a list of CollapseChannel."""
    dim = H.shape[0]
    if H.shape != (dim, dim):
        raise ValueError("H must be square")
    sparse = dim * dim > DENSE_SUPERDIM
    eye = sp.identity(dim, dtype=complex, format="csr") if sparse else np.eye(dim, dtype=complex)

    L = -1j * (_kron(H, eye, sparse) - _kron(eye, H.T, sparse))
    for ch in channels:
        O = ch.operator
        OdO = O.conj().T @ O
        L = L + (ch.rate / 2.0) * (
            2.0 * _kron(O, O.conj(), sparse)
            - _kron(OdO, eye, sparse)
            - _kron(eye, OdO.T, sparse)
        )
    if sparse:
        L = sp.csr_matrix(L)
    return Liouvillian(matrix=L, dim=dim)


@dataclass(frozen=True)
class SteadyStateDiagnostics:
    residual: float
    trace_defect: float
    hermiticity_defect: float
    min_eigenvalue: float
    uniqueness_gap: float
    method: str


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dim: int
    diagnostics: SteadyStateDiagnostics = field(repr=False, default=None)


def _trace_row(dim: int) -> np.ndarray:
    row = np.zeros(dim * dim, dtype=complex)
    row[:: dim + 1] = 1.0
    return row


def _solve_with_trace_row(L: Liouvillian, row_index: int):
    """Solve L x = 0 with row `row_index` replaced by the trace constraint."""
    n = L.superdim
    rhs = np.zeros(n, dtype=complex)
    rhs[row_index] = 1.0
    tr = _trace_row(L.dim)

    if L.is_sparse:
        M = L.matrix.tolil(copy=True)
        M[row_index, :] = tr
        M = M.tocsc()
        lu = spla.splu(M)
        x = lu.solve(rhs)
        # one step of iterative refinement
        resid = rhs - M @ x
        x = x + lu.solve(resid)
    else:
        M = L.matrix.copy()
        M[row_index, :] = tr
        lu, piv = sla.lu_factor(M)
        x = sla.lu_solve((lu, piv), rhs)
        if not np.all(np.isfinite(x.view(float))):
            return x  # singular factor; caller reports the failure
        resid = rhs - M @ x
        x = x + sla.lu_solve((lu, piv), resid)
    return x


def _liouvillian_scale(L: Liouvillian) -> float:
    if L.is_sparse:
        data = L.matrix.data
        return float(np.max(np.abs(data))) if data.size else 0.0
    return float(np.max(np.abs(L.matrix)))


def steady_state(
    L: Liouvillian,
    check_uniqueness: bool = True,
    residual_tol: float = 1e-8,
) -> DensityMatrix:
    """Unique trace-one steady state of the generator.

    Raises NumericalError when the solve residual is poor or the null
    space looks degenerate (non-unique stationary state).
    """
    n = L.superdim
    scale = _liouvillian_scale(L)
    if scale == 0.0:
        raise NumericalError("zero generator has no unique steady state")

    x = _solve_with_trace_row(L, 0)
    if not np.all(np.isfinite(x.view(float))):
        raise NumericalError(
            "steady-state solve produced non-finite values; the generator "
            "is singular under the trace constraint"
        )

    res = np.linalg.norm(L.matrix @ x) / (scale * np.linalg.norm(x))
    if not np.isfinite(res) or res > residual_tol:
        raise NumericalError(
            f"steady-state residual {res:.2e} exceeds {residual_tol:.0e}; "
            "generator is near-degenerate or badly conditioned"
        )

    gap = np.inf
    if check_uniqueness:
        if not L.is_sparse and n <= 2048:
            svals = sla.svdvals(L.matrix)
            # smallest singular value ~ 0 for the stationary mode; the next
            # one up measures how far the null space is from 2-dimensional
            gap = float(svals[-2] / svals[0])
            if svals[-2] / svals[0] < 1e-10:
                raise NumericalError(
                    "steady state is not unique (second singular value "
                    f"{svals[-2]:.3e} of {svals[0]:.3e})"
                )
        else:
            # large system: re-solve with a different constraint row; any
            # second stationary direction shows up as a disagreement
            other = (L.dim + 1) % n
            x2 = _solve_with_trace_row(L, other if other != 0 else 1)
            dist = np.linalg.norm(x - x2) / np.linalg.norm(x)
            gap = float(dist)
            if dist > 1e-6:
                raise NumericalError(
                    f"steady state is not unique (constraint-row solutions "
                    f"differ by {dist:.2e})"
                )

    rho = x.reshape(L.dim, L.dim)
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    rho = 0.5 * (rho + rho.conj().T)
    trace_defect = abs(np.trace(rho) - 1.0)
    rho = rho / np.trace(rho).real

    evals = np.linalg.eigvalsh(rho)
    min_eig = float(evals[0])
    if min_eig < -1e-6:
        raise NumericalError(f"steady state has negative eigenvalue {min_eig:.2e}")

    diags = SteadyStateDiagnostics(
        residual=float(res),
        trace_defect=float(trace_defect),
        hermiticity_defect=herm_defect,
        min_eigenvalue=min_eig,
        uniqueness_gap=gap,
        method="sparse-lu" if L.is_sparse else "dense-lu",
    )
    return DensityMatrix(matrix=rho, dim=L.dim, diagnostics=diags)
