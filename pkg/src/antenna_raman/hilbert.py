"""Composite Hilbert space and operator construction.

The space is a Kronecker product of three factors, in this fixed order:

    antenna (two-level)  x  cavity (Fock, truncated)  x  vibration (Fock, truncated)

All operators are dense complex arrays; the dimensions used in practice
(<= 128) make dense algebra both simpler and faster than sparse at this
layer.  Sparsity only pays off one level up, in the superoperator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# lowering operator of a bare two-level system, |g><e|
QUBIT_LOWERING = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def destroy(n_levels: int) -> np.ndarray:
    """Bosonic annihilation operator truncated to n_levels Fock states."""
    if n_levels < 2:
        raise ConfigError(f"need at least 2 levels for a mode, got {n_levels}")
    op = np.zeros((n_levels, n_levels), dtype=complex)
    ns = np.arange(1, n_levels)
    op[ns - 1, ns] = np.sqrt(ns)
    return op


@dataclass(frozen=True)
class HilbertConfig:
    """Truncation settings for the composite space.

    dim_cap guards against accidentally huge products; raise it explicitly
    if a larger space is really wanted.
    """

    cavity_levels: int
    phonon_levels: int
    antenna_levels: int = 2
    dim_cap: int = 128

    def __post_init__(self):
        if self.antenna_levels != 2:
            raise ConfigError("antenna factor is a two-level system")
        if self.cavity_levels < 2 or self.phonon_levels < 2:
            raise ConfigError("cavity_levels and phonon_levels must be >= 2")
        if self.dim > self.dim_cap:
            raise ConfigError(
                f"composite dimension {self.dim} = "
                f"{self.antenna_levels}*{self.cavity_levels}*{self.phonon_levels} "
                f"exceeds cap {self.dim_cap}"
            )

    @property
    def dim(self) -> int:
        return self.antenna_levels * self.cavity_levels * self.phonon_levels


@dataclass(frozen=True)
class OperatorSet:
    """Factor operators promoted to the full composite space."""

    sigma: np.ndarray
    a: np.ndarray
    b: np.ndarray
    identity: np.ndarray
    config: HilbertConfig = field(repr=False)

    @property
    def dim(self) -> int:
        return self.config.dim


def build_operators(config: HilbertConfig) -> OperatorSet:
    """Promote sigma, a, b to the composite space by Kronecker products."""
    i_s = np.eye(config.antenna_levels, dtype=complex)
    i_c = np.eye(config.cavity_levels, dtype=complex)
    i_p = np.eye(config.phonon_levels, dtype=complex)

    sigma = np.kron(np.kron(QUBIT_LOWERING, i_c), i_p)
    a = np.kron(np.kron(i_s, destroy(config.cavity_levels)), i_p)
    b = np.kron(np.kron(i_s, i_c), destroy(config.phonon_levels))
    identity = np.kron(np.kron(i_s, i_c), i_p)
    return OperatorSet(sigma=sigma, a=a, b=b, identity=identity, config=config)


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """Tr[op rho]; callers take .real when the operator is Hermitian."""
    return complex(np.trace(op @ rho))
