"""Pulse envelopes, coupling matrix elements and Hamiltonian matrices.

Units: time in units of the pulse width T, frequencies in units of 1/T.
Spontaneous decay out of ``|e>`` enters only through the complex detuning
``delta - 1j * gamma`` on the excited-state diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import DomainError
from .symbasis import SymmetricBasis, SymmetricState, enumerate_basis

BasisTag = Literal["symmetric", "chain", "computational"]


@dataclass(frozen=True)
class DriveParams:
    """Gaussian pulse pair and detuning.

    ``tau > 0`` puts pulse a first (forward STIRAP), ``tau < 0`` puts pulse b
    first (reverse STIRAP).
    """

    omega0: float
    tau: float
    delta: float = 0.0
    gamma: float = 0.0
    pulse_width: float = 1.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be positive, got {self.omega0}")
        if not self.pulse_width > 0:
            raise DomainError(f"pulse_width must be positive, got {self.pulse_width}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def delta_tilde(self) -> complex:
        return complex(self.delta, -self.gamma)

    @property
    def direction(self) -> str:
        if self.tau > 0:
            return "forward"
        if self.tau < 0:
            return "reverse"
        return "simultaneous"

    def default_window(self) -> tuple[float, float]:
        half = 4.0 * self.pulse_width + abs(self.tau)
        return (-half, half)

    def replace(self, **changes) -> "DriveParams":
        kw = dict(
            omega0=self.omega0,
            tau=self.tau,
            delta=self.delta,
            gamma=self.gamma,
            pulse_width=self.pulse_width,
        )
        kw.update(changes)
        return DriveParams(**kw)


@dataclass
class HamiltonianSample:
    basis_tag: BasisTag
    time: float
    matrix: np.ndarray
    n_ions: int | None = None
    n_quanta: int | None = None
    params: DriveParams | None = field(default=None, repr=False)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        m = self.matrix
        return float(np.max(np.abs(m - m.conj().T), initial=0.0)) < atol


def pulse_envelopes(t, p: DriveParams):
    """Return ``(omega_a, omega_b)`` at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    T = p.pulse_width
    omega_a = p.omega0 * np.exp(-((t + p.tau) ** 2) / T**2)
    omega_b = p.omega0 * np.exp(-((t - p.tau) ** 2) / T**2)
    if omega_a.ndim == 0:
        return float(omega_a), float(omega_b)
    return omega_a, omega_b


def log_envelopes(t, p: DriveParams):
    """Natural logs of the envelopes; finite at any ``t`` (no underflow)."""
    t = np.asarray(t, dtype=float)
    T = p.pulse_width
    base = np.log(p.omega0)
    return base - (t + p.tau) ** 2 / T**2, base - (t - p.tau) ** 2 / T**2


def _raw_lambda(kind: str, mu: int, eps: int, N: int, m: int) -> float:
    # Couplings per unit Rabi frequency, zero outside the valid range.
    if kind == "a+":
        val = mu * (eps + 1) * (N - m + mu)
    elif kind == "a-":
        val = (mu + 1) * eps * (N - m + mu + 1)
    elif kind == "b-":
        val = eps * (m - mu - eps + 1)
    elif kind == "b+":
        val = (eps + 1) * (m - mu - eps)
    else:
        raise DomainError(f"unknown coupling kind {kind!r}")
    return 0.5 * np.sqrt(val) if val > 0 else 0.0


def coupling_lambda(kind, mu, eps, N, m, omega_a, omega_b) -> float:
    """Matrix element of one of the four collective coupling terms.

    ``a+`` : (mu, eps) -> (mu-1, eps+1), phonon absorbed, ion 0 -> e
    ``a-`` : (mu, eps) -> (mu+1, eps-1)
    ``b+`` : (mu, eps) -> (mu, eps+1), ion 1 -> e
    ``b-`` : (mu, eps) -> (mu, eps-1)
    """
    if N < 1 or m < 0 or m > N or mu < 0 or eps < 0 or mu + eps > m:
        raise DomainError(f"(mu={mu}, eps={eps}) invalid for N={N}, m={m}")
    omega = omega_a if kind in ("a+", "a-") else omega_b
    return omega * _raw_lambda(kind, mu, eps, N, m)


@lru_cache(maxsize=64)
def _symmetric_generators(N: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    basis = enumerate_basis(N, m)
    d = len(basis)
    A = np.zeros((d, d))
    B = np.zeros((d, d))
    for i, (mu, eps) in enumerate(basis):
        if mu >= 1 and mu + eps <= m:
            j = basis.index(mu - 1, eps + 1)
            A[j, i] = A[i, j] = _raw_lambda("a+", mu, eps, N, m)
        if mu + eps + 1 <= m:
            j = basis.index(mu, eps + 1)
            B[j, i] = B[i, j] = _raw_lambda("b+", mu, eps, N, m)
    A.setflags(write=False)
    B.setflags(write=False)
    D = basis.eps_values.astype(float)
    D.setflags(write=False)
    return A, B, D


def symmetric_generators(basis: SymmetricBasis):
    """Static pieces ``(A, B, D)`` with ``H(t) = Wa(t) A + Wb(t) B + dt * diag(D)``.

    ``A`` and ``B`` are real symmetric coupling patterns per unit Rabi
    frequency; ``D`` is the excited-ion count of each basis state.
    """
    return _symmetric_generators(basis.n_ions, basis.n_quanta)


def build_symmetric_hamiltonian(basis: SymmetricBasis, t: float, p: DriveParams) -> HamiltonianSample:
    A, B, D = symmetric_generators(basis)
    omega_a, omega_b = pulse_envelopes(t, p)
    H = omega_a * A + omega_b * B + np.diag(p.delta_tilde * D)
    return HamiltonianSample("symmetric", float(t), H.astype(complex), basis.n_ions, basis.n_quanta, p)


def chain_order(m: int) -> list[SymmetricState]:
    """States of the relevant subspace in interleaved order (mu,0), (mu,1), (mu+1,0), ..."""
    order: list[SymmetricState] = []
    for mu in range(m):
        order += [SymmetricState(mu, 0), SymmetricState(mu, 1)]
    order.append(SymmetricState(m, 0))
    return order


def chain_index_map(basis: SymmetricBasis) -> np.ndarray:
    """Positions in ``basis`` of each chain-ordered state."""
    return np.array([basis.index(mu, eps) for mu, eps in chain_order(basis.n_quanta)])


def chain_couplings(N: int, m: int, omega_a, omega_b):
    """Return ``(lambda_a, lambda_b)``; ``lambda_a[mu]`` for mu = 0..m, ``lambda_b[mu]`` for mu = 0..m-1.

    ``lambda_a[0]`` is identically zero and kept for index alignment.
    """
    mu = np.arange(m + 1)
    lam_a = 0.5 * omega_a * np.sqrt(mu * (N - m + mu))
    lam_b = 0.5 * omega_b * np.sqrt(m - mu[:m])
    return lam_a, lam_b


def build_chain_matrix(N: int, m: int, t: float, p: DriveParams) -> HamiltonianSample:
    """Tridiagonal (2m+1)-dimensional matrix over the relevant subspace."""
    if m < 1 or m > N:
        raise DomainError(f"chain needs 1 <= m <= N, got N={N}, m={m}")
    omega_a, omega_b = pulse_envelopes(t, p)
    lam_a, lam_b = chain_couplings(N, m, omega_a, omega_b)
    off = np.empty(2 * m)
    off[0::2] = lam_b
    off[1::2] = lam_a[1:]
    diag = np.zeros(2 * m + 1, dtype=complex)
    diag[1::2] = p.delta_tilde
    H = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return HamiltonianSample("chain", float(t), H, N, m, p)
