"""Closed-form multi-ion dark state and checks on it.

The dark state lives entirely in the ``eps = 0`` manifold::

    |D(t)> = sum_mu c_mu(t) |W^N_{m-mu}> |mu>

with ``c_mu lambda_b[mu] + c_{mu+1} lambda_a[mu+1] = 0``.  Products of
couplings are accumulated as log-magnitudes so extreme pulse ratios and
large ``m`` neither overflow nor underflow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateInputError, DomainError
from .hamiltonian import DriveParams, HamiltonianSample, chain_couplings, log_envelopes
from .symbasis import SymmetricBasis, enumerate_basis

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DarkVector:
    """Amplitudes ``c_0 .. c_m`` on ``|W^N_{m-mu}>|mu>``."""

    n_ions: int
    n_quanta: int
    coeffs: np.ndarray

    def embed(self, basis: SymmetricBasis | None = None) -> np.ndarray:
        """Vector over the symmetric basis, zero outside ``eps = 0``."""
        if basis is None:
            basis = enumerate_basis(self.n_ions, self.n_quanta)
        if (basis.n_ions, basis.n_quanta) != (self.n_ions, self.n_quanta):
            raise DomainError("dark vector and basis disagree on (N, m)")
        v = np.zeros(len(basis), dtype=complex)
        v[basis.manifold(0)] = self.coeffs
        return v

    def recurrence_residual(self, omega_a: float, omega_b: float) -> float:
        lam_a, lam_b = chain_couplings(self.n_ions, self.n_quanta, omega_a, omega_b)
        c = self.coeffs
        return float(np.max(np.abs(c[:-1] * lam_b + c[1:] * lam_a[1:])))


def _check(N: int, m: int) -> None:
    if m < 1 or m > N:
        raise DomainError(f"dark state needs 1 <= m <= N, got N={N}, m={m}")


def _dark_from_logs(N, m, log_oa, log_ob, sign_a=1.0, sign_b=1.0) -> np.ndarray:
    mu = np.arange(m + 1)
    # log lambda_b[k], k = 0..m-1 and log lambda_a[l], l = 1..m
    with np.errstate(divide="ignore"):
        log_lb = log_ob + np.log(0.5 * np.sqrt(m - mu[:m]))
        log_la = log_oa + np.log(0.5 * np.sqrt(mu[1:] * (N - m + mu[1:])))
    prefix_b = np.concatenate(([0.0], np.cumsum(log_lb)))
    suffix_a = np.concatenate((np.cumsum(log_la[::-1])[::-1], [0.0]))
    log_c = prefix_b + suffix_a
    if np.all(np.isneginf(log_c)):
        raise DegenerateInputError("both pulses vanish; the dark state is undefined")
    log_norm = 0.5 * logsumexp(2.0 * log_c)
    sign = (-1.0) ** mu * sign_b**mu * sign_a ** (m - mu)
    c = sign * np.exp(log_c - log_norm)
    if c[0] < 0:
        c = -c
    return c


def dark_coefficients(N: int, m: int, omega_a: float, omega_b: float) -> DarkVector:
    """Normalised dark amplitudes with the ``c_0 >= 0`` sign convention."""
    _check(N, m)
    with np.errstate(divide="ignore"):
        log_oa = np.log(abs(omega_a)) if omega_a != 0 else -np.inf
        log_ob = np.log(abs(omega_b)) if omega_b != 0 else -np.inf
    c = _dark_from_logs(N, m, log_oa, log_ob, np.sign(omega_a) or 1.0, np.sign(omega_b) or 1.0)
    return DarkVector(N, m, c)


def verify_dark(H: HamiltonianSample, d: DarkVector, basis: SymmetricBasis | None = None) -> float:
    """Relative residual ``|H v| / |H|_F`` of the embedded dark vector."""
    if H.basis_tag != "symmetric":
        raise DomainError(f"expected a symmetric-basis Hamiltonian, got {H.basis_tag!r}")
    if basis is None:
        basis = enumerate_basis(d.n_ions, d.n_quanta)
    if H.matrix.shape != (len(basis), len(basis)):
        raise DomainError("Hamiltonian dimension does not match the dark vector's basis")
    if H.n_ions is not None and (H.n_ions, H.n_quanta) != (d.n_ions, d.n_quanta):
        raise DomainError("Hamiltonian and dark vector disagree on (N, m)")
    v = d.embed(basis)
    scale = max(np.linalg.norm(H.matrix), np.finfo(float).tiny)
    return float(np.linalg.norm(H.matrix @ v) / scale)


def dark_uniqueness(chain: HamiltonianSample, rtol: float = 1e-10) -> int:
    """Numerical nullity of the chain matrix.

    Both pulses on gives 1.  With both pulses off every lower-manifold state is
    null and the result is ``m + 1``; that case is logged as degenerate.
    """
    s = np.linalg.svd(chain.matrix, compute_uv=False)
    if s[0] == 0:
        nullity = len(s)
    else:
        nullity = int(np.sum(s < rtol * s[0]))
    if nullity != 1:
        log.warning("chain matrix at t=%g has nullity %d: dark state is degenerate", chain.time, nullity)
    return nullity


def dark_trajectory(N: int, m: int, p: DriveParams, times) -> list[DarkVector]:
    """Dark vectors along a time grid.

    Works from log-envelopes so the pulse ratio stays finite even where both
    envelopes underflow; the limits at the window edges then follow from the
    sign of ``tau`` automatically.
    """
    _check(N, m)
    log_a, log_b = log_envelopes(np.asarray(times, dtype=float), p)
    return [DarkVector(N, m, _dark_from_logs(N, m, la, lb)) for la, lb in zip(np.atleast_1d(log_a), np.atleast_1d(log_b))]


def dark_matrix(traj: list[DarkVector]) -> np.ndarray:
    """Stack a dark trajectory into shape ``(n_times, m + 1)``."""
    return np.array([d.coeffs for d in traj])
