"""Instantaneous eigenstructure of the chain matrix.

Besides the dark eigenvalue 0, the chain has ``2m`` eigenvalues that come in
pairs sharing one value of the dimensionless root::

    z = E (E - delta) / omega0**2

Each root gives ``E = (delta +/- sqrt(delta**2 + 4 omega0**2 z)) / 2``.  The
roots depend on ``N``, ``m`` and ``t`` only, not on ``omega0`` or ``delta``.
The gap-setting eigenvalue ``E1`` belongs to the smallest root.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguityError, ConsistencyError
from .hamiltonian import DriveParams, HamiltonianSample, build_chain_matrix, chain_couplings, pulse_envelopes

ZERO_RTOL = 1e-10
GAP_RTOL = 1e-12
PAIR_TOL = 1e-8


@dataclass
class SpectrumSample:
    time: float
    eigenvalues: np.ndarray
    dark_index: int
    e1: complex
    z_roots: np.ndarray
    gamma: complex | None = None  # z root belonging to e1

    @property
    def dark_eigenvalue(self) -> complex:
        return complex(self.eigenvalues[self.dark_index])


def _scale(chain: HamiltonianSample) -> float:
    if chain.params is not None:
        return chain.params.omega0
    return max(float(np.linalg.norm(chain.matrix, 2)), np.finfo(float).tiny)


def _pair_roots(E: np.ndarray, delta_tilde: complex, omega0: float) -> np.ndarray:
    z = E * (E - delta_tilde) / omega0**2
    z = z[np.lexsort((z.imag, z.real))]
    first, second = z[0::2], z[1::2]
    if len(first) != len(second):
        raise ConsistencyError("odd number of nonzero eigenvalues; cannot pair roots")
    mismatch = np.abs(first - second)
    if np.any(mismatch > PAIR_TOL * np.maximum(1.0, np.abs(first))):
        raise ConsistencyError(f"eigenvalue pairs map to different roots (max gap {mismatch.max():.3g})")
    return 0.5 * (first + second)


def instantaneous_spectrum(chain: HamiltonianSample) -> SpectrumSample:
    H = chain.matrix
    scale = _scale(chain)
    eig = np.linalg.eigvals(H)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    mags = np.abs(eig)
    order = np.argsort(mags, kind="stable")
    dark = int(order[0])

    off = np.diag(H, 1)
    pulses_on = bool(np.all(off != 0))
    if pulses_on:
        if mags[order[1]] < GAP_RTOL * scale:
            raise AmbiguityError(
                f"two eigenvalues within {GAP_RTOL:g}*omega0 of zero at t={chain.time}; E1 is not isolated"
            )
        candidates = order[1:]
    else:
        candidates = order[mags[order] > ZERO_RTOL * scale]

    if len(candidates):
        best = mags[candidates[0]]
        # +/-E ties (delta = 0): take the lower branch
        tied = [i for i in candidates if abs(mags[i] - best) <= GAP_RTOL * max(best, scale)]
        e1 = complex(eig[min(tied, key=lambda i: (eig[i].real, eig[i].imag))])
    else:
        e1 = complex("nan")

    z = np.array([], dtype=complex)
    gamma = None
    delta_tilde = complex(H[1, 1]) if H.shape[0] > 1 else 0j
    if pulses_on and chain.params is not None:
        nonzero = np.delete(eig, dark)
        z = _pair_roots(nonzero, delta_tilde, chain.params.omega0)
        gamma = complex(e1 * (e1 - delta_tilde) / chain.params.omega0**2)
    return SpectrumSample(chain.time, eig, dark, e1, z, gamma)


def determinant_sequence(E, delta_tilde, lambdas):
    """All leading principal minors ``M_1 .. M_{2m+1}`` of ``chain - E``.

    ``lambdas = (lambda_a, lambda_b)`` as returned by
    :func:`dicke_stirap.hamiltonian.chain_couplings`.
    """
    lam_a, lam_b = lambdas
    m = len(lam_b)
    E = np.asarray(E, dtype=complex)
    prev2 = np.ones_like(E)  # M_0
    prev1 = -E  # M_1
    out = [prev1]
    for k in range(m):
        even = (delta_tilde - E) * prev1 - lam_b[k] ** 2 * prev2
        odd = -E * even - lam_a[k + 1] ** 2 * prev1
        out += [even, odd]
        prev2, prev1 = even, odd
    return out


def determinant(m: int, E, delta_tilde, lambdas):
    """``M_{2m+1}(E)`` by the two-term recurrences, ``M_1 = -E``."""
    lam_a, lam_b = lambdas
    if len(lam_b) < m or len(lam_a) < m + 1:
        raise ValueError("need lambda_a[0..m] and lambda_b[0..m-1]")
    seq = determinant_sequence(E, delta_tilde, (lam_a[: m + 1], lam_b[:m]))
    return seq[2 * m]


def chain_lambdas(N: int, m: int, t: float, p: DriveParams):
    omega_a, omega_b = pulse_envelopes(t, p)
    return chain_couplings(N, m, omega_a, omega_b)


def z_roots(N: int, m: int, t: float, p: DriveParams) -> np.ndarray:
    """The ``m`` roots ``z`` recovered from the ``2m`` nonzero chain eigenvalues."""
    return instantaneous_spectrum(build_chain_matrix(N, m, t, p)).z_roots


def e1_closed_form(gamma, omega0: float, delta: float) -> complex:
    """Eigenvalue nearest zero for root ``gamma``: (delta - sqrt(delta^2 + 4 omega0^2 gamma)) / 2."""
    return complex(0.5 * (delta - np.sqrt(complex(delta**2 + 4.0 * omega0**2 * gamma))))


def spectrum_scan(N: int, m: int, p: DriveParams, times) -> list[SpectrumSample]:
    return [instantaneous_spectrum(build_chain_matrix(N, m, t, p)) for t in np.asarray(times, dtype=float)]


def adiabaticity_area(times, gammas, omega0: float) -> float:
    """Quadrature of ``omega0/2 * integral gamma(t) dt`` on the sample grid."""
    g = np.real_if_close(np.asarray(gammas))
    return float(0.5 * omega0 * np.trapezoid(np.real(g), np.asarray(times, dtype=float)))
