"""Permutation-symmetric state space of N ions sharing m excitations.

A symmetric state ``(mu, eps)`` holds ``mu`` phonons in the bus mode and
``eps`` ions in the excited level ``|e>``.  The remaining ``m - mu - eps``
excitations sit in ions prepared in ``|1>`` and the other ``N - m + mu``
ions are in ``|0>``.  The state is the normalised equal superposition of
all distinct orderings of those internal labels.

Ordering of the symmetric basis is eps-major, mu-ascending, so the
non-decaying ``eps = 0`` manifold is the leading contiguous block.

Computational basis convention (shared with :mod:`dicke_stirap.oracle`):
ion ``j`` is base-3 digit ``j`` (0 -> ``|0>``, 1 -> ``|1>``, 2 -> ``|e>``,
ion 0 least significant) and the phonon number is the slowest axis::

    index = n_phonons * 3**N + sum_j digit_j * 3**j
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DomainError

# exact integer combinatorics below this size, log-gamma above
_EXACT_LIMIT = 20

LEVEL_0, LEVEL_1, LEVEL_E = 0, 1, 2


class SymmetricState(NamedTuple):
    mu: int
    eps: int


def _check_sizes(N: int, m: int) -> None:
    if N < 1 or m < 0 or m > N:
        raise DomainError(f"need N >= 1 and 0 <= m <= N, got N={N}, m={m}")


def _check_state(N: int, m: int, mu: int, eps: int) -> None:
    _check_sizes(N, m)
    if mu < 0 or eps < 0 or mu + eps > m:
        raise DomainError(f"state (mu={mu}, eps={eps}) is not valid for m={m}")


def dimension(N: int, m: int) -> int:
    """Number of symmetric states, the (m+1)-th triangle number."""
    _check_sizes(N, m)
    return (m + 1) * (m + 2) // 2


def full_coupled_dimension(N: int, m: int) -> int:
    """Number of computational basis states carrying exactly ``m`` excitations.

    Counts every placement of ``m - mu`` internal excitations among the ions,
    ``eps`` of them promoted to ``|e>``, times the phonon Fock state ``mu``.
    """
    _check_sizes(N, m)
    return sum(
        math.comb(N, m - mu) * math.comb(m - mu, eps)
        for eps in range(m + 1)
        for mu in range(m - eps + 1)
    )


@dataclass(frozen=True)
class SymmetricBasis:
    """Canonically ordered symmetric basis for fixed ``(N, m)``."""

    n_ions: int
    n_quanta: int
    states: tuple[SymmetricState, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[SymmetricState]:
        return iter(self.states)

    def __getitem__(self, i: int) -> SymmetricState:
        return self.states[i]

    def index(self, mu: int, eps: int) -> int:
        """Position of ``(mu, eps)``; pure arithmetic, no search."""
        m = self.n_quanta
        _check_state(self.n_ions, m, mu, eps)
        # block of eps holds m + 1 - eps states
        return eps * (m + 1) - eps * (eps - 1) // 2 + mu

    def manifold(self, eps: int) -> slice:
        """Slice of the basis covering the ``eps`` manifold."""
        start = self.index(0, eps)
        return slice(start, start + self.n_quanta + 1 - eps)

    @property
    def eps_values(self) -> np.ndarray:
        return np.array([s.eps for s in self.states])

    @property
    def mu_values(self) -> np.ndarray:
        return np.array([s.mu for s in self.states])

    def basis_vector(self, mu: int, eps: int) -> np.ndarray:
        v = np.zeros(len(self), dtype=complex)
        v[self.index(mu, eps)] = 1.0
        return v


def enumerate_basis(N: int, m: int) -> SymmetricBasis:
    _check_sizes(N, m)
    states = tuple(
        SymmetricState(mu, eps) for eps in range(m + 1) for mu in range(m + 1 - eps)
    )
    return SymmetricBasis(N, m, states)


def norm_coefficient(N: int, m: int, state: SymmetricState | tuple[int, int]) -> float:
    """Normalisation sqrt(eps! (m-mu-eps)! (N-m+mu)! / N!) of a symmetric state."""
    mu, eps = state
    _check_state(N, m, mu, eps)
    ones = m - mu - eps
    zeros = N - m + mu
    if N <= _EXACT_LIMIT:
        count = math.factorial(N) // (
            math.factorial(eps) * math.factorial(ones) * math.factorial(zeros)
        )
        return 1.0 / math.sqrt(count)
    log_count = (
        math.lgamma(N + 1) - math.lgamma(eps + 1) - math.lgamma(ones + 1) - math.lgamma(zeros + 1)
    )
    return math.exp(-0.5 * log_count)


def ion_digits(N: int) -> np.ndarray:
    """Array of shape ``(3**N, N)``; row ``k`` holds the ion levels of index ``k``."""
    k = np.arange(3**N)
    return (k[:, None] // 3 ** np.arange(N)[None, :]) % 3


def computational_index(levels, n_phonons: int) -> int:
    """Full-basis index for ion levels (sequence of 0/1/2) and a phonon number."""
    N = len(levels)
    return n_phonons * 3**N + sum(int(d) * 3**j for j, d in enumerate(levels))


def expand_to_computational(
    N: int, m: int, state: SymmetricState | tuple[int, int], phonon_cutoff: int
) -> np.ndarray:
    """Write a symmetric state as a vector over ``{0,1,e}^N x {0..cutoff}``."""
    mu, eps = state
    _check_state(N, m, mu, eps)
    if phonon_cutoff < mu:
        raise DomainError(f"phonon cutoff {phonon_cutoff} below phonon number {mu}")
    digits = ion_digits(N)
    n_e = (digits == LEVEL_E).sum(axis=1)
    n_1 = (digits == LEVEL_1).sum(axis=1)
    hits = np.flatnonzero((n_e == eps) & (n_1 == m - mu - eps))
    vec = np.zeros(3**N * (phonon_cutoff + 1), dtype=complex)
    vec[mu * 3**N + hits] = norm_coefficient(N, m, (mu, eps))
    return vec
