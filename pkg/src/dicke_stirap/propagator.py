"""Time evolution in the symmetric basis, fidelities and the two-stage protocol.

Solves ``i d psi/dt = H(t) psi`` with an adaptive embedded Runge-Kutta
stepper (scipy's DOP853) and reports on a uniform grid via dense output.
With ``gamma > 0`` the Hamiltonian is non-Hermitian and lost norm is lost
population; fidelities are never renormalised unless asked for.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .darkstate import DarkVector, dark_matrix, dark_trajectory
from .errors import AccuracyError, DomainError, StiffnessError
from .hamiltonian import DriveParams, pulse_envelopes, symmetric_generators
from .symbasis import SymmetricBasis, enumerate_basis, norm_coefficient

DEFAULT_TOL = 1e-10
DEFAULT_REPORT = 401


def integrate(
    apply_h: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    window: tuple[float, float],
    t_eval: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Integrate ``i dy/dt = H(t) y`` given ``apply_h(t, y) = H(t) @ y``.

    Returns the solution sampled at ``t_eval`` with shape ``(len(t_eval), dim)``.
    Any matrix representation works; only the product is needed.
    """

    def rhs(t, y):
        return -1j * apply_h(t, y)

    sol = solve_ivp(
        rhs,
        window,
        np.asarray(y0, dtype=complex),
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol,
    )
    if sol.status != 0:
        if "step size" in sol.message.lower():
            raise StiffnessError(sol.message)
        raise AccuracyError(sol.message)
    if not np.all(np.isfinite(sol.y)):
        raise AccuracyError("non-finite amplitudes in solution")
    return sol.y.T


@dataclass
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, dim)
    basis: SymmetricBasis
    params: DriveParams
    tol: float
    norm: np.ndarray = field(init=False)
    manifold_pops: np.ndarray = field(init=False)
    fidelity_vs_target: np.ndarray | None = None

    def __post_init__(self):
        self.norm = np.linalg.norm(self.amplitudes, axis=1)
        self.manifold_pops = manifold_populations(self)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.amplitudes[-1]

    @property
    def dark_retention(self) -> float:
        return float(self.manifold_pops[-1, 0])


@dataclass
class PreparationResult:
    stage1: Trajectory
    stage2: Trajectory
    final_fidelity: float
    dark_retention: float
    stage1_fidelity: float
    stage2_fidelity: float


def _symmetric_apply(basis: SymmetricBasis, p: DriveParams):
    A, B, D = symmetric_generators(basis)
    diag = p.delta_tilde * D

    def apply_h(t, y):
        omega_a, omega_b = pulse_envelopes(t, p)
        return omega_a * (A @ y) + omega_b * (B @ y) + diag * y

    return apply_h


def report_grid(window: tuple[float, float], n_report: int) -> np.ndarray:
    return np.linspace(window[0], window[1], n_report)


def propagate(
    initial: np.ndarray,
    N: int,
    m: int,
    p: DriveParams,
    window: tuple[float, float] | None = None,
    tol: float = DEFAULT_TOL,
    n_report: int = DEFAULT_REPORT,
    target: np.ndarray | None = None,
) -> Trajectory:
    basis = enumerate_basis(N, m)
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (len(basis),):
        raise DomainError(f"initial vector has shape {psi0.shape}, basis has {len(basis)} states")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise DomainError("initial vector must have unit norm")
    if window is None:
        window = p.default_window()
    times = report_grid(window, n_report)
    amps = integrate(_symmetric_apply(basis, p), psi0, window, times, tol)
    traj = Trajectory(times, amps, basis, p, tol)
    if target is not None:
        traj.fidelity_vs_target = fidelity(traj, target)
    return traj


def _check_target(traj: Trajectory, target: np.ndarray) -> np.ndarray:
    target = np.asarray(target, dtype=complex)
    if target.shape != (traj.amplitudes.shape[1],):
        raise DomainError("target vector does not live in the trajectory's basis")
    if abs(np.linalg.norm(target) - 1.0) > 1e-8:
        raise DomainError("target vector must have unit norm")
    return target


def fidelity(traj: Trajectory, target: np.ndarray) -> np.ndarray:
    """``|<target|psi(t)>|^2`` without renormalising the decayed state."""
    target = _check_target(traj, target)
    return np.abs(traj.amplitudes @ target.conj()) ** 2


def renormalized_fidelity(traj: Trajectory, target: np.ndarray) -> np.ndarray:
    """Diagnostic only: overlap of the renormalised state."""
    return fidelity(traj, target) / np.maximum(traj.norm, np.finfo(float).tiny) ** 2


def manifold_populations(traj: Trajectory) -> np.ndarray:
    """Population in each ``eps`` manifold, shape ``(n_times, m + 1)``."""
    pops = np.abs(traj.amplitudes) ** 2
    basis = traj.basis
    return np.stack([pops[:, basis.manifold(e)].sum(axis=1) for e in range(basis.n_quanta + 1)], axis=1)


def state_populations(traj: Trajectory) -> np.ndarray:
    """Population of each symmetric state ``(mu, eps)``, basis order."""
    return np.abs(traj.amplitudes) ** 2


def representative_populations(traj: Trajectory) -> np.ndarray:
    """Population of a single computational string inside each symmetric state.

    Every permutation in ``(mu, eps)`` carries the same share, the squared
    normalisation coefficient of that state.
    """
    b = traj.basis
    weights = np.array([norm_coefficient(b.n_ions, b.n_quanta, s) ** 2 for s in b])
    return state_populations(traj) * weights


def dark_overlap(traj: Trajectory, dark_ref: Sequence[DarkVector] | None = None) -> np.ndarray:
    """Complex amplitude ``<phi0(t)|psi(t)>`` on the report grid."""
    b = traj.basis
    if dark_ref is None:
        dark_ref = dark_trajectory(b.n_ions, b.n_quanta, traj.params, traj.times)
    c = dark_matrix(dark_ref) if not isinstance(dark_ref, np.ndarray) else dark_ref
    if c.shape[0] != len(traj.times):
        raise DomainError("dark reference and trajectory grids are not aligned")
    return np.einsum("tk,tk->t", c.conj(), traj.amplitudes[:, b.manifold(0)])


def adiabatic_projection(traj: Trajectory, dark_ref: Sequence[DarkVector] | None = None) -> np.ndarray:
    """Instantaneous dark-state occupation ``|<phi0(t)|psi(t)>|^2``."""
    return np.abs(dark_overlap(traj, dark_ref)) ** 2


def transfer(
    N: int,
    m: int,
    p: DriveParams,
    initial: tuple[int, int],
    target: tuple[int, int],
    tol: float = DEFAULT_TOL,
    window: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Final fidelity and ``eps = 0`` retention for a basis-state to basis-state run."""
    basis = enumerate_basis(N, m)
    if window is None:
        window = p.default_window()
    psi = integrate(_symmetric_apply(basis, p), basis.basis_vector(*initial), window, np.array([window[1]]), tol)[-1]
    fid = abs(psi[basis.index(*target)]) ** 2
    retention = float(np.sum(np.abs(psi[basis.manifold(0)]) ** 2))
    return float(fid), retention


def default_endpoints(m: int, p: DriveParams) -> tuple[tuple[int, int], tuple[int, int]]:
    """Initial and target symmetric states implied by the pulse order.

    Reverse STIRAP carries the Fock state ``|0..0>|m>`` to ``|W_m^N>|0>``;
    forward STIRAP runs the other way.
    """
    fock, dicke = (m, 0), (0, 0)
    return (fock, dicke) if p.tau < 0 else (dicke, fock)


def prepare_dicke(
    N: int,
    m: int,
    p_forward: DriveParams,
    p_reverse: DriveParams,
    tol: float = DEFAULT_TOL,
    n_report: int = DEFAULT_REPORT,
) -> PreparationResult:
    """Two-stage preparation of ``|W_m^N>|0>``.

    Stage 1 addresses only the ``m`` ions in ``|1>`` (an ``N = m`` problem)
    and maps ``|1..1>|0>`` to the Fock state ``|0..0>|m>`` by forward STIRAP.
    Stage 2 addresses all ``N`` ions and maps the Fock state to the Dicke
    state by reverse STIRAP.  Stage 2 starts from the exact Fock state and
    its result is weighted by the stage-1 Fock population; leftover stage-1
    amplitude is not symmetric over ``N`` ions and is discarded.
    """
    if not 1 <= m <= N:
        raise DomainError(f"need 1 <= m <= N, got N={N}, m={m}")
    if p_forward.tau <= 0 or p_reverse.tau >= 0:
        raise DomainError("stage 1 needs tau > 0 and stage 2 needs tau < 0")

    b1 = enumerate_basis(m, m)
    stage1 = propagate(
        b1.basis_vector(0, 0), m, m, p_forward, tol=tol, n_report=n_report, target=b1.basis_vector(m, 0)
    )
    f1 = float(stage1.fidelity_vs_target[-1])

    b2 = enumerate_basis(N, m)
    stage2 = propagate(
        b2.basis_vector(m, 0), N, m, p_reverse, tol=tol, n_report=n_report, target=b2.basis_vector(0, 0)
    )
    f2 = float(stage2.fidelity_vs_target[-1])
    return PreparationResult(
        stage1=stage1,
        stage2=stage2,
        final_fidelity=f1 * f2,
        dark_retention=f1 * stage2.dark_retention,
        stage1_fidelity=f1,
        stage2_fidelity=f2,
    )
