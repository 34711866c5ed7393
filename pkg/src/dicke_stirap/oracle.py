"""Brute-force reference simulator over the full ion x phonon Hilbert space.

Exists to validate the symmetric reduction and the phase bookkeeping, so it
refuses anything larger than 6 ions or 6 phonon levels.  Two pictures are
available:

``"lab"``
    explicit laser phases ``phi_j`` and ``exp(+-i delta t)`` factors on every
    coupling; decay enters as ``-i gamma`` on each ``|e><e|``.
``"transformed"``
    the phase-free equal-coupling form with ``delta - i gamma`` on ``|e><e|``.

The two are related by the diagonal unitary from :func:`phase_transform`,
``psi_lab(t) = U(t) psi_transformed(t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, TruncationError
from .hamiltonian import DriveParams, HamiltonianSample, pulse_envelopes
from .propagator import DEFAULT_TOL, integrate, report_grid
from .symbasis import LEVEL_1, LEVEL_E, SymmetricBasis, expand_to_computational, ion_digits

Picture = Literal["lab", "transformed"]

MAX_IONS = 6
MAX_CUTOFF = 6
GUARD_TOL = 1e-8


@dataclass(eq=False)
class FullSpaceConfig:
    """Ion chain geometry, beam geometry and per-ion coupling scales.

    ``scale_a``/``scale_b`` multiply each ion's Rabi frequency (uniform by
    default); they model a non-flat beam profile.
    """

    n_ions: int
    phonon_cutoff: int
    positions: np.ndarray | None = None
    k_a: float = 0.0
    k_b: float = 0.0
    theta_a: float = 0.0
    theta_b: float = 0.0
    laser_phase_a: float = 0.0
    laser_phase_b: float = 0.0
    scale_a: np.ndarray | None = None
    scale_b: np.ndarray | None = None
    _ops: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.n_ions <= MAX_IONS:
            raise DomainError(f"oracle handles 1..{MAX_IONS} ions, got {self.n_ions}")
        if not 0 <= self.phonon_cutoff <= MAX_CUTOFF:
            raise DomainError(f"oracle handles phonon cutoff 0..{MAX_CUTOFF}, got {self.phonon_cutoff}")
        N = self.n_ions
        self.positions = np.zeros(N) if self.positions is None else np.asarray(self.positions, dtype=float)
        self.scale_a = np.ones(N) if self.scale_a is None else np.asarray(self.scale_a, dtype=float)
        self.scale_b = np.ones(N) if self.scale_b is None else np.asarray(self.scale_b, dtype=float)
        for name in ("positions", "scale_a", "scale_b"):
            if getattr(self, name).shape != (N,):
                raise DomainError(f"{name} must have one entry per ion")

    @property
    def dim(self) -> int:
        return 3**self.n_ions * (self.phonon_cutoff + 1)

    def check_quanta(self, m: int) -> None:
        if self.phonon_cutoff < m + 1:
            raise TruncationError(f"cutoff {self.phonon_cutoff} leaves no guard level above m={m} phonons")


@dataclass
class FullTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, dim)
    cfg: FullSpaceConfig
    params: DriveParams
    picture: Picture

    @property
    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.amplitudes, axis=1)

    @property
    def guard_population(self) -> np.ndarray:
        top = self.cfg.phonon_cutoff * 3**self.cfg.n_ions
        return np.sum(np.abs(self.amplitudes[:, top:]) ** 2, axis=1)


def compute_phases(cfg: FullSpaceConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-ion phases ``phi_L - x_j k cos(theta) - pi/2`` for beams a and b."""
    x = cfg.positions
    phi_a = cfg.laser_phase_a - x * cfg.k_a * np.cos(cfg.theta_a) - np.pi / 2
    phi_b = cfg.laser_phase_b - x * cfg.k_b * np.cos(cfg.theta_b) - np.pi / 2
    return phi_a, phi_b


def _embed_ion(op: sp.spmatrix, j: int, N: int, cutoff: int) -> sp.csr_matrix:
    left = sp.identity((cutoff + 1) * 3 ** (N - 1 - j), format="csr")
    right = sp.identity(3**j, format="csr")
    return sp.kron(left, sp.kron(op, right), format="csr")


def _operators(cfg: FullSpaceConfig) -> dict:
    if cfg._ops is not None:
        return cfg._ops
    N, c = cfg.n_ions, cfg.phonon_cutoff
    s_e0 = sp.csr_matrix(([1.0], ([LEVEL_E], [0])), shape=(3, 3))
    s_e1 = sp.csr_matrix(([1.0], ([LEVEL_E], [LEVEL_1])), shape=(3, 3))
    annih = sp.diags(np.sqrt(np.arange(1, c + 1)), 1, shape=(c + 1, c + 1), format="csr")
    a_full = sp.kron(annih, sp.identity(3**N), format="csr")
    phi_a, phi_b = compute_phases(cfg)

    ka_lab = sp.csr_matrix((cfg.dim, cfg.dim), dtype=complex)
    kb_lab = sp.csr_matrix((cfg.dim, cfg.dim), dtype=complex)
    ka = sp.csr_matrix((cfg.dim, cfg.dim))
    kb = sp.csr_matrix((cfg.dim, cfg.dim))
    for j in range(N):
        up_a = a_full @ _embed_ion(s_e0, j, N, c)  # a |e><0|_j
        up_b = _embed_ion(s_e1, j, N, c)  # |e><1|_j
        ka = ka + cfg.scale_a[j] * up_a
        kb = kb + cfg.scale_b[j] * up_b
        ka_lab = ka_lab + cfg.scale_a[j] * np.exp(-1j * phi_a[j]) * up_a
        kb_lab = kb_lab + cfg.scale_b[j] * np.exp(-1j * phi_b[j]) * up_b

    digits = ion_digits(N)
    n_e = np.tile((digits == LEVEL_E).sum(axis=1), c + 1).astype(float)
    excitations = np.repeat(np.arange(c + 1), 3**N) + np.tile((digits != 0).sum(axis=1), c + 1)
    cfg._ops = {
        "ka": (0.5 * ka).tocsr(),
        "kb": (0.5 * kb).tocsr(),
        "ka_lab": (0.5 * ka_lab).tocsr(),
        "kb_lab": (0.5 * kb_lab).tocsr(),
        "n_e": n_e,
        "excitations": excitations.astype(float),
    }
    return cfg._ops


def _lab_apply(cfg: FullSpaceConfig, p: DriveParams):
    ops = _operators(cfg)
    ka, kb = ops["ka_lab"], ops["kb_lab"]
    ka_h, kb_h = ka.conj().T.tocsr(), kb.conj().T.tocsr()
    decay = -1j * p.gamma * ops["n_e"]

    def apply_h(t, y):
        omega_a, omega_b = pulse_envelopes(t, p)
        rot = np.exp(1j * p.delta * t)
        return (
            omega_a * (rot * (ka @ y) + rot.conjugate() * (ka_h @ y))
            + omega_b * (rot * (kb @ y) + rot.conjugate() * (kb_h @ y))
            + decay * y
        )

    return apply_h


def _transformed_apply(cfg: FullSpaceConfig, p: DriveParams):
    ops = _operators(cfg)
    ha = (ops["ka"] + ops["ka"].T).tocsr()
    hb = (ops["kb"] + ops["kb"].T).tocsr()
    diag = p.delta_tilde * ops["n_e"]

    def apply_h(t, y):
        omega_a, omega_b = pulse_envelopes(t, p)
        return omega_a * (ha @ y) + omega_b * (hb @ y) + diag * y

    return apply_h


def build_full_hamiltonian(
    cfg: FullSpaceConfig,
    t: float,
    p: DriveParams,
    picture: Picture = "transformed",
    n_quanta: int | None = None,
) -> HamiltonianSample:
    """Dense full-space Hamiltonian at time ``t`` (small systems only)."""
    if n_quanta is not None:
        cfg.check_quanta(n_quanta)
    apply_h = _lab_apply(cfg, p) if picture == "lab" else _transformed_apply(cfg, p)
    H = apply_h(t, np.eye(cfg.dim, dtype=complex))
    return HamiltonianSample("computational", float(t), np.asarray(H), cfg.n_ions, n_quanta, p)


def phase_transform(cfg: FullSpaceConfig, t: float, delta: float) -> sp.dia_matrix:
    """Diagonal unitary ``U(t)`` taking transformed-picture states to the lab picture."""
    phi_a, phi_b = compute_phases(cfg)
    digits = ion_digits(cfg.n_ions)
    phase = np.zeros(len(digits))
    for j in range(cfg.n_ions):
        phase += np.where(digits[:, j] == LEVEL_E, delta * t - phi_a[j], 0.0)
        phase += np.where(digits[:, j] == LEVEL_1, phi_b[j] - phi_a[j], 0.0)
    diag = np.tile(np.exp(1j * phase), cfg.phonon_cutoff + 1)
    return sp.diags(diag, format="dia")


def propagate_full(
    cfg: FullSpaceConfig,
    initial: np.ndarray,
    p: DriveParams,
    picture: Picture = "transformed",
    window: tuple[float, float] | None = None,
    tol: float = DEFAULT_TOL,
    n_report: int = 201,
    n_quanta: int | None = None,
) -> FullTrajectory:
    if n_quanta is not None:
        cfg.check_quanta(n_quanta)
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (cfg.dim,):
        raise DomainError(f"initial vector has shape {psi0.shape}, full space has dimension {cfg.dim}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise DomainError("initial vector must have unit norm")
    if window is None:
        window = p.default_window()
    apply_h = _lab_apply(cfg, p) if picture == "lab" else _transformed_apply(cfg, p)
    times = report_grid(window, n_report)
    traj = FullTrajectory(times, integrate(apply_h, psi0, window, times, tol), cfg, p, picture)
    guard = float(traj.guard_population.max())
    if guard > GUARD_TOL:
        raise TruncationError(f"top phonon level reached population {guard:.3g}")
    return traj


def symmetric_states_matrix(basis: SymmetricBasis, phonon_cutoff: int) -> np.ndarray:
    """Columns are the symmetric states expanded into the full basis."""
    return np.stack(
        [expand_to_computational(basis.n_ions, basis.n_quanta, s, phonon_cutoff) for s in basis], axis=1
    )


def symmetric_to_full(coeffs: np.ndarray, basis: SymmetricBasis, phonon_cutoff: int) -> np.ndarray:
    return symmetric_states_matrix(basis, phonon_cutoff) @ np.asarray(coeffs, dtype=complex)


def project_to_symmetric(full: np.ndarray, basis: SymmetricBasis, phonon_cutoff: int) -> tuple[np.ndarray, float]:
    """Overlaps with the symmetric states and the norm of what is left over."""
    V = symmetric_states_matrix(basis, phonon_cutoff)
    full = np.asarray(full, dtype=complex)
    coeffs = V.conj().T @ full
    residual = float(np.linalg.norm(full - V @ coeffs))
    return coeffs, residual


def excitation_expectation(traj: FullTrajectory) -> np.ndarray:
    """``<N_exc>`` per time, normalised by the (possibly decayed) norm."""
    n_exc = _operators(traj.cfg)["excitations"]
    pops = np.abs(traj.amplitudes) ** 2
    return pops @ n_exc / np.maximum(pops.sum(axis=1), np.finfo(float).tiny)


def check_excitation_conservation(traj: FullTrajectory) -> float:
    """Largest drift of the excitation number from its initial value."""
    n = excitation_expectation(traj)
    return float(np.max(np.abs(n - n[0])))


def ion_swap_permutation(cfg: FullSpaceConfig, i: int, j: int) -> np.ndarray:
    """Index map of the full basis induced by exchanging ions ``i`` and ``j``."""
    N = cfg.n_ions
    digits = ion_digits(N)
    swapped = digits.copy()
    swapped[:, [i, j]] = digits[:, [j, i]]
    ion_idx = swapped @ (3 ** np.arange(N))
    return np.concatenate([n * 3**N + ion_idx for n in range(cfg.phonon_cutoff + 1)])


def dicke_phase_pattern(cfg: FullSpaceConfig, m: int) -> dict[int, float]:
    """Expected lab-picture phase of each zero-phonon Dicke component.

    A string with ions ``S`` in ``|1>`` picks up ``sum_{j in S} (phi_b_j - phi_a_j)``.
    """
    phi_a, phi_b = compute_phases(cfg)
    digits = ion_digits(cfg.n_ions)
    out = {}
    for k in np.flatnonzero(((digits == LEVEL_1).sum(axis=1) == m) & ((digits == LEVEL_E).sum(axis=1) == 0)):
        ones = digits[k] == LEVEL_1
        out[int(k)] = float(np.sum(phi_b[ones] - phi_a[ones]))
    return out


def reduction_deviation(
    N: int, m: int, p: DriveParams, coeffs: np.ndarray, tol: float = DEFAULT_TOL, n_report: int = 41
) -> dict:
    """Run the same symmetric initial state reduced and in full; compare on the report grid."""
    from .propagator import propagate
    from .symbasis import enumerate_basis

    basis = enumerate_basis(N, m)
    cfg = FullSpaceConfig(N, m + 1)
    full = propagate_full(cfg, symmetric_to_full(coeffs, basis, m + 1), p, tol=tol, n_report=n_report, n_quanta=m)
    reduced = propagate(coeffs, N, m, p, tol=tol, n_report=n_report)
    V = symmetric_states_matrix(basis, m + 1)
    proj = full.amplitudes @ V.conj()
    leftover = np.linalg.norm(full.amplitudes - proj @ V.T, axis=1)
    return {
        "max_amplitude_deviation": float(np.max(np.abs(proj - reduced.amplitudes))),
        "max_outside_symmetric": float(leftover.max()),
        "excitation_drift": check_excitation_conservation(full),
        "max_guard_population": float(full.guard_population.max()),
    }


def picture_deviation(cfg: FullSpaceConfig, p: DriveParams, psi0: np.ndarray, tol: float = 1e-12) -> float:
    """Largest ``|psi_lab(t) - U(t) psi_transformed(t)|`` over the report grid."""
    window = p.default_window()
    U0 = phase_transform(cfg, window[0], p.delta)
    transformed = propagate_full(cfg, psi0, p, "transformed", window, tol, n_report=41)
    lab = propagate_full(cfg, U0 @ psi0, p, "lab", window, tol, n_report=41)
    dev = 0.0
    for t, a, b in zip(transformed.times, transformed.amplitudes, lab.amplitudes):
        dev = max(dev, float(np.max(np.abs(phase_transform(cfg, t, p.delta) @ a - b))))
    return dev


def final_phase_error(cfg: FullSpaceConfig, m: int, p: DriveParams, tol: float = 1e-11) -> dict:
    """Lab-picture Fock -> Dicke run: do the Dicke components carry the predicted phases?

    Each component's lab phase minus the transformed-picture phase should equal
    ``sum_{j in S} (phi_b_j - phi_a_j)``.
    """
    N = cfg.n_ions
    cfg.check_quanta(m)
    psi0 = np.zeros(cfg.dim, dtype=complex)
    psi0[m * 3**N] = 1.0  # |0..0>|m>, untouched by U
    window = p.default_window()
    lab = propagate_full(cfg, psi0, p, "lab", window, tol, n_report=2, n_quanta=m).amplitudes[-1]
    ref = propagate_full(cfg, psi0, p, "transformed", window, tol, n_report=2, n_quanta=m).amplitudes[-1]
    worst = 0.0
    for k, expected in dicke_phase_pattern(cfg, m).items():
        got = np.angle(lab[k] / ref[k])
        worst = max(worst, abs(np.angle(np.exp(1j * (got - expected)))))
    weight = float(sum(abs(lab[k]) ** 2 for k in dicke_phase_pattern(cfg, m)))
    return {"max_phase_error": worst, "dicke_population": weight}


def beam_profile_scales(positions, variation: float) -> np.ndarray:
    """Rabi-frequency scale per ion under a Gaussian intensity profile.

    The profile is centred on the chain with peak intensity 1 and intensity
    ``1 - variation`` at the outermost ion; Rabi frequency goes as sqrt(intensity).
    """
    x = np.asarray(positions, dtype=float)
    if not 0 <= variation < 1:
        raise DomainError(f"intensity variation must lie in [0, 1), got {variation}")
    edge = np.max(np.abs(x - x.mean()))
    if variation == 0 or edge == 0:
        return np.ones_like(x)
    # I(x) = exp(-2 x^2 / w^2) with I(edge) = 1 - variation
    w2 = -2.0 * edge**2 / np.log(1.0 - variation)
    intensity = np.exp(-2.0 * (x - x.mean()) ** 2 / w2)
    return np.sqrt(intensity)


def profile_fidelity(
    N: int, m: int, p: DriveParams, variation: float, positions=None, tol: float = DEFAULT_TOL
) -> dict:
    """Fock -> Dicke transfer with per-ion Rabi frequencies set by a beam profile."""
    from .symbasis import enumerate_basis

    if positions is None:
        positions = np.linspace(-1.0, 1.0, N) if N > 1 else np.zeros(1)
    scales = beam_profile_scales(positions, variation)
    cfg = FullSpaceConfig(N, m + 1, positions=np.zeros(N), scale_a=scales, scale_b=scales)
    psi0 = np.zeros(cfg.dim, dtype=complex)
    psi0[m * 3**N] = 1.0
    final = propagate_full(cfg, psi0, p, tol=tol, n_report=2, n_quanta=m).amplitudes[-1]
    target = expand_to_computational(N, m, (0, 0), m + 1)
    dark = float(np.sum(np.abs(final[np.flatnonzero(_operators(cfg)["n_e"] == 0)]) ** 2))
    return {
        "variation": variation,
        "scales": scales.tolist(),
        "fidelity": float(abs(np.vdot(target, final)) ** 2),
        "dark_retention": dark,
    }
