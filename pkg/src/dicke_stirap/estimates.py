"""Back-of-envelope calculators for experimental planning.

All rates are angular frequencies in rad/s and times in seconds unless a
function says otherwise.  The transfer-efficiency formula assumes decay from
``|e>`` back into the computational states; read it as an optimistic bound
next to a simulated fidelity, never instead of one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

TWO_PI = 2.0 * math.pi
SIDEBAND_FRACTION = 0.1  # keep omega0 below trap_freq / 10


@dataclass(frozen=True)
class PhysicalParams:
    gamma_phys: float
    omega0_phys: float
    trap_freq: float
    heating_rate: float
    n_ions: int
    stage_time_factor: float = 6.0

    def __post_init__(self):
        for name in ("gamma_phys", "omega0_phys", "trap_freq"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.heating_rate < 0 or self.n_ions < 0 or self.stage_time_factor < 0:
            raise DomainError("heating rate, ion count and stage time factor must be non-negative")

    @property
    def exceeds_sideband_limit(self) -> bool:
        return self.omega0_phys > SIDEBAND_FRACTION * self.trap_freq


def transfer_efficiency(omega0: float, T: float, gamma: float) -> float:
    """``1 - exp(-sqrt(pi/2) omega0^2 T / gamma)``; tends to 1 as gamma -> 0."""
    if omega0 < 0 or T < 0 or gamma < 0:
        raise DomainError("inputs must be non-negative")
    if gamma == 0:
        return 1.0
    return -math.expm1(-math.sqrt(math.pi / 2) * omega0**2 * T / gamma)


def min_pulse_time(gamma: float, omega0: float, infidelity_x: float) -> float:
    """Shortest pulse width reaching transfer efficiency ``1 - x``."""
    if not 0 < infidelity_x < 1:
        raise DomainError(f"target infidelity must lie in (0, 1), got {infidelity_x}")
    if gamma < 0 or not omega0 > 0:
        raise DomainError("need gamma >= 0 and omega0 > 0")
    return math.sqrt(2 / math.pi) * gamma * math.log(1 / infidelity_x) / omega0**2


def heating_events(n_ions: float, heating_rate: float, total_time: float) -> tuple[float, float]:
    """Expected heating events and the fidelity ``1 - events`` clamped to [0, 1]."""
    if n_ions < 0 or heating_rate < 0 or total_time < 0:
        raise DomainError("inputs must be non-negative")
    events = n_ions * heating_rate * total_time
    return events, min(1.0, max(0.0, 1.0 - events))


def sideband_warning(omega0: float, trap_freq: float) -> str | None:
    if omega0 > SIDEBAND_FRACTION * trap_freq:
        return (
            f"omega0 = {omega0 / trap_freq:.3g} x trap frequency exceeds the conservative limit "
            f"{SIDEBAND_FRACTION:g}; off-resonant sideband excitation is not modelled"
        )
    return None


def estimate_report(params: PhysicalParams, infidelity_x: float = 0.01) -> dict:
    """Minimum pulse width, protocol duration, heating count and combined outlook."""
    T = min_pulse_time(params.gamma_phys, params.omega0_phys, infidelity_x)
    total = params.stage_time_factor * T
    events, heating_fidelity = heating_events(params.n_ions, params.heating_rate, total)
    efficiency = transfer_efficiency(params.omega0_phys, T, params.gamma_phys)
    return {
        "min_pulse_time_s": T,
        "total_time_s": total,
        "transfer_efficiency_bound": efficiency,
        "heating_events": events,
        "heating_fidelity": heating_fidelity,
        "omega0_T": params.omega0_phys * T,
        "gamma_T": params.gamma_phys * T,
        "warning": sideband_warning(params.omega0_phys, params.trap_freq),
    }
