"""Sum-rate, power accounting and energy-efficiency figures."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError

__all__ = [
    "Method",
    "AllocationResult",
    "PowerModel",
    "gain_matrix",
    "sum_rate_from_gains",
    "sum_rate_subcarrier",
    "overall_rate",
    "transmit_power_check",
    "energy_efficiency",
    "hybrid_power_model",
    "digital_power_model",
]


class Method(str, enum.Enum):
    GA = "GA"
    EQ = "EQ"
    PSO = "PSO"


@dataclass
class AllocationResult:
    """Powers (K x C, watts) and the rates they achieve, in bps/Hz."""

    powers: np.ndarray
    per_subcarrier_rate: np.ndarray
    total_rate: float
    method_tag: Method


@dataclass(frozen=True)
class PowerModel:
    p_rf_watts: float
    p_ps_watts: float
    n_rf: int
    n_ps: int

    def __post_init__(self):
        if min(self.p_rf_watts, self.p_ps_watts, self.n_rf, self.n_ps) < 0:
            raise InvalidConfigError("power model entries must be non-negative")

    @property
    def hardware_watts(self) -> float:
        return self.n_rf * self.p_rf_watts + self.n_ps * self.p_ps_watts


def hybrid_power_model(n_rf: int, n_antennas: int, p_rf: float = 0.25, p_ps: float = 1e-3) -> PowerModel:
    """Hybrid architecture: one phase shifter per (RF chain, antenna) pair."""
    return PowerModel(p_rf, p_ps, n_rf, n_rf * n_antennas)


def digital_power_model(n_antennas: int, p_rf: float = 0.25, p_ps: float = 1e-3) -> PowerModel:
    """Fully digital architecture: an RF chain per antenna, no phase shifters."""
    return PowerModel(p_rf, p_ps, n_antennas, 0)


def gain_matrix(eff: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``G[k, t] = |eff_k b_t|^2``; leading batch dimensions are kept."""
    return np.abs(eff @ b) ** 2


def sum_rate_from_gains(gains: np.ndarray, powers: np.ndarray, sigma2: float) -> np.ndarray:
    """Sum-rate for one or many power vectors over a fixed gain matrix.

    ``powers`` has shape (K,) or (n, K); the result drops the last axis.
    """
    powers = np.asarray(powers, dtype=float)
    desired = powers * np.diagonal(gains)
    interference = powers @ gains.T - desired
    sinr = desired / (np.maximum(interference, 0.0) + sigma2)
    return np.log2(1.0 + sinr).sum(axis=-1)


def sum_rate_subcarrier(eff: np.ndarray, b: np.ndarray, powers_i, sigma2: float) -> float:
    """Sum over users of log2(1 + SINR) at one subcarrier."""
    powers_i = np.asarray(powers_i, dtype=float)
    if np.any(powers_i < 0):
        raise InvalidInputError("powers must be non-negative")
    if not sigma2 > 0:
        raise InvalidInputError(f"noise variance must be positive, got {sigma2}")
    return float(sum_rate_from_gains(gain_matrix(eff, b), powers_i, sigma2))


def overall_rate(per_subcarrier) -> tuple[float, float]:
    """Total rate over subcarriers and its per-subcarrier average."""
    rates = np.asarray(per_subcarrier, dtype=float)
    if rates.size == 0:
        raise InvalidInputError("no subcarrier rates given")
    total = float(rates.sum())
    return total, total / rates.size


def transmit_power_check(b: np.ndarray, powers_i, f_unitary: bool = True, f: np.ndarray | None = None) -> float:
    """Radiated power ``sum_k p_k ||F b_k||^2``.

    With a unitary ``F`` this equals ``sum_k p_k ||b_k||^2``, which is what
    is computed unless ``f_unitary`` is False (then ``f`` is required).
    """
    b = np.asarray(b)
    if not f_unitary:
        if f is None:
            raise InvalidInputError("the RF matrix is required when it is not unitary")
        b = np.asarray(f) @ b
    col_norms = np.sum(np.abs(b) ** 2, axis=0)
    return float(np.dot(np.asarray(powers_i, dtype=float), col_norms))


def energy_efficiency(total_rate: float, p_t_watts: float, model: PowerModel) -> float:
    """Rate per consumed watt (bps/Hz/W), counting transmit and hardware power."""
    denominator = p_t_watts + model.hardware_watts
    if not denominator > 0:
        raise InvalidConfigError("total consumed power must be positive")
    return total_rate / denominator
