"""Experiment configuration and random network realizations.

Angles are configured in degrees and converted to radians only when the
path parameters are drawn. Defaults reproduce the 3D microcell setup used
throughout the package: a 16x16 URA serving three user groups.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError
from .optimizer import GaConfig, PsoConfig

__all__ = [
    "ArrayGeometry",
    "GroupSpec",
    "ScenarioConfig",
    "UserPathSet",
    "noise_variance",
    "dbm_to_watts",
    "draw_realization",
    "default_groups",
    "load_config",
    "save_config",
]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_variance(noise_psd_dbm_hz: float, bandwidth_hz: float) -> float:
    """Thermal noise power in watts over ``bandwidth_hz``."""
    if not bandwidth_hz > 0:
        raise InvalidConfigError(f"bandwidth must be positive, got {bandwidth_hz}")
    return 10.0 ** ((noise_psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) - 30.0) / 10.0)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular array with ``m_x * m_y`` elements.

    ``spacing_d`` is the element spacing in wavelengths.
    """

    m_x: int = 16
    m_y: int = 16
    spacing_d: float = 0.5

    def __post_init__(self):
        if self.m_x < 1 or self.m_y < 1:
            raise InvalidConfigError(f"array dimensions must be >= 1, got {self.m_x}x{self.m_y}")
        if not self.spacing_d > 0:
            raise InvalidConfigError(f"antenna spacing must be positive, got {self.spacing_d}")

    @property
    def n_antennas(self) -> int:
        return self.m_x * self.m_y


@dataclass(frozen=True)
class GroupSpec:
    """AoD support and population of one user group (angles in degrees)."""

    mean_eaod_deg: float
    mean_aaod_deg: float
    eaod_spread_deg: float
    aaod_spread_deg: float
    users: int

    def __post_init__(self):
        if not 0.0 < self.mean_eaod_deg < 180.0:
            raise InvalidConfigError(f"mean EAoD must lie in (0, 180), got {self.mean_eaod_deg}")
        if self.eaod_spread_deg < 0 or self.aaod_spread_deg < 0:
            raise InvalidConfigError("angle spreads must be non-negative")
        if self.users < 1:
            raise InvalidConfigError(f"a group needs at least one user, got {self.users}")


def default_groups(n_users: int = 15, n_groups: int = 3) -> list[GroupSpec]:
    """Groups at EAoD 60 deg and AAoD 21 + 120(g-1) deg with 15/11 deg spreads.

    Users are split as evenly as possible; any remainder goes to the
    leading groups.
    """
    if n_users < n_groups:
        raise InvalidConfigError(f"need at least one user per group ({n_users} < {n_groups})")
    base, extra = divmod(n_users, n_groups)
    return [
        GroupSpec(60.0, 21.0 + 120.0 * g, 15.0, 11.0, base + (1 if g < extra else 0))
        for g in range(n_groups)
    ]


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    groups: tuple[GroupSpec, ...] = field(default_factory=lambda: tuple(default_groups()))
    subcarriers: int = 16
    paths: int = 10
    path_loss_exponent: float = 3.76
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 1e4
    total_power_dbm: float = 40.0
    bs_height_m: float = 10.0
    user_height_range_m: tuple[float, float] = (1.5, 2.5)
    horizontal_distance_range_m: tuple[float, float] = (10.0, 90.0)
    rf_chains_per_group: int = 12
    rf_chain_power_w: float = 0.25
    phase_shifter_power_w: float = 1e-3
    ga: GaConfig = field(default_factory=GaConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "user_height_range_m", tuple(self.user_height_range_m))
        object.__setattr__(
            self, "horizontal_distance_range_m", tuple(self.horizontal_distance_range_m)
        )
        if not self.groups:
            raise InvalidConfigError("at least one user group is required")
        if self.subcarriers < 1:
            raise InvalidConfigError(f"subcarriers must be >= 1, got {self.subcarriers}")
        if self.paths < 1:
            raise InvalidConfigError(f"paths must be >= 1, got {self.paths}")
        if self.rf_chains_per_group < 1:
            raise InvalidConfigError("rf_chains_per_group must be >= 1")
        if self.n_rf > self.geometry.n_antennas:
            raise InvalidConfigError(
                f"{self.n_rf} RF chains exceed {self.geometry.n_antennas} antennas"
            )
        for name in ("user_height_range_m", "horizontal_distance_range_m"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidConfigError(f"{name} is degenerate: {lo} > {hi}")
        lo, hi = self.horizontal_distance_range_m
        if lo < 0:
            raise InvalidConfigError("horizontal distances must be non-negative")
        if self.rf_chain_power_w < 0 or self.phase_shifter_power_w < 0:
            raise InvalidConfigError("hardware power figures must be non-negative")
        # a zero 3D distance makes the path loss infinite
        h_lo, h_hi = self.user_height_range_m
        if lo == 0 and h_lo <= self.bs_height_m <= h_hi:
            raise InvalidConfigError("geometry admits a zero BS-user distance")
        noise_variance(self.noise_psd_dbm_hz, self.bandwidth_hz)

    @property
    def n_users(self) -> int:
        return sum(g.users for g in self.groups)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_rf(self) -> int:
        return self.rf_chains_per_group * len(self.groups)

    @property
    def total_power_w(self) -> float:
        return dbm_to_watts(self.total_power_dbm)

    @property
    def sigma2(self) -> float:
        return noise_variance(self.noise_psd_dbm_hz, self.bandwidth_hz)

    def with_users(self, n_users: int) -> ScenarioConfig:
        """Same scenario with ``n_users`` spread over the existing groups."""
        counts = [g.users for g in default_groups(n_users, self.n_groups)]
        return replace(self, groups=tuple(replace(g, users=n) for g, n in zip(self.groups, counts)))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown config fields: {sorted(unknown)}")
        if "geometry" in data:
            data["geometry"] = ArrayGeometry(**data["geometry"])
        if "groups" in data:
            data["groups"] = tuple(GroupSpec(**g) for g in data["groups"])
        if "ga" in data:
            data["ga"] = GaConfig(**data["ga"])
        if "pso" in data:
            data["pso"] = PsoConfig(**data["pso"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a JSON scenario file; omitted fields keep their defaults."""
    with open(path, encoding="utf-8") as fh:
        return ScenarioConfig.from_dict(json.load(fh))


def save_config(config: ScenarioConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass
class UserPathSet:
    """Path parameters of one user, shared by all subcarriers.

    Angle arrays are in degrees, ``gains`` are the small-scale complex
    coefficients (without path loss) and ``distances_m`` the per-path
    propagation distances.
    """

    group_index: int
    eaod_deg: np.ndarray
    aaod_deg: np.ndarray
    gains: np.ndarray
    distances_m: np.ndarray

    @property
    def gamma_x(self) -> np.ndarray:
        return np.sin(np.deg2rad(self.eaod_deg)) * np.cos(np.deg2rad(self.aaod_deg))

    @property
    def gamma_y(self) -> np.ndarray:
        return np.sin(np.deg2rad(self.eaod_deg)) * np.sin(np.deg2rad(self.aaod_deg))


def draw_realization(config: ScenarioConfig, rng: np.random.Generator) -> list[UserPathSet]:
    """Draw the path parameters of every user, ordered group by group.

    Per user the draw order is: horizontal distance, height, L elevation
    angles, L azimuth angles, L real and L imaginary gain parts.
    """
    n_paths = config.paths
    users = []
    for g, group in enumerate(config.groups):
        for _ in range(group.users):
            horizontal = rng.uniform(*config.horizontal_distance_range_m)
            height = rng.uniform(*config.user_height_range_m)
            distance = math.hypot(horizontal, config.bs_height_m - height)
            eaod = rng.uniform(
                group.mean_eaod_deg - group.eaod_spread_deg,
                group.mean_eaod_deg + group.eaod_spread_deg,
                n_paths,
            )
            aaod = rng.uniform(
                group.mean_aaod_deg - group.aaod_spread_deg,
                group.mean_aaod_deg + group.aaod_spread_deg,
                n_paths,
            )
            gains = rng.standard_normal((2, n_paths)) * math.sqrt(0.5 / n_paths)
            users.append(
                UserPathSet(
                    group_index=g,
                    eaod_deg=eaod,
                    aaod_deg=aaod,
                    gains=gains[0] + 1j * gains[1],
                    distances_m=np.full(n_paths, distance),
                )
            )
    return users
