"""Social-force parameter vectors and the linear endpoint family."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

AGENT_MASS = 80.0
SOLO_INDEX = 50  # theta* = theta^50
DEFAULT_M = 300


@dataclass(frozen=True)
class SfParams:
    max_speed: float = 2.6  # m/s; also the desired walking speed
    acceleration: float = 0.5  # relaxation time of the drive term, s
    agent_repulsion_importance: float = 0.0
    agent_body_force_over_mass: float = 1500.0  # s^-2
    wall_body_force_over_mass: float = 1500.0  # s^-2
    sliding_friction_over_mass: float = 3000.0  # m^-1 s^-1
    repulsion_agent_B: float = 0.01  # m
    repulsion_agent_A_over_mass: float = 5.0  # N/kg
    repulsion_wall_B: float = 0.20  # m
    repulsion_wall_A_over_mass: float = 63.33  # N/kg
    mass: float = AGENT_MASS

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")
        if self.max_speed <= 0:
            raise ValueError("max_speed must be positive")
        if self.acceleration <= 0:
            raise ValueError("acceleration must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)


# Index layout of SfParams.as_array(), used by the compiled kernel.
P_MAX_SPEED, P_TAU, P_IMPORTANCE, P_K_AGENT, P_K_WALL, P_KAPPA, P_B_AGENT, P_A_AGENT, P_B_WALL, P_A_WALL, P_MASS = range(11)

THETA_1 = SfParams(agent_repulsion_importance=0.0, repulsion_agent_B=0.01, repulsion_agent_A_over_mass=5.0)
THETA_M = SfParams(agent_repulsion_importance=10.0, repulsion_agent_B=0.28, repulsion_agent_A_over_mass=60.0)

_VARYING = ("agent_repulsion_importance", "repulsion_agent_B", "repulsion_agent_A_over_mass")


@dataclass(frozen=True)
class ParamSpace:
    theta_1: SfParams = THETA_1
    theta_m: SfParams = THETA_M
    m: int = DEFAULT_M

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be >= 2")
        for f in fields(SfParams):
            if f.name in _VARYING:
                continue
            if getattr(self.theta_1, f.name) != getattr(self.theta_m, f.name):
                raise ValueError(f"endpoints may only differ in agent repulsion; {f.name} differs")

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, j: int) -> SfParams:
        return interpolate_params(self, j)

    @property
    def theta_star(self) -> SfParams:
        return interpolate_params(self, min(SOLO_INDEX, self.m))


def interpolate_params(space: ParamSpace, j: int) -> SfParams:
    """theta^j on the line theta^1 -> theta^m, 1-based; endpoints are returned exactly."""
    if not 1 <= j <= space.m:
        raise IndexError(f"j={j} outside 1..{space.m}")
    if j == 1:
        return space.theta_1
    if j == space.m:
        return space.theta_m
    w = (j - 1) / (space.m - 1)
    vals = {}
    for name in _VARYING:
        a = getattr(space.theta_1, name)
        b = getattr(space.theta_m, name)
        vals[name] = a + w * (b - a)
    return replace(space.theta_1, **vals)
