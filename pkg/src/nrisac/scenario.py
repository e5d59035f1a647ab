"""Ground-truth vehicle kinematics and radar-visible target parameters.

Angle convention used project-wide: azimuth is measured in the horizontal
plane from the BS array broadside (the across-road direction), positive on
the side the vehicle approaches from; elevation is measured from the
horizontal, positive upward.  With this convention the angular rate of an
approaching vehicle is -v*cos(theta)/d and the range rate is -v*sin(theta),
which is exactly the constant-velocity model the tracker linearizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

LOS_VEHICLE = "los-vehicle"
NLOS_STATIC = "nlos-static"


@dataclass(frozen=True)
class SceneGeometry:
    """BS placement and road layout.

    ``road_axis`` is the unit 2D direction of travel; the array broadside is
    the horizontal direction perpendicular to it, pointing at the road.
    """

    bs_position: np.ndarray       # (x, y, z) meters; z is the antenna height
    road_axis: np.ndarray         # unit 2D direction of travel
    vehicle_height: float = 1.0   # meters

    def __post_init__(self):
        object.__setattr__(self, "bs_position", np.asarray(self.bs_position, dtype=float))
        object.__setattr__(self, "road_axis", np.asarray(self.road_axis, dtype=float))
        if self.bs_position.shape != (3,):
            raise ValueError("bs_position must be a 3-vector (x, y, height)")
        if self.road_axis.shape != (2,):
            raise ValueError("road_axis must be a 2-vector")
        if abs(np.linalg.norm(self.road_axis) - 1.0) > 1e-9:
            raise ValueError("road_axis must have unit norm")
        if self.bs_position[2] < 0 or self.vehicle_height < 0:
            raise ValueError("heights must be nonnegative")


@dataclass(frozen=True)
class VehicleState:
    """Vehicle kinematics at one instant; motion is along ``road_axis``."""

    position: np.ndarray          # (x, y) meters
    speed: float                  # m/s, nonnegative, along road_axis
    time: float                   # seconds
    road_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "road_axis", np.asarray(self.road_axis, dtype=float))
        if self.position.shape != (2,):
            raise ValueError("position must be a 2-vector")
        if self.speed < 0:
            raise ValueError("speed must be nonnegative")


@dataclass(frozen=True)
class ScattererSpec:
    """One scene reflector: the vehicle (LoS) or a fixed NLoS reflector.

    ``rcs`` is the complex radar cross-section amplitude; ``path_gain`` is an
    extra complex factor applied to the communication path on top of the
    geometric gain computed by the channel module.
    """

    kind: str                               # LOS_VEHICLE or NLOS_STATIC
    rcs: complex = 1.0 + 0.0j
    path_gain: complex = 1.0 + 0.0j
    position: np.ndarray | None = None      # (x, y, z) meters, static only

    def __post_init__(self):
        if self.kind not in (LOS_VEHICLE, NLOS_STATIC):
            raise ValueError(f"unknown scatterer kind {self.kind!r}")
        if abs(self.rcs) <= 0:
            raise ValueError("rcs magnitude must be positive")
        if self.kind == NLOS_STATIC:
            if self.position is None:
                raise ValueError("static scatterer needs a 3D position")
            object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
            if self.position.shape != (3,):
                raise ValueError("scatterer position must be a 3-vector")


@dataclass(frozen=True)
class TargetParams:
    """Radar-visible parameters of one scatterer at one slot."""

    azimuth: float           # radians, from broadside
    elevation: float         # radians, from horizontal
    distance: float          # meters, 3D BS-to-scatterer range
    radial_velocity: float   # m/s, v*cos(azimuth) for the vehicle, 0 static
    speed: float             # m/s, road speed of the scatterer
    reflection: complex      # beta = rcs * (2 d)^-2
    delay: float             # seconds, 2 d / c
    doppler: float           # Hz, 2 * radial_velocity * f_c / c


def propagate(state: VehicleState, dt: float) -> VehicleState:
    """Advance the vehicle by constant-velocity motion over ``dt`` seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return VehicleState(
        position=state.position + state.speed * dt * state.road_axis,
        speed=state.speed,
        time=state.time + dt,
        road_axis=state.road_axis,
    )


def azimuth_elevation(geom: SceneGeometry, point_3d: np.ndarray) -> tuple[float, float, float]:
    """Return (azimuth, elevation, 3D distance) of a point in the BS frame.

    Azimuth is positive opposite the travel direction: with s the along-road
    coordinate of the point relative to the BS and x the across-road
    distance, azimuth = atan2(-s, x).
    """
    point_3d = np.asarray(point_3d, dtype=float)
    w = point_3d[:2] - geom.bs_position[:2]
    s = float(w @ geom.road_axis)
    perp = w - s * geom.road_axis
    x_cross = float(np.linalg.norm(perp))
    rho = float(np.hypot(s, x_cross))
    dz = point_3d[2] - geom.bs_position[2]
    d = float(np.hypot(rho, dz))
    if d <= 0:
        raise ValueError("point is colocated with the BS")
    azimuth = float(np.arctan2(-s, x_cross))
    elevation = float(np.arctan2(dz, rho))
    return azimuth, elevation, d


def observe(
    geom: SceneGeometry,
    vstate: VehicleState,
    scat: ScattererSpec,
    carrier_hz: float,
) -> TargetParams:
    """Convert scene state to the radar-visible parameters of one scatterer.

    The radial velocity follows the measurement model v_rel = v*cos(azimuth)
    (zero for static reflectors), and the Doppler shift is
    2 * v_rel * f_c / c so that the velocity estimator inverts it exactly.
    """
    if scat.kind == LOS_VEHICLE:
        point = np.array([vstate.position[0], vstate.position[1], geom.vehicle_height])
        speed = vstate.speed
    else:
        point = scat.position
        speed = 0.0
    azimuth, elevation, d = azimuth_elevation(geom, point)
    v_rel = speed * np.cos(azimuth) if scat.kind == LOS_VEHICLE else 0.0
    return TargetParams(
        azimuth=azimuth,
        elevation=elevation,
        distance=d,
        radial_velocity=v_rel,
        speed=speed,
        reflection=scat.rcs * (2.0 * d) ** -2,
        delay=2.0 * d / SPEED_OF_LIGHT,
        doppler=2.0 * v_rel * carrier_hz / SPEED_OF_LIGHT,
    )


def trajectory(start: VehicleState, dt: float, t_max: float) -> list[VehicleState]:
    """Sample the constant-velocity trajectory at [0, dt, 2 dt, ..., t_max]."""
    n_steps = int(np.floor(t_max / dt + 1e-9))
    states = [start]
    for _ in range(n_steps):
        states.append(propagate(states[-1], dt))
    return states
