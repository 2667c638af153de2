"""Random-waypoint mobility and the dynamic antenna-orientation loop.

The mobile user walks between uniformly drawn waypoints at a constant
speed, sampled at the localization update rate.  Directional receive
antennas are re-pointed toward each new position estimate; the
misorientation angle is the error between a boresight and the true
direction to the user.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np

from .errors import CoincidentWithStation
from .geometry import (
    BaseStation,
    DirectionalAntenna,
    Point2D,
    azimuth,
    distance,
    wrap_angle,
)
from .solver import SearchRegion

_COINCIDENCE_TOL = 1e-9  # m


@dataclass(frozen=True)
class WaypointModelParams:
    area: SearchRegion
    total_length: float        # m of track to generate
    speed: float = 1.0         # m/s
    pause_time: float = 0.0    # s at each reached waypoint
    update_rate: float = 2.0   # localization epochs per second

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("speed must be > 0")
        if self.pause_time < 0:
            raise ValueError("pause_time must be >= 0")
        if self.update_rate <= 0:
            raise ValueError("update_rate must be > 0")


@dataclass
class Track:
    epochs: List[Tuple[float, Point2D]]

    def __len__(self) -> int:
        return len(self.epochs)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "x", "y"])
            for t, p in self.epochs:
                w.writerow([f"{t:.6f}", f"{p.x:.6f}", f"{p.y:.6f}"])

    @classmethod
    def from_csv(cls, path) -> "Track":
        epochs = []
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                epochs.append((float(row["t"]), Point2D(float(row["x"]), float(row["y"]))))
        return cls(epochs)


def _draw_point(area: SearchRegion, rng: np.random.Generator) -> Point2D:
    return Point2D(rng.uniform(area.x_min, area.x_max),
                   rng.uniform(area.y_min, area.y_max))


def generate_track(params: WaypointModelParams, rng: np.random.Generator) -> Track:
    """Random-waypoint track sampled at the update rate.

    Waypoints are drawn uniformly over the area in a fixed order, so two
    tracks generated from the same seed share the same geometric path even
    at different update rates.  Generation stops once the summed straight-
    line epoch-to-epoch length reaches total_length.
    """
    pos = _draw_point(params.area, rng)
    epochs: List[Tuple[float, Point2D]] = [(0.0, pos)]
    if params.total_length <= 0:
        return Track(epochs)

    dt = 1.0 / params.update_rate
    target = _draw_point(params.area, rng)
    pause_left = 0.0
    t = 0.0
    path_len = 0.0
    while path_len < params.total_length:
        remaining = dt
        x, y = pos.x, pos.y
        while remaining > 1e-15:
            if pause_left > 0:
                used = min(pause_left, remaining)
                pause_left -= used
                remaining -= used
                continue
            gap = math.hypot(target.x - x, target.y - y)
            reach = params.speed * remaining
            if reach < gap:
                x += (target.x - x) * reach / gap
                y += (target.y - y) * reach / gap
                remaining = 0.0
            else:
                x, y = target.x, target.y
                remaining -= gap / params.speed
                pause_left = params.pause_time
                target = _draw_point(params.area, rng)
        t += dt
        nxt = Point2D(x, y)
        path_len += distance(pos, nxt)
        pos = nxt
        epochs.append((t, pos))
    return Track(epochs)


@dataclass(frozen=True)
class OrientationState:
    """Current boresight of every directional RSS station, keyed by id."""

    boresights: Dict[int, float]
    last_estimate: Point2D

    @classmethod
    def initial(cls, bs: List[BaseStation], position: Point2D) -> "OrientationState":
        """Perfect initial pointing toward a known starting position."""
        bores = {}
        for b in bs:
            if b.role.measures_rss and isinstance(b.antenna, DirectionalAntenna):
                bores[b.id] = azimuth(b.position, position)
        return cls(bores, position)


def update_orientation(state: OrientationState, bs: List[BaseStation],
                       new_estimate: Point2D) -> OrientationState:
    """Re-point every directional RSS antenna at the new position estimate.

    A station coincident with the estimate keeps its previous boresight
    (the azimuth is undefined there).
    """
    bores = dict(state.boresights)
    for b in bs:
        if b.id not in bores:
            continue
        if distance(b.position, new_estimate) < _COINCIDENCE_TOL:
            continue
        bores[b.id] = azimuth(b.position, new_estimate)
    return OrientationState(bores, new_estimate)


def apply_orientation(bs: List[BaseStation],
                      state: OrientationState) -> List[BaseStation]:
    """Station list with antennas rotated to the state's boresights."""
    out = []
    for b in bs:
        if b.id in state.boresights and isinstance(b.antenna, DirectionalAntenna):
            out.append(replace(
                b, antenna=DirectionalAntenna(b.antenna.gain_db,
                                              state.boresights[b.id])))
        else:
            out.append(b)
    return out


def misorientation(state: OrientationState, bs: BaseStation,
                   true_position: Point2D) -> float:
    """Unsigned angle between a station's boresight and the true direction.

    Returned in [0, pi].
    """
    if distance(bs.position, true_position) < _COINCIDENCE_TOL:
        raise CoincidentWithStation(f"true position coincides with station {bs.id}")
    if bs.id not in state.boresights:
        raise KeyError(f"station {bs.id} has no tracked boresight")
    return abs(wrap_angle(azimuth(bs.position, true_position)
                          - state.boresights[bs.id]))
