"""Planar geometry: points, base stations, and the range-difference hyperbola.

The two stations of a range-difference (TDOA) pair define a canonical frame
with the stations on the x-axis at (-s, 0) and (+s, 0).  All hyperbola math
works in that frame; :class:`CanonicalFrame` maps scenario coordinates in
and out of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from .errors import DegenerateHyperbola

SPEED_OF_LIGHT = 299792458.0  # m/s

_DEGENERACY_TOL = 1e-9  # m

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    w = math.remainder(a, math.tau)
    if w <= -math.pi:
        w += math.tau
    return w


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def distance(a: Point2D, b: Point2D) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def azimuth(frm: Point2D, to: Point2D) -> float:
    """Azimuth of the direction from `frm` to `to`, in (-pi, pi]."""
    return wrap_angle(math.atan2(to.y - frm.y, to.x - frm.x))


class Role(Enum):
    RSS_ONLY = "RSS_ONLY"
    TDOA_ONLY = "TDOA_ONLY"
    RSS_TDOA = "RSS_TDOA"  # measures RSS and belongs to the TDOA pair

    @property
    def measures_rss(self) -> bool:
        return self in (Role.RSS_ONLY, Role.RSS_TDOA)

    @property
    def measures_tdoa(self) -> bool:
        return self in (Role.TDOA_ONLY, Role.RSS_TDOA)


@dataclass(frozen=True)
class OmniAntenna:
    pass


@dataclass(frozen=True)
class DirectionalAntenna:
    """Cosine-pattern antenna with peak gain `gain_db` at the boresight."""

    gain_db: float
    orientation: float  # boresight azimuth, radians

    def __post_init__(self):
        if self.gain_db < 0:
            raise ValueError("gain_db must be >= 0")
        object.__setattr__(self, "orientation", wrap_angle(self.orientation))


Antenna = Union[OmniAntenna, DirectionalAntenna]


@dataclass(frozen=True)
class BaseStation:
    id: int
    position: Point2D
    role: Role = Role.RSS_ONLY
    antenna: Antenna = OmniAntenna()
    bias_db: float = 0.0  # extra attenuation, e.g. an obstructed station


@dataclass(frozen=True)
class Hyperbola:
    """One branch of the constant-range-difference curve of a station pair.

    `half_separation` is half the distance between the two stations (at
    (-s, 0) and (+s, 0) in the canonical frame); `range_difference` is the
    signed half range difference r = 0.5 * c * dt, so a point (x, y) on the
    branch satisfies d(-s,0) - d(+s,0) = 2r.  Negative r selects the branch
    nearer the station with the earlier arrival.
    """

    half_separation: float
    range_difference: float

    def __post_init__(self):
        if self.half_separation <= 0:
            raise DegenerateHyperbola(
                f"half_separation must be > 0, got {self.half_separation}"
            )
        if abs(self.range_difference) >= self.half_separation - _DEGENERACY_TOL:
            raise DegenerateHyperbola(
                f"|range difference| {abs(self.range_difference):.6g} m not below "
                f"station half-separation {self.half_separation:.6g} m"
            )

    @classmethod
    def from_tdoa(cls, delta_t: float, half_separation: float) -> "Hyperbola":
        return cls(half_separation, 0.5 * SPEED_OF_LIGHT * delta_t)


def hyperbola_x_of_y(h: Hyperbola, y):
    """x-coordinate of the hyperbola branch at height y (canonical frame).

    Accepts a scalar or an ndarray of y values.
    """
    r = h.range_difference
    s = h.half_separation
    return r * np.sqrt(1.0 + np.square(y) / (s * s - r * r))


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-7) -> float:
    """Locate the minimizer of a unimodal function on [a, b] within tol."""
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def project_onto_hyperbola(p: Point2D, h: Hyperbola,
                           y_bracket: Optional[tuple] = None) -> Point2D:
    """Closest point on the hyperbola branch to p, by 1D search over y.

    The squared distance to the branch is unimodal in y for points near the
    curve; the default bracket is generous enough to contain the foot for
    any point whose |y| is comparable to the bracket width.
    """
    if y_bracket is None:
        w = abs(p.y) + 2.0 * h.half_separation + 1.0
        y_bracket = (p.y - w, p.y + w)

    def sqdist(y: float) -> float:
        x = hyperbola_x_of_y(h, y)
        return (x - p.x) ** 2 + (y - p.y) ** 2

    y_star = golden_section(sqdist, y_bracket[0], y_bracket[1], tol=1e-9)
    return Point2D(float(hyperbola_x_of_y(h, y_star)), y_star)


@dataclass(frozen=True)
class CanonicalFrame:
    """Rigid map between scenario coordinates and the TDOA pair's frame.

    Station k maps to (-s, 0) and station l to (+s, 0).
    """

    origin: Point2D       # midpoint of the pair, scenario coordinates
    axis_angle: float     # azimuth of the k -> l direction
    half_separation: float

    @classmethod
    def from_stations(cls, pos_k: Point2D, pos_l: Point2D) -> "CanonicalFrame":
        sep = distance(pos_k, pos_l)
        if sep <= 0:
            raise DegenerateHyperbola("TDOA stations are coincident")
        mid = Point2D(0.5 * (pos_k.x + pos_l.x), 0.5 * (pos_k.y + pos_l.y))
        return cls(mid, azimuth(pos_k, pos_l), 0.5 * sep)

    def to_canonical(self, p: Point2D) -> Point2D:
        dx, dy = p.x - self.origin.x, p.y - self.origin.y
        c, s = math.cos(self.axis_angle), math.sin(self.axis_angle)
        return Point2D(c * dx + s * dy, -s * dx + c * dy)

    def from_canonical(self, p: Point2D) -> Point2D:
        c, s = math.cos(self.axis_angle), math.sin(self.axis_angle)
        return Point2D(self.origin.x + c * p.x - s * p.y,
                       self.origin.y + s * p.x + c * p.y)

    def to_canonical_angle(self, a: float) -> float:
        return wrap_angle(a - self.axis_angle)
