"""Position estimation from RSSD measurements.

Two search strategies:

* unconstrained 2D least squares over a rectangular region, by a coarse grid
  scan followed by local grid refinement with step halving;
* TDOA-constrained 1D least squares along the measured hyperbola (coarse
  scan over y plus golden-section refinement), with the x-coordinate
  recovered from the hyperbola equation.

Both support omni and directional antenna models; in the directional model
each residual also accounts for the gain each station's current boresight
gives toward the candidate position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from .channel import ChannelParams, MeasurementSet
from .errors import EmptyRegion, MissingTdoa, SingularCandidate
from .geometry import (
    BaseStation,
    CanonicalFrame,
    DirectionalAntenna,
    Hyperbola,
    Point2D,
    golden_section,
    hyperbola_x_of_y,
)

_SINGULAR_TOL = 1e-6  # m; candidates closer than this to a station get inf


class AntennaModel(Enum):
    OMNI = "OMNI"
    DIRECTIONAL = "DIRECTIONAL"


@dataclass(frozen=True)
class SearchRegion:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    coarse_step: float = 0.05
    refine_iterations: int = 6

    def __post_init__(self):
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise EmptyRegion(
                f"empty region [{self.x_min}, {self.x_max}] x "
                f"[{self.y_min}, {self.y_max}]"
            )
        if self.coarse_step <= 0:
            raise ValueError("coarse_step must be > 0")

    def corners(self) -> List[Point2D]:
        return [Point2D(x, y) for y in (self.y_min, self.y_max)
                for x in (self.x_min, self.x_max)]

    def contains(self, p: Point2D, margin: float = 0.0) -> bool:
        return (self.x_min - margin <= p.x <= self.x_max + margin
                and self.y_min - margin <= p.y <= self.y_max + margin)


@dataclass
class SolverConfig:
    params: ChannelParams
    bs: List[BaseStation]
    region: SearchRegion
    antenna_model: AntennaModel = AntennaModel.OMNI

    def __post_init__(self):
        if self.antenna_model is AntennaModel.DIRECTIONAL:
            for b in self.bs:
                if b.role.measures_rss and not isinstance(b.antenna, DirectionalAntenna):
                    raise ValueError(
                        f"directional model requires a directional antenna on "
                        f"RSS station {b.id}"
                    )


@dataclass
class _Model:
    """Measurement geometry unpacked into arrays for vectorized evaluation."""

    sx: np.ndarray          # station x, indexed by local station index
    sy: np.ndarray
    gain: np.ndarray        # peak gain in dB (0 for omni / omni model)
    boresight: np.ndarray   # radians (unused entries 0)
    directional: bool
    alpha: float
    pi: np.ndarray          # local index of station i per pair
    pj: np.ndarray
    pij: np.ndarray         # measured RSSD per pair

    @classmethod
    def build(cls, cfg: SolverConfig, m: MeasurementSet) -> "_Model":
        stations = sorted((b for b in cfg.bs if b.role.measures_rss),
                          key=lambda b: b.id)
        index = {b.id: k for k, b in enumerate(stations)}
        directional = cfg.antenna_model is AntennaModel.DIRECTIONAL
        gain = np.zeros(len(stations))
        bore = np.zeros(len(stations))
        if directional:
            for k, b in enumerate(stations):
                gain[k] = b.antenna.gain_db
                bore[k] = b.antenna.orientation
        pi, pj, pij = [], [], []
        for i, j, val in m.rssd_pairs:
            if i not in index or j not in index:
                raise ValueError(f"measurement references unknown station pair ({i}, {j})")
            pi.append(index[i])
            pj.append(index[j])
            pij.append(val)
        return cls(
            sx=np.array([b.position.x for b in stations]),
            sy=np.array([b.position.y for b in stations]),
            gain=gain,
            boresight=bore,
            directional=directional,
            alpha=cfg.params.alpha,
            pi=np.array(pi, dtype=int),
            pj=np.array(pj, dtype=int),
            pij=np.array(pij),
        )

    def objective(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Sum-of-squared-residuals at each candidate point (vectorized).

        Candidates within _SINGULAR_TOL of a station evaluate to +inf so a
        grid scan stays total.
        """
        dx = x[None, :] - self.sx[:, None]
        dy = y[None, :] - self.sy[:, None]
        d2 = dx * dx + dy * dy
        singular = (d2 < _SINGULAR_TOL * _SINGULAR_TOL).any(axis=0)
        with np.errstate(divide="ignore"):
            logd2 = np.log10(np.where(d2 > 0, d2, 1.0))
        # 5*alpha*log10(d_j^2/d_i^2) == 10*alpha*log10(d_j/d_i)
        model = 5.0 * self.alpha * (logd2[self.pj] - logd2[self.pi])
        if self.directional:
            phi = np.arctan2(dy, dx) - self.boresight[:, None]
            phi = np.mod(phi + np.pi, 2.0 * np.pi) - np.pi
            g = np.where(np.abs(phi) <= np.pi / 2,
                         self.gain[:, None] * np.cos(phi), 0.0)
            model = model + g[self.pi] - g[self.pj]
        resid = self.pij[:, None] - model
        q = np.einsum("pn,pn->n", resid, resid)
        q[singular] = np.inf
        return q


def rssd_objective(cfg: SolverConfig, m: MeasurementSet, p: Point2D) -> float:
    """Least-squares objective at a single candidate, in dB^2."""
    model = _Model.build(cfg, m)
    d2 = (model.sx - p.x) ** 2 + (model.sy - p.y) ** 2
    if (d2 < _SINGULAR_TOL * _SINGULAR_TOL).any():
        raise SingularCandidate(f"candidate ({p.x}, {p.y}) coincides with a station")
    return float(model.objective(np.array([p.x]), np.array([p.y]))[0])


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = max(int(math.floor((hi - lo) / step + 1e-9)), 0)
    g = lo + step * np.arange(n + 1)
    if g[-1] < hi - 1e-12:
        g = np.append(g, hi)
    return g


def _scan(model: _Model, xs: np.ndarray, ys: np.ndarray) -> Tuple[float, float, float]:
    """Best point of the tensor grid; ties resolve to smallest (y, x)."""
    gx, gy = np.meshgrid(xs, ys)  # row-major: y slow, x fast
    q = model.objective(gx.ravel(), gy.ravel())
    k = int(np.argmin(q))
    return float(gx.ravel()[k]), float(gy.ravel()[k]), float(q[k])


def _refine(model: _Model, reg: SearchRegion, bx: float, by: float
            ) -> Tuple[float, float, float]:
    step = reg.coarse_step / 2.0
    bq = math.inf
    for _ in range(reg.refine_iterations):
        xs = np.unique(np.clip(bx + step * np.arange(-2, 3), reg.x_min, reg.x_max))
        ys = np.unique(np.clip(by + step * np.arange(-2, 3), reg.y_min, reg.y_max))
        bx, by, bq = _scan(model, xs, ys)
        step /= 2.0
    return bx, by, bq


_REFINE_SEEDS = 8  # coarse cells kept as refinement starting points


def solve_rssd(cfg: SolverConfig, m: MeasurementSet) -> Point2D:
    """2D argmin of the RSSD objective over the search region.

    Coarse scan at region.coarse_step, then refine_iterations rounds of a
    local 5x5 grid with the step halved each round (final resolution
    coarse_step / 2**refine_iterations).  The directional gain clamp can
    carve shallow secondary basins, so refinement starts from the several
    best coarse cells and keeps the best refined result.
    """
    model = _Model.build(cfg, m)
    reg = cfg.region
    xs = _grid(reg.x_min, reg.x_max, reg.coarse_step)
    ys = _grid(reg.y_min, reg.y_max, reg.coarse_step)
    gx, gy = np.meshgrid(xs, ys)
    q = model.objective(gx.ravel(), gy.ravel())
    order = np.argsort(q, kind="stable")[:_REFINE_SEEDS]

    best = None
    for k in order:
        cand = _refine(model, reg, float(gx.ravel()[k]), float(gy.ravel()[k]))
        key = (cand[2], cand[1], cand[0])  # objective, then smallest (y, x)
        if best is None or key < best[0]:
            best = (key, cand)
    bx, by, _ = best[1]
    return Point2D(bx, by)


def solve_rssd_tdoa(cfg: SolverConfig, m: MeasurementSet) -> Point2D:
    """1D argmin along the measured TDOA hyperbola.

    Works in the TDOA pair's canonical frame: the candidate x is given by
    the hyperbola equation, so the search runs over y only (coarse scan at
    region.coarse_step, then golden-section refinement around the best
    coarse cell).  The result is mapped back to scenario coordinates.
    """
    if m.tdoa is None:
        raise MissingTdoa("measurement set carries no TDOA observation")
    k_id, l_id, dt = m.tdoa
    by_id = {b.id: b for b in cfg.bs}
    frame = CanonicalFrame.from_stations(by_id[k_id].position, by_id[l_id].position)
    h = Hyperbola.from_tdoa(dt, frame.half_separation)

    canon_bs = []
    for b in cfg.bs:
        if not b.role.measures_rss:
            continue
        pos = frame.to_canonical(b.position)
        antenna = b.antenna
        if isinstance(antenna, DirectionalAntenna):
            antenna = DirectionalAntenna(
                antenna.gain_db, frame.to_canonical_angle(antenna.orientation))
        canon_bs.append(BaseStation(b.id, pos, b.role, antenna, b.bias_db))
    canon_cfg = SolverConfig(cfg.params, canon_bs, cfg.region, cfg.antenna_model)
    model = _Model.build(canon_cfg, m)

    corner_y = [frame.to_canonical(c).y for c in cfg.region.corners()]
    y_lo, y_hi = min(corner_y), max(corner_y)

    def q_of_y(y: np.ndarray) -> np.ndarray:
        return model.objective(hyperbola_x_of_y(h, y), y)

    ys = _grid(y_lo, y_hi, cfg.region.coarse_step)
    qs = q_of_y(ys)
    y0 = float(ys[int(np.argmin(qs))])
    y_star = golden_section(
        lambda y: float(q_of_y(np.array([y]))[0]),
        max(y_lo, y0 - cfg.region.coarse_step),
        min(y_hi, y0 + cfg.region.coarse_step),
        tol=1e-7,
    )
    return frame.from_canonical(Point2D(float(hyperbola_x_of_y(h, y_star)), y_star))
