"""Canonical test-case registry: geometry, grids, boundaries and oracles.

Each case couples a grid builder with its boundary layout, the exact-distance
oracle and sensible per-case defaults (the diffusivity slope epsilon, default
resolution, probe location for the moving cases).  Closed-form distances are
used wherever the geometry allows; the bump, complex and moving cases fall
back to the densely-sampled wall oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownCaseError
from .grid import BumpParams, CurvilinearGrid, build_bump_grid, build_cartesian
from .levelset import GrainShape, point_in_polygon
from .metrics import sampled_wall_distance
from .solver import FARFIELD, WALL, BoundarySpec, MotionSpec, all_wall_faces

ORACLE_SAMPLES_PER_CURVE = 10000


@dataclass
class CaseSetup:
    """A built case: grid, boundary and convenience metadata."""

    name: str
    grid: CurvilinearGrid
    boundary: BoundarySpec
    epsilon: float
    motion: MotionSpec | None = None
    probe: tuple | None = None
    grain: GrainShape | None = None


@dataclass(frozen=True)
class _Case:
    name: str
    default_dims: tuple
    epsilon: float = 0.2
    probe: tuple | None = None

    def exact(self, points, time=None) -> np.ndarray:
        raise NotImplementedError

    def build(self, dims=None, scheme="E2") -> CaseSetup:
        raise NotImplementedError


def _box_distance(points, extents):
    pts = np.atleast_2d(points)
    d = np.minimum(pts[:, 0], extents[0] - pts[:, 0])
    for ax in range(1, pts.shape[1]):
        d = np.minimum(d, np.minimum(pts[:, ax], extents[ax] - pts[:, ax]))
    return d


@dataclass(frozen=True)
class _FlatPlate(_Case):
    def exact(self, points, time=None):
        return np.atleast_2d(points)[:, 1].copy()

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        grid = build_cartesian(ni, nj, Lx=1.0, Ly=1.0)
        faces = {"imin": FARFIELD, "imax": FARFIELD,
                 "jmin": WALL, "jmax": FARFIELD}
        return CaseSetup(self.name, grid, BoundarySpec(faces=faces),
                         self.epsilon)


@dataclass(frozen=True)
class _Channel(_Case):
    height: float = 1.0

    def exact(self, points, time=None):
        y = np.atleast_2d(points)[:, 1]
        return np.minimum(y, self.height - y)

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        grid = build_cartesian(ni, nj, Lx=1.0, Ly=self.height)
        faces = {"imin": FARFIELD, "imax": FARFIELD,
                 "jmin": WALL, "jmax": WALL}
        return CaseSetup(self.name, grid, BoundarySpec(faces=faces),
                         self.epsilon)


@dataclass(frozen=True)
class _Box(_Case):
    extents: tuple = (1.0, 1.0)

    def exact(self, points, time=None):
        return _box_distance(points, self.extents)

    def build(self, dims=None, scheme="E2"):
        dims = tuple(dims or self.default_dims)
        if len(dims) == 2:
            grid = build_cartesian(*dims, Lx=self.extents[0],
                                   Ly=self.extents[1])
        else:
            grid = build_cartesian(dims[0], dims[1], dims[2],
                                   Lx=self.extents[0], Ly=self.extents[1],
                                   Lz=self.extents[2])
        faces = all_wall_faces(len(dims))
        return CaseSetup(self.name, grid, BoundarySpec(faces=faces),
                         self.epsilon)


@dataclass(frozen=True)
class _Bump(_Case):
    params: BumpParams = BumpParams()

    def wall_points(self):
        return self.params.wall_polyline(
            int(self.params.length * ORACLE_SAMPLES_PER_CURVE) + 1)

    def exact(self, points, time=None):
        return sampled_wall_distance(points, self.wall_points())

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        grid = build_bump_grid(ni, nj, self.params, scheme=scheme)
        faces = {"imin": FARFIELD, "imax": FARFIELD,
                 "jmin": WALL, "jmax": FARFIELD}
        return CaseSetup(self.name, grid, BoundarySpec(faces=faces),
                         self.epsilon)


def _polygon_perimeter_points(poly, n_total):
    poly = np.asarray(poly, dtype=float)
    closed = np.vstack([poly, poly[:1]])
    seg = np.diff(closed, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    total = seg_len.sum()
    pts = []
    for k in range(len(seg)):
        m = max(2, int(round(n_total * seg_len[k] / total)))
        t = np.linspace(0.0, 1.0, m, endpoint=False)
        pts.append(closed[k] + t[:, None] * seg[k])
    return np.vstack(pts)


@dataclass(frozen=True)
class _Complex(_Case):
    """Embedded bodies in a square: a circle, a box and a triangle."""

    circle: tuple = (0.30, 0.70, 0.10)           # cx, cy, r
    box: tuple = (0.55, 0.25, 0.85, 0.50)        # x0, y0, x1, y1
    triangle: tuple = ((0.20, 0.15), (0.48, 0.22), (0.30, 0.42))

    def _box_poly(self):
        x0, y0, x1, y1 = self.box
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    def wall_points(self):
        cx, cy, r = self.circle
        th = np.linspace(0.0, 2.0 * np.pi, ORACLE_SAMPLES_PER_CURVE,
                         endpoint=False)
        circ = np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
        boxp = _polygon_perimeter_points(self._box_poly(),
                                         ORACLE_SAMPLES_PER_CURVE)
        trip = _polygon_perimeter_points(np.asarray(self.triangle),
                                         ORACLE_SAMPLES_PER_CURVE)
        return np.vstack([circ, boxp, trip])

    def exact(self, points, time=None):
        return sampled_wall_distance(points, self.wall_points())

    def solid_mask(self, grid):
        pts = grid.coords.reshape(2, -1).T
        cx, cy, r = self.circle
        mask = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2 <= r**2
        mask |= point_in_polygon(pts, self._box_poly())
        mask |= point_in_polygon(pts, np.asarray(self.triangle))
        return mask.reshape(grid.dims)

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        grid = build_cartesian(ni, nj, Lx=1.0, Ly=1.0)
        faces = {"imin": FARFIELD, "imax": FARFIELD,
                 "jmin": FARFIELD, "jmax": FARFIELD}
        return CaseSetup(self.name, grid,
                         BoundarySpec(faces=faces,
                                      solid_mask=self.solid_mask(grid)),
                         self.epsilon)


@dataclass(frozen=True)
class _Piston(_Case):
    """Closed chamber with a sinusoidally moving piston face."""

    extents: tuple = (1.2, 0.96)
    motion: MotionSpec = field(default_factory=lambda: MotionSpec(
        kind="piston_sinusoid", physical_dt=0.025, x0=0.3, amplitude=0.15,
        period=1.0))

    def wall_points(self, time):
        t = 0.0 if time is None else time
        xp = self.motion.piston_position(t)
        Lx, Ly = self.extents
        n = ORACLE_SAMPLES_PER_CURVE
        walls = [
            np.column_stack([np.linspace(xp, Lx, n), np.zeros(n)]),
            np.column_stack([np.linspace(xp, Lx, n), np.full(n, Ly)]),
            np.column_stack([np.full(n, Lx), np.linspace(0.0, Ly, n)]),
            np.column_stack([np.full(n, xp), np.linspace(0.0, Ly, n)]),
        ]
        return np.vstack(walls)

    def exact(self, points, time=None):
        return sampled_wall_distance(points, self.wall_points(time))

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        grid = build_cartesian(ni, nj, Lx=self.extents[0], Ly=self.extents[1])
        boundary = BoundarySpec(faces=all_wall_faces(2),
                                solid_mask=self.motion.body_mask(grid, 0.0))
        return CaseSetup(self.name, grid, boundary, self.epsilon,
                         motion=self.motion, probe=self.probe)


@dataclass(frozen=True)
class _BouncingCube(_Case):
    """Square body bouncing between two parallel walls."""

    extents: tuple = (1.6, 1.2)
    motion: MotionSpec = field(default_factory=lambda: MotionSpec(
        kind="bouncing_cube", physical_dt=0.25, size=0.2, x_center=0.8,
        y_start=0.9, gravity=2.0, energy_loss=0.2))

    def wall_points(self, time):
        t = 0.0 if time is None else time
        Lx, Ly = self.extents
        n = ORACLE_SAMPLES_PER_CURVE
        yc = self.motion.cube_center_y(t, floor_y=0.0)
        half = 0.5 * self.motion.size
        cube = np.array([[self.motion.x_center - half, yc - half],
                         [self.motion.x_center + half, yc - half],
                         [self.motion.x_center + half, yc + half],
                         [self.motion.x_center - half, yc + half]])
        walls = [
            np.column_stack([np.linspace(0.0, Lx, n), np.zeros(n)]),
            np.column_stack([np.linspace(0.0, Lx, n), np.full(n, Ly)]),
            _polygon_perimeter_points(cube, n),
        ]
        return np.vstack(walls)

    def exact(self, points, time=None):
        return sampled_wall_distance(points, self.wall_points(time))

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        grid = build_cartesian(ni, nj, Lx=self.extents[0], Ly=self.extents[1])
        faces = self.motion.default_faces(2)
        boundary = BoundarySpec(faces=faces,
                                solid_mask=self.motion.body_mask(grid, 0.0))
        return CaseSetup(self.name, grid, boundary, self.epsilon,
                         motion=self.motion, probe=self.probe)


@dataclass(frozen=True)
class _Burnback(_Case):
    """Solid-rocket grain port in a square chamber cross-section."""

    extent: float = 2.4  # square side, centered on the origin

    def grain(self) -> GrainShape:
        return GrainShape.star()

    def exact(self, points, time=None):
        # distance to the initial grain boundary (burnback accuracy is
        # assessed through the level-set histories, not a field oracle)
        return sampled_wall_distance(
            points, _polygon_perimeter_points(self.grain().polygon,
                                              8 * ORACLE_SAMPLES_PER_CURVE))

    def build(self, dims=None, scheme="E2"):
        ni, nj = dims or self.default_dims
        half = 0.5 * self.extent
        grid = build_cartesian(ni, nj, Lx=self.extent, Ly=self.extent,
                               origin=(-half, -half, 0.0))
        faces = {name: FARFIELD for name in ("imin", "imax", "jmin", "jmax")}
        grain = self.grain()
        pts = grid.coords.reshape(2, -1).T
        inside = point_in_polygon(pts, grain.polygon).reshape(grid.dims)
        return CaseSetup(self.name, grid,
                         BoundarySpec(faces=faces, solid_mask=inside),
                         self.epsilon, grain=grain)


_REGISTRY = {
    "flat_plate": _FlatPlate("flat_plate", (101, 101)),
    "channel": _Channel("channel", (101, 101)),
    "box2d": _Box("box2d", (101, 101)),
    "box3d": _Box("box3d", (51, 51, 51), extents=(1.0, 1.0, 1.0)),
    "bump": _Bump("bump", (201, 101)),
    "complex": _Complex("complex", (101, 101)),
    "piston": _Piston("piston", (201, 161), epsilon=0.15,
                      probe=(0.66, 0.48)),
    "bouncing_cube": _BouncingCube("bouncing_cube", (161, 121), epsilon=0.15,
                                   probe=(1.2, 0.6)),
    "burnback": _Burnback("burnback", (201, 201), epsilon=0.15),
}

CASE_NAMES = tuple(_REGISTRY)


def get_case(name: str):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownCaseError(
            f"unknown case {name!r}; expected one of {CASE_NAMES}") from None


def build_case(name: str, dims=None, scheme: str = "E2") -> CaseSetup:
    """Construct the grid and boundary for a canonical case."""
    return get_case(name).build(dims=dims, scheme=scheme)
