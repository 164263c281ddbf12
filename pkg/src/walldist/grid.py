"""Structured curvilinear grids: coordinates, metric terms, Jacobian.

Conventions
-----------
* Arrays are node-based with shape (ni, nj) or (ni, nj, nk); axis 0 is the
  xi direction, axis 1 eta, axis 2 zeta.
* Computational spacing is unity (d_xi = d_eta = d_zeta = 1); all physical
  spacing lives in the metric terms.
* ``metrics[l, m]`` holds the field of d(xi_l)/d(x_m); ``jacobian`` is the
  determinant of that matrix (1/length^2 in 2-D, 1/length^3 in 3-D) and must
  be positive everywhere (right-handed, non-degenerate mapping).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMappingError, DimensionTooSmallError, SingularMetricError
from .operators import central_derivative

MIN_NODES = 5  # minimum stencil width supported along any direction


@dataclass
class CurvilinearGrid:
    """Node coordinates plus metric terms for a structured (i,j[,k]) mesh."""

    coords: np.ndarray                  # (ndim, ni, nj[, nk]) positions
    metrics: np.ndarray | None = None   # (ndim, ndim, ni, nj[, nk])
    jacobian: np.ndarray | None = None  # (ni, nj[, nk])
    ref_length: float = 1.0

    @property
    def ndim(self) -> int:
        return self.coords.shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        return self.coords.shape[1:]

    @property
    def x(self) -> np.ndarray:
        return self.coords[0]

    @property
    def y(self) -> np.ndarray:
        return self.coords[1]

    @property
    def z(self) -> np.ndarray:
        return self.coords[2]

    def metric(self, l: int, m: int) -> np.ndarray:
        """d(xi_l)/d(x_m) per node."""
        return self.metrics[l, m]

    def metric_row_sumsq(self, l: int) -> np.ndarray:
        """S_l = sum_m (d(xi_l)/d(x_m))^2, inverse squared local spacing
        along direction l."""
        return np.sum(self.metrics[l] ** 2, axis=0)

    def local_spacing(self, l: int) -> np.ndarray:
        """Physical node spacing along direction l, 1/sqrt(S_l)."""
        return 1.0 / np.sqrt(self.metric_row_sumsq(l))

    def min_spacing(self) -> np.ndarray:
        """Per-node minimum physical spacing over all directions."""
        return np.min(
            np.stack([self.local_spacing(l) for l in range(self.ndim)]),
            axis=0)

    def new_field(self, fill: float = 0.0) -> np.ndarray:
        return np.full(self.dims, fill, dtype=float)

    def validate(self) -> None:
        if self.jacobian is not None and np.any(self.jacobian <= 0.0):
            raise DegenerateMappingError("Jacobian is not positive everywhere")


def _check_dims(dims, extents):
    for n in dims:
        if n < MIN_NODES:
            raise DimensionTooSmallError(
                f"need at least {MIN_NODES} nodes per direction, got {dims}")
    for ext in extents:
        if ext <= 0.0:
            raise ValueError(f"extents must be positive, got {extents}")


def build_cartesian(ni, nj, nk=None, Lx=1.0, Ly=1.0, Lz=None,
                    origin=(0.0, 0.0, 0.0), ref_length=1.0) -> CurvilinearGrid:
    """Uniform axis-aligned Cartesian grid with analytic metrics.

    2-D when ``nk`` is None.  The metrics are filled analytically and are
    exact to machine precision: xi_x = 1/dx, eta_y = 1/dy (zeta_z = 1/dz),
    zero cross terms, J the product of the diagonal entries.
    """
    if nk is None:
        dims = (ni, nj)
        extents = (Lx, Ly)
    else:
        if Lz is None:
            Lz = 1.0
        dims = (ni, nj, nk)
        extents = (Lx, Ly, Lz)
    _check_dims(dims, extents)
    ndim = len(dims)

    axes = [np.linspace(origin[d], origin[d] + extents[d], dims[d])
            for d in range(ndim)]
    coords = np.stack(np.meshgrid(*axes, indexing="ij"))

    spacing = [extents[d] / (dims[d] - 1) for d in range(ndim)]
    metrics = np.zeros((ndim, ndim) + dims)
    for d in range(ndim):
        metrics[d, d] = 1.0 / spacing[d]
    jac = np.full(dims, float(np.prod([1.0 / s for s in spacing])))
    return CurvilinearGrid(coords=coords, metrics=metrics, jacobian=jac,
                           ref_length=ref_length)


@dataclass(frozen=True)
class BumpParams:
    """Flat plate with a circular-arc bump on the lower wall.

    The arc spans ``chord`` centered at ``center_x`` with apex ``height``;
    zero height degenerates to a flat plate.
    """

    length: float = 3.0
    domain_height: float = 1.0
    chord: float = 1.0
    height: float = 0.3
    center_x: float = 1.5

    def wall_y(self, x):
        """Lower-wall height at streamwise position(s) x."""
        x = np.asarray(x, dtype=float)
        y = np.zeros_like(x)
        if self.height <= 0.0:
            return y
        # circle through the arc endpoints with apex at `height`
        R = (0.25 * self.chord**2 + self.height**2) / (2.0 * self.height)
        yc = self.height - R
        dx = x - self.center_x
        on = np.abs(dx) <= 0.5 * self.chord
        y[on] = yc + np.sqrt(R**2 - dx[on] ** 2)
        return y

    def wall_polyline(self, n_samples: int = 20001) -> np.ndarray:
        """Dense (n, 2) sampling of the lower wall, for distance oracles."""
        xs = np.linspace(0.0, self.length, n_samples)
        return np.column_stack([xs, self.wall_y(xs)])


def build_bump_grid(ni: int, nj: int, params: BumpParams = BumpParams(),
                    scheme: str = "E4", ref_length: float = 1.0
                    ) -> CurvilinearGrid:
    """Body-fitted grid over the bump: j = 0 lies on the wall, vertical grid
    lines are sheared linearly to the flat upper boundary, metrics come from
    compute_metrics with the requested scheme."""
    _check_dims((ni, nj), (params.length, params.domain_height))
    xs = np.linspace(0.0, params.length, ni)
    yw = params.wall_y(xs)
    if np.any(yw >= params.domain_height):
        raise DegenerateMappingError("bump reaches the upper boundary")
    s = np.linspace(0.0, 1.0, nj)
    x2 = np.repeat(xs[:, None], nj, axis=1)
    y2 = yw[:, None] * (1.0 - s[None, :]) + params.domain_height * s[None, :]
    grid = CurvilinearGrid(coords=np.stack([x2, y2]), ref_length=ref_length)
    compute_metrics(grid, scheme)
    if np.any(grid.jacobian <= 0.0):
        raise DegenerateMappingError("bump grid mapping is degenerate (J <= 0)")
    return grid


def compute_metrics(grid: CurvilinearGrid, scheme: str = "E2"
                    ) -> CurvilinearGrid:
    """Fill metric terms and Jacobian by differencing the coordinates.

    The coordinate derivatives x_xi, x_eta, ... are taken with the chosen
    central scheme (upwind runs reuse E2), the per-node matrix
    [d x_m / d xi_l] is inverted, and J is the determinant of the inverse.
    """
    ndim = grid.ndim
    dims = grid.dims
    # fwd[m, l] = d x_m / d xi_l
    fwd = np.empty((ndim, ndim) + dims)
    for m in range(ndim):
        for l in range(ndim):
            fwd[m, l] = central_derivative(grid.coords[m], scheme, axis=l)

    if ndim == 2:
        det = fwd[0, 0] * fwd[1, 1] - fwd[0, 1] * fwd[1, 0]
        if np.any(np.abs(det) < 1e-14):
            raise SingularMetricError("metric matrix is singular at a node")
        inv_det = 1.0 / det
        metrics = np.empty((2, 2) + dims)
        metrics[0, 0] = fwd[1, 1] * inv_det    # xi_x
        metrics[0, 1] = -fwd[0, 1] * inv_det   # xi_y
        metrics[1, 0] = -fwd[1, 0] * inv_det   # eta_x
        metrics[1, 1] = fwd[0, 0] * inv_det    # eta_y
    else:
        mats = np.moveaxis(fwd.reshape(ndim, ndim, -1), -1, 0)
        det = np.linalg.det(mats)
        if np.any(np.abs(det) < 1e-14):
            raise SingularMetricError("metric matrix is singular at a node")
        inv = np.linalg.inv(mats)
        metrics = np.moveaxis(inv, 0, -1).reshape((ndim, ndim) + dims)
        inv_det = (1.0 / det).reshape(dims)

    grid.metrics = metrics
    grid.jacobian = np.asarray(inv_det).reshape(dims)
    return grid


def write_grid_csv(grid: CurvilinearGrid, path) -> None:
    """Plain-text grid dump, one row per node: i,j[,k],x,y[,z],J."""
    ndim = grid.ndim
    idx_names = ["i", "j", "k"][:ndim]
    coord_names = ["x", "y", "z"][:ndim]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(idx_names + coord_names + ["J"])
        for idx in np.ndindex(*grid.dims):
            row = list(idx) + [grid.coords[(d,) + idx] for d in range(ndim)]
            row.append(grid.jacobian[idx])
            writer.writerow(row)


def read_grid_csv(path):
    """Read back a grid dump; returns (index_array, coord_array, J)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ndim = sum(1 for name in header if name in ("x", "y", "z"))
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows)
    return (data[:, :ndim].astype(int), data[:, ndim:2 * ndim],
            data[:, 2 * ndim])
