"""Pseudo-time integration to steady state, plus the unsteady outer loop.

The steady driver marches d(phi)/dt* = tendency(phi) with a classical 4-stage
RK4 and per-node local time steps until the maximum change per pseudo step
drops below tol (normalized by the reference length).  Dirichlet walls, solid
masks and far-field zero-gradient faces are re-imposed after every stage; the
implicit filter (central schemes) runs once per step after the RK4 update.

Unsteady cases rebuild the solid mask from the prescribed body motion at each
physical step and warm-start from the previous field.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import formulations as forms
from .errors import BodyOutsideDomainError, DivergenceError
from .formulations import FormulationConfig, gamma_lad, gamma_standard, gradient_and_velocity
from .grid import CurvilinearGrid
from .operators import FilterConfig, apply_filter

_FACE_NAMES = ("imin", "imax", "jmin", "jmax", "kmin", "kmax")
WALL = "wall"
FARFIELD = "farfield"


@dataclass
class BoundarySpec:
    """Per-face boundary kinds plus an optional interior solid mask.

    faces maps imin/imax/jmin/jmax[/kmin/kmax] to "wall" (Dirichlet zero) or
    "farfield" (zero normal gradient, one-layer copy).  solid_mask marks
    nodes inside embedded bodies; phi is pinned to zero there.
    """

    faces: dict
    solid_mask: np.ndarray | None = None

    def __post_init__(self):
        for name, kind in self.faces.items():
            if name not in _FACE_NAMES:
                raise ValueError(f"unknown face {name!r}")
            if kind not in (WALL, FARFIELD):
                raise ValueError(f"unknown boundary kind {kind!r}")

    def ndim(self) -> int:
        return len(self.faces) // 2

    def has_wall(self) -> bool:
        if any(kind == WALL for kind in self.faces.values()):
            return True
        return self.solid_mask is not None and bool(np.any(self.solid_mask))

    def pinned_mask(self, dims) -> np.ndarray:
        """Boolean field of nodes held at zero (walls + solid)."""
        pinned = np.zeros(dims, dtype=bool)
        for axis in range(len(dims)):
            lo, hi = _face_pair(axis)
            if self.faces.get(lo) == WALL:
                pinned[_face_index(len(dims), axis, 0)] = True
            if self.faces.get(hi) == WALL:
                pinned[_face_index(len(dims), axis, -1)] = True
        if self.solid_mask is not None:
            pinned |= self.solid_mask
        return pinned


def _face_pair(axis):
    return _FACE_NAMES[2 * axis], _FACE_NAMES[2 * axis + 1]


def _face_index(ndim, axis, pos):
    idx = [slice(None)] * ndim
    idx[axis] = pos
    return tuple(idx)


def all_wall_faces(ndim: int) -> dict:
    return {name: WALL for name in _FACE_NAMES[:2 * ndim]}


def apply_boundary_conditions(phi: np.ndarray, boundary: BoundarySpec
                              ) -> np.ndarray:
    """Impose face conditions and the solid mask, in place.

    Far-field faces copy the adjacent interior layer (first-order ghost-free
    zero-gradient); wall faces and mask nodes are pinned to zero afterwards,
    so walls win at shared edges.
    """
    nd = phi.ndim
    for axis in range(nd):
        lo, hi = _face_pair(axis)
        if boundary.faces.get(lo) == FARFIELD:
            phi[_face_index(nd, axis, 0)] = phi[_face_index(nd, axis, 1)]
        if boundary.faces.get(hi) == FARFIELD:
            phi[_face_index(nd, axis, -1)] = phi[_face_index(nd, axis, -2)]
    for axis in range(nd):
        lo, hi = _face_pair(axis)
        if boundary.faces.get(lo) == WALL:
            phi[_face_index(nd, axis, 0)] = 0.0
        if boundary.faces.get(hi) == WALL:
            phi[_face_index(nd, axis, -1)] = 0.0
    if boundary.solid_mask is not None:
        phi[boundary.solid_mask] = 0.0
    return phi


@dataclass
class SolveConfig:
    """Everything a steady solve needs besides grid and boundary."""

    formulation: FormulationConfig = field(default_factory=FormulationConfig)
    scheme: str = "UW"
    filter_config: FilterConfig | None = None
    cfl: float = 0.5
    tol: float = 1e-5
    max_iters: int = 50000
    l2_every: int = 0      # sample the L2-vs-exact history every N iters

    def __post_init__(self):
        if self.cfl <= 0.0:
            raise ValueError("cfl must be positive")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")

    def uses_filter(self) -> bool:
        return self.filter_config is not None and self.scheme != "UW"


@dataclass
class SolveReport:
    """Converged field plus convergence/timing histories."""

    phi: np.ndarray
    iters: int
    residual_history: np.ndarray        # max |dphi|/Lref per iteration
    wall_seconds: np.ndarray            # cumulative loop seconds per iteration
    converged: bool
    l2_history: np.ndarray | None = None  # (iter, L2) samples, when requested
    phi_prime: np.ndarray | None = None   # Poisson auxiliary variable
    time: float | None = None             # physical time (unsteady runs)

    @property
    def loop_seconds(self) -> float:
        return float(self.wall_seconds[-1]) if self.iters else 0.0

    @property
    def wall_time_per_100_iters(self) -> float:
        return 100.0 * self.loop_seconds / max(self.iters, 1)


_DT_GUARD = 1e-30


def local_timestep(phi, grid: CurvilinearGrid, config: FormulationConfig,
                   cfl: float, scheme: str = "E2") -> np.ndarray:
    """Per-node pseudo time step from local advective/diffusive limits.

    dt* = cfl / (sum_l |U_hat_l| + 2*Gamma*sum_l S_l + guard), capped at
    cfl * (local minimum physical spacing) so the zero-gradient start is
    well defined.  The Poisson relaxation is purely diffusive:
    dt* = cfl / (2 * sum_l S_l).
    """
    sum_S = sum(grid.metric_row_sumsq(l) for l in range(grid.ndim))
    if config.kind == "poisson":
        return cfl / (2.0 * sum_S)
    gv = gradient_and_velocity(phi, grid, scheme)
    denom = sum(np.abs(u) for u in gv.Uhat)
    if config.kind in ("hj", "hj_curvature"):
        denom = denom + 2.0 * gamma_standard(phi, config.epsilon) * sum_S
    elif config.kind == "hj_lad":
        denom = denom + 2.0 * gamma_lad(
            phi, grid, config.epsilon, config.lad_c) * sum_S
    dt = cfl / (denom + _DT_GUARD)
    return np.minimum(dt, cfl * grid.min_spacing())


def rk4_step(phi, grid: CurvilinearGrid, config: SolveConfig, dt_field,
             boundary: BoundarySpec) -> np.ndarray:
    """One classical 4-stage RK step of d(phi)/dt* = tendency(phi).

    Boundary conditions and the solid mask are re-imposed after every stage;
    the diffusivity of the LAD formulation is therefore re-evaluated with
    each stage's field.  The implicit filter (when configured) runs once
    after the full update, followed by a final BC pass.
    """
    fc = config.formulation
    scheme = config.scheme

    def rate(p):
        return forms.tendency(p, grid, scheme, fc)

    k1 = rate(phi)
    p1 = apply_boundary_conditions(phi + 0.5 * dt_field * k1, boundary)
    k2 = rate(p1)
    p2 = apply_boundary_conditions(phi + 0.5 * dt_field * k2, boundary)
    k3 = rate(p2)
    p3 = apply_boundary_conditions(phi + dt_field * k3, boundary)
    k4 = rate(p3)
    out = phi + (dt_field / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    apply_boundary_conditions(out, boundary)

    if config.uses_filter():
        pinned = boundary.pinned_mask(grid.dims)
        for axis in range(grid.ndim):
            out = apply_filter(out, axis, config.filter_config, pinned=pinned)
        apply_boundary_conditions(out, boundary)

    limit = 1e6 * grid.ref_length
    if not np.all(np.isfinite(out)) or np.max(np.abs(out)) > limit:
        raise DivergenceError(
            f"pseudo-time iteration diverged (max |phi| > {limit:g})")
    return out


def solve_steady(grid: CurvilinearGrid, boundary: BoundarySpec,
                 config: SolveConfig, phi0=None, exact=None) -> SolveReport:
    """March to the steady wall-distance field.

    Stops when max |phi - phi_old| / Lref <= tol over non-mask nodes, or at
    max_iters (converged=False, no exception).  For the Poisson formulation
    the relaxation runs on phi' and the report's phi is the post-processed
    wall distance.  ``exact`` (a field) enables the optional L2 history,
    sampled every ``config.l2_every`` iterations outside the timed loop.
    """
    if not boundary.has_wall():
        raise ValueError("boundary spec pins no wall nodes (no Dirichlet anchor)")
    lref = grid.ref_length
    fc = config.formulation
    phi = grid.new_field() if phi0 is None else np.array(phi0, dtype=float)
    apply_boundary_conditions(phi, boundary)

    active = None
    if boundary.solid_mask is not None:
        active = ~boundary.solid_mask

    residuals = np.empty(config.max_iters)
    seconds = np.empty(config.max_iters)
    l2_samples = []
    elapsed = 0.0
    converged = False
    iters = 0

    while iters < config.max_iters:
        t0 = time.perf_counter()
        dt = local_timestep(phi, grid, fc, config.cfl, config.scheme)
        phi_new = rk4_step(phi, grid, config, dt, boundary)
        delta = np.abs(phi_new - phi)
        if active is not None:
            delta = delta[active]
        change = float(np.max(delta)) / lref
        elapsed += time.perf_counter() - t0

        if not math.isfinite(change):
            raise DivergenceError("non-finite residual in pseudo-time loop")
        phi = phi_new
        residuals[iters] = change
        seconds[iters] = elapsed
        iters += 1

        if exact is not None and config.l2_every > 0 \
                and iters % config.l2_every == 0:
            l2_samples.append((iters, _l2_vs_exact(phi, exact, grid, config)))

        if change <= config.tol:
            converged = True
            break

    report = SolveReport(
        phi=phi,
        iters=iters,
        residual_history=residuals[:iters].copy(),
        wall_seconds=seconds[:iters].copy(),
        converged=converged,
        l2_history=np.asarray(l2_samples) if l2_samples else None,
    )
    if fc.kind == "poisson":
        report.phi_prime = phi
        report.phi = forms.poisson_postprocess(phi, grid, config.scheme)
        apply_boundary_conditions(report.phi, boundary)
    return report


def _l2_vs_exact(phi, exact, grid, config):
    from .metrics import l2_norm
    if config.formulation.kind == "poisson":
        phi = forms.poisson_postprocess(phi, grid, config.scheme)
    return l2_norm(phi, exact, grid)


@dataclass(frozen=True)
class MotionSpec:
    """Prescribed body motion for the unsteady solver.

    piston_sinusoid: the solid occupies x <= x0 + amplitude*sin(2 pi t /
    period) inside a closed (all-wall) chamber.  bouncing_cube: a square of
    side ``size`` falls from rest at y_start under ``gravity`` between two
    parallel walls, losing ``energy_loss`` of its kinetic energy at every
    floor contact until it rests.  Times are in units of the reference time
    scale tau; physical_dt is the physical step between re-solves.
    """

    kind: str = "none"
    physical_dt: float = 0.05
    # piston
    x0: float = 0.3
    amplitude: float = 0.15
    period: float = 1.0
    # bouncing cube
    size: float = 0.2
    x_center: float = 0.5
    y_start: float = 0.7
    gravity: float = 2.0
    energy_loss: float = 0.2

    def __post_init__(self):
        if self.kind not in ("none", "piston_sinusoid", "bouncing_cube"):
            raise ValueError(f"unknown motion kind {self.kind!r}")
        if self.physical_dt <= 0.0:
            raise ValueError("physical_dt must be positive")

    def default_faces(self, ndim: int) -> dict:
        if self.kind == "piston_sinusoid":
            return all_wall_faces(ndim)
        if self.kind == "bouncing_cube":
            faces = {name: FARFIELD for name in _FACE_NAMES[:2 * ndim]}
            faces["jmin"] = WALL
            faces["jmax"] = WALL
            return faces
        return all_wall_faces(ndim)

    def piston_position(self, t: float) -> float:
        return self.x0 + self.amplitude * math.sin(2.0 * math.pi * t / self.period)

    def cube_center_y(self, t: float, floor_y: float) -> float:
        """Piecewise ballistic height of the cube center at time t.

        Free fall segments separated by instantaneous floor impacts; rebound
        speed scales by sqrt(1 - energy_loss).  Once the rebound apex falls
        below a resolution floor the cube is parked on the wall.
        """
        rest_y = floor_y + 0.5 * self.size
        g = self.gravity
        r = math.sqrt(1.0 - self.energy_loss)
        y, v, now = self.y_start, 0.0, 0.0
        for _ in range(10000):
            # time to impact from state (y, v): y + v*s - g*s^2/2 = rest_y
            a, b, c = -0.5 * g, v, y - rest_y
            disc = b * b - 4.0 * a * c
            s_hit = (-b - math.sqrt(max(disc, 0.0))) / (2.0 * a)
            if t - now < s_hit:
                s = t - now
                return y + v * s - 0.5 * g * s * s
            now += s_hit
            v = -(v - g * s_hit) * r  # rebound with 20% energy loss
            y = rest_y
            if v * v / (2.0 * g) < 1e-4 * self.size:
                return rest_y  # parked
        return rest_y

    def body_mask(self, grid: CurvilinearGrid, t: float) -> np.ndarray | None:
        """Solid-node mask at physical time t (nearest-node quantization)."""
        if self.kind == "none":
            return None
        x, y = grid.x, grid.y
        dx = (x.max() - x.min()) / (grid.dims[0] - 1)
        dy = (y.max() - y.min()) / (grid.dims[1] - 1)
        if self.kind == "piston_sinusoid":
            xp = self.piston_position(t)
            if not x.min() < xp < x.max():
                raise BodyOutsideDomainError(
                    f"piston face x={xp:.4f} leaves the domain at t={t:.4f}")
            return x <= xp + 0.5 * dx
        yc = self.cube_center_y(t, floor_y=y.min())
        half = 0.5 * self.size
        if yc + half > y.max() or self.x_center - half < x.min() \
                or self.x_center + half > x.max():
            raise BodyOutsideDomainError(
                f"cube leaves the domain at t={t:.4f}")
        return ((np.abs(x - self.x_center) <= half + 0.5 * dx)
                & (np.abs(y - yc) <= half + 0.5 * dy))


def solve_unsteady(grid: CurvilinearGrid, motion: MotionSpec,
                   config: SolveConfig, n_steps: int,
                   faces: dict | None = None) -> list[SolveReport]:
    """Re-solve the wall distance as the body moves.

    At every physical step the solid mask is rebuilt at t = step *
    physical_dt and the steady solver runs warm-started from the previous
    field, which is what makes the later steps cheap.
    """
    if faces is None:
        faces = motion.default_faces(grid.ndim)
    reports = []
    phi = None
    for step in range(n_steps):
        t = step * motion.physical_dt
        boundary = BoundarySpec(faces=dict(faces),
                                solid_mask=motion.body_mask(grid, t))
        report = solve_steady(grid, boundary, config, phi0=phi)
        report.time = t
        reports.append(report)
        phi = report.phi
    return reports
