"""Residual evaluators in generalized coordinates.

Five formulations drive the pseudo-time solver:

* ``eikonal``       U . grad(phi) = 1
* ``hj``            U . grad(phi) = 1 + eps*phi * lap(phi)
* ``hj_lad``        as hj, with the diffusivity limited by a fourth-derivative
                    sensor so it only acts where dispersion errors appear
* ``hj_curvature``  hj with the convex-curvature correction
                    (eps*phi + nu) * (lap(phi) - MAX(0, |grad phi| kappa))
* ``poisson``       lap(phi') = -1, with the algebraic map back to phi

All spatial terms are contracted through the grid metrics; the advection term
uses either the upwind flux or the plain product U_hat * dphi depending on the
scheme.  The Laplacian is always assembled centrally (E2 under upwind
advection) as first derivatives of the gradient components.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NegativeRadicandError
from .grid import CurvilinearGrid
from .operators import (
    central_derivative,
    flux_from_bf,
    fourth_derivative,
    front_derivative_from_bf,
    one_sided_differences,
)

FORMULATIONS = ("eikonal", "hj", "hj_lad", "hj_curvature", "poisson")


@dataclass(frozen=True)
class FormulationConfig:
    """Formulation choice plus its coefficients.

    epsilon is the diffusivity slope Gamma = eps*phi (paper range 0.1-1;
    zero is allowed so the reduction HJ(eps=0) == Eikonal stays testable).
    lad_c scales the fourth-derivative sensor; eps0 regularizes the unit
    normal in the curvature term (defaults to 1e-12/Lref at evaluation).
    """

    kind: str = "eikonal"
    epsilon: float = 0.2
    lad_c: float = 0.1
    eps0: float | None = None

    def __post_init__(self):
        if self.kind not in FORMULATIONS:
            raise ValueError(
                f"unknown formulation {self.kind!r}; expected {FORMULATIONS}")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be non-negative")
        if self.lad_c < 0.0:
            raise ValueError("lad_c must be non-negative")
        if self.eps0 is not None and self.eps0 <= 0.0:
            raise ValueError("eps0 must be positive")


class GradientVelocity(NamedTuple):
    """Directional derivatives and front-propagation velocities of phi."""

    dphi: tuple      # d(phi)/d(xi_l) per direction, scheme-dependent
    U: tuple         # Cartesian gradient components U_x, U_y[, U_z]
    Uhat: tuple      # contravariant velocities U_hat, V_hat[, W_hat]
    bf: tuple | None  # per-direction (B, F) pairs for UW runs, else None


def _directional_derivatives(phi, grid, scheme):
    """(dphi_l, bf) with the scheme's own first-derivative operator."""
    if scheme == "UW":
        bf = tuple(one_sided_differences(phi, axis=l)
                   for l in range(grid.ndim))
        dphi = tuple(front_derivative_from_bf(B, F) for B, F in bf)
        return dphi, bf
    dphi = tuple(central_derivative(phi, scheme, axis=l)
                 for l in range(grid.ndim))
    return dphi, None


def _assemble_cartesian(dphi, grid):
    """U_m = sum_l (d xi_l / d x_m) * dphi_l."""
    nd = grid.ndim
    return tuple(
        sum(grid.metric(l, m) * dphi[l] for l in range(nd)) for m in range(nd))


def _assemble_contravariant(U, grid):
    """U_hat_l = sum_m (d xi_l / d x_m) * U_m."""
    nd = grid.ndim
    return tuple(
        sum(grid.metric(l, m) * U[m] for m in range(nd)) for l in range(nd))


def gradient_and_velocity(phi, grid: CurvilinearGrid, scheme: str
                          ) -> GradientVelocity:
    """Gradient components and contravariant front velocities of phi.

    Directional derivatives use the front-selected upwind formula for UW and
    the matching central scheme otherwise.
    """
    dphi, bf = _directional_derivatives(phi, grid, scheme)
    U = _assemble_cartesian(dphi, grid)
    Uhat = _assemble_contravariant(U, grid)
    return GradientVelocity(dphi=dphi, U=U, Uhat=Uhat, bf=bf)


def _advection(gv: GradientVelocity, grid, scheme):
    """U_hat_l * dphi_l summed over directions (upwind flux for UW)."""
    if scheme == "UW":
        terms = [flux_from_bf(gv.Uhat[l], *gv.bf[l])
                 for l in range(grid.ndim)]
    else:
        terms = [gv.Uhat[l] * gv.dphi[l] for l in range(grid.ndim)]
    return sum(terms)


def _laplacian_scheme(scheme):
    # the baseline UW solver pairs upwind advection with an E2 Laplacian
    return "E2" if scheme == "UW" else scheme

def _central_gradient(phi, grid, scheme):
    csch = _laplacian_scheme(scheme)
    dphi = tuple(central_derivative(phi, csch, axis=l)
                 for l in range(grid.ndim))
    return _assemble_cartesian(dphi, grid), csch


def _divergence(V, grid, csch):
    """div(V) = sum_m sum_l (d xi_l / d x_m) * d(V_m)/d(xi_l), central."""
    nd = grid.ndim
    out = 0.0
    for m in range(nd):
        for l in range(nd):
            out = out + grid.metric(l, m) * central_derivative(
                V[m], csch, axis=l)
    return out


def _laplacian(phi, grid, scheme):
    """lap(phi) assembled as central first derivatives of the (central)
    gradient components, per the transformed-equation form."""
    U, csch = _central_gradient(phi, grid, scheme)
    return _divergence(U, grid, csch)


def eikonal_residual(phi, grid: CurvilinearGrid, scheme: str):
    """1 - U . grad(phi); zero when |grad phi| = 1."""
    gv = gradient_and_velocity(phi, grid, scheme)
    return 1.0 - _advection(gv, grid, scheme)


def gamma_standard(phi, epsilon: float):
    """Linear diffusivity Gamma = eps * phi."""
    return epsilon * np.asarray(phi, dtype=float)


def gamma_lad(phi, grid: CurvilinearGrid, epsilon: float, lad_c: float):
    """Fourth-derivative-limited diffusivity.

    Gamma = MIN(eps*phi, C |sum_l S_l^2 d4(phi)/dxi_l^4 dx_l^3|) with the
    local spacing dx_l = S_l^(-1/2); the S_l^2 * dx_l^3 factor therefore
    reduces to sqrt(S_l), which is what gets evaluated.
    """
    sensor = 0.0
    for l in range(grid.ndim):
        S_l = grid.metric_row_sumsq(l)
        sensor = sensor + np.sqrt(S_l) * fourth_derivative(phi, axis=l)
    return np.minimum(epsilon * np.asarray(phi, dtype=float),
                      lad_c * np.abs(sensor))


def _gradient_for_laplacian(phi, gv, grid, scheme):
    """Central gradient components feeding the Laplacian; a central-scheme
    run reuses the advection gradient, an upwind run gets a fresh E2 one."""
    if scheme == "UW":
        return _central_gradient(phi, grid, scheme)
    return gv.U, scheme


def hj_residual(phi, grid: CurvilinearGrid, scheme: str,
                config: FormulationConfig):
    """1 + Gamma*lap(phi) - U . grad(phi), Gamma per config.kind."""
    gv = gradient_and_velocity(phi, grid, scheme)
    if config.kind == "hj_lad":
        gamma = gamma_lad(phi, grid, config.epsilon, config.lad_c)
    else:
        gamma = gamma_standard(phi, config.epsilon)
    U, csch = _gradient_for_laplacian(phi, gv, grid, scheme)
    lap = _divergence(U, grid, csch)
    return 1.0 + gamma * lap - _advection(gv, grid, scheme)


def hj_curvature_residual(phi, grid: CurvilinearGrid, scheme: str,
                          config: FormulationConfig):
    """Curvature-corrected HJ residual.

    1 + (eps*phi + nu) * (lap(phi) - MAX(0, |grad phi| kappa)) - U . grad(phi)
    with nu = 0.001 (1 - |grad phi|)^2 and kappa = div(grad phi / (|grad phi|
    + eps0)).  Only convex curvature (kappa > 0) is corrected.
    """
    gv = gradient_and_velocity(phi, grid, scheme)
    U, csch = _gradient_for_laplacian(phi, gv, grid, scheme)
    lap = _divergence(U, grid, csch)

    grad_mag = np.sqrt(sum(u * u for u in U))
    eps0 = config.eps0 if config.eps0 is not None else 1e-12 / grid.ref_length
    normal = tuple(u / (grad_mag + eps0) for u in U)
    kappa = _divergence(normal, grid, csch)

    nu = 0.001 * (1.0 - grad_mag) ** 2
    gamma = config.epsilon * np.asarray(phi, dtype=float) + nu
    correction = lap - np.maximum(0.0, grad_mag * kappa)
    return 1.0 + gamma * correction - _advection(gv, grid, scheme)


def poisson_residual(phi_prime, grid: CurvilinearGrid, scheme: str):
    """-1 - lap(phi'): zero at the steady state lap(phi') = -1.

    Note the sign: the pseudo-time tendency that relaxes phi' stably is the
    negative of this residual (forward heat equation with a unit source).
    """
    return -1.0 - _laplacian(phi_prime, grid, scheme)


def residual(phi, grid: CurvilinearGrid, scheme: str,
             config: FormulationConfig):
    """Dispatch to the configured formulation's residual."""
    if config.kind == "eikonal":
        return eikonal_residual(phi, grid, scheme)
    if config.kind in ("hj", "hj_lad"):
        return hj_residual(phi, grid, scheme, config)
    if config.kind == "hj_curvature":
        return hj_curvature_residual(phi, grid, scheme, config)
    return poisson_residual(phi, grid, scheme)


def tendency(phi, grid: CurvilinearGrid, scheme: str,
             config: FormulationConfig):
    """Pseudo-time derivative d(phi)/dt*.

    Equals the residual for the advective formulations; the Poisson residual
    is negated so the relaxation runs as a (stable) forward heat equation.
    """
    r = residual(phi, grid, scheme, config)
    return -r if config.kind == "poisson" else r


def poisson_postprocess(phi_prime, grid: CurvilinearGrid, scheme: str):
    """Recover the wall distance from the converged Poisson variable.

    phi = -|grad phi'| + sqrt(|grad phi'|^2 + 2 phi'); the negative branch
    makes phi = 0 wherever phi' = 0 with a nonzero gradient.
    """
    pp = np.asarray(phi_prime, dtype=float)
    pp = np.where((pp < 0.0) & (pp > -1e-12), 0.0, pp)
    U, _ = _central_gradient(pp, grid, scheme)
    grad_sq = sum(u * u for u in U)
    radicand = grad_sq + 2.0 * pp
    if np.any(radicand < -1e-12):
        raise NegativeRadicandError(
            f"min radicand {np.min(radicand):.3e} in the Poisson map")
    radicand = np.maximum(radicand, 0.0)
    return -np.sqrt(grad_sq) + np.sqrt(radicand)
