"""Spatial discretization kernels on unit-spaced grid lines.

All operators assume the computational spacing is one (the physical spacing
lives in the grid metrics) and act along a chosen axis of an nd-array, so the
same kernels serve 1-D lines, 2-D fields and 3-D fields.

Schemes
-------
UW          first-order upwind with wave-front direction selectors
E2, E4      explicit central, 2nd / 4th order
C4, C6      compact (Pade) central, 4th / 6th order, tridiagonal
F10         implicit 10th-order low-pass filter, order reduced toward walls
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import LineTooShortError, ZeroPivotError

CENTRAL_SCHEMES = ("E2", "E4", "C4", "C6")
SCHEMES = ("UW",) + CENTRAL_SCHEMES

# Interior relation  alpha*d[i-1] + d[i] + alpha*d[i+1] =
#   a*(phi[i+1]-phi[i-1])/2 + b*(phi[i+2]-phi[i-2])/4     (unit spacing)
_SCHEME_COEFFS = {
    "E2": (0.0, 1.0, 0.0),
    "E4": (0.0, 4.0 / 3.0, -1.0 / 3.0),
    "C4": (0.25, 1.5, 0.0),
    "C6": (1.0 / 3.0, 14.0 / 9.0, 1.0 / 9.0),
}

_MIN_LEN = {"UW": 3, "E2": 3, "E4": 5, "C4": 7, "C6": 7}


def scheme_order(scheme: str) -> int:
    return {"UW": 1, "E2": 2, "E4": 4, "C4": 4, "C6": 6}[scheme]


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _check_length(n: int, need: int, what: str) -> None:
    if n < need:
        raise LineTooShortError(f"{what} needs at least {need} points, got {n}")


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system (batched over RHS columns).

    Row i reads: lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i],
    with lower[0] and upper[-1] ignored.  ``rhs`` may be (n,) or (n, m); the
    same matrix is applied to every column, which is how whole planes of grid
    lines are differenced or filtered in one call.

    Raises ZeroPivotError if elimination hits a zero pivot.
    """
    diag = np.asarray(diag, dtype=float)
    n = diag.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    if n == 1:
        if diag[0] == 0.0:
            raise ZeroPivotError("1x1 tridiagonal system with zero diagonal")
        return rhs / diag[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = np.asarray(upper, dtype=float)[:-1]
    ab[1, :] = diag
    ab[2, :-1] = np.asarray(lower, dtype=float)[1:]
    try:
        return scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False,
                                         overwrite_ab=True)
    except np.linalg.LinAlgError as exc:
        raise ZeroPivotError(str(exc)) from exc


def _moved(values, axis):
    v = np.asarray(values, dtype=float)
    if v.ndim == 1 and axis == 0:
        return v
    return np.moveaxis(v, axis, 0)


def _restore(work, values_ndim, axis):
    if values_ndim == 1 and axis == 0:
        return work
    return np.moveaxis(work, 0, axis)


def central_derivative(line_values, scheme: str, axis: int = 0):
    """First derivative along ``axis`` with an E2/E4/C4/C6 scheme.

    Interior points follow the scheme's central relation; the first/last two
    points use one-sided closures of matching (explicit) or reduced-by-one
    (compact) order.  Exact on constants and linears everywhere.
    """
    _check_scheme(scheme)
    if scheme == "UW":
        raise ValueError("use upwind_front_derivative for the UW scheme")
    w = _moved(line_values, axis)
    n = w.shape[0]
    _check_length(n, _MIN_LEN[scheme], f"{scheme} derivative")
    alpha, a, b = _SCHEME_COEFFS[scheme]

    rhs = np.empty_like(w)
    if b != 0.0:
        rhs[2:-2] = 0.5 * a * (w[3:-1] - w[1:-3]) + 0.25 * b * (w[4:] - w[:-4])
    else:
        rhs[1:-1] = 0.5 * a * (w[2:] - w[:-2])

    if alpha == 0.0:
        if scheme == "E2":
            rhs[0] = -1.5 * w[0] + 2.0 * w[1] - 0.5 * w[2]
            rhs[-1] = 1.5 * w[-1] - 2.0 * w[-2] + 0.5 * w[-3]
        else:  # E4: 4th-order one-sided / biased closures
            rhs[0] = (-25.0 * w[0] + 48.0 * w[1] - 36.0 * w[2]
                      + 16.0 * w[3] - 3.0 * w[4]) / 12.0
            rhs[1] = (-3.0 * w[0] - 10.0 * w[1] + 18.0 * w[2]
                      - 6.0 * w[3] + w[4]) / 12.0
            rhs[-1] = (25.0 * w[-1] - 48.0 * w[-2] + 36.0 * w[-3]
                       - 16.0 * w[-4] + 3.0 * w[-5]) / 12.0
            rhs[-2] = (3.0 * w[-1] + 10.0 * w[-2] - 18.0 * w[-3]
                       + 6.0 * w[-4] - w[-5]) / 12.0
        return _restore(rhs, np.ndim(line_values), axis)

    # Compact: boundary rows are the classical 4th-order one-sided compact
    # closure; C6 additionally falls back to the C4 relation one point in.
    lower = np.full(n, alpha)
    diag = np.ones(n)
    upper = np.full(n, alpha)
    lower[0] = 0.0
    upper[0] = 3.0
    rhs[0] = (-17.0 * w[0] + 9.0 * w[1] + 9.0 * w[2] - w[3]) / 6.0
    upper[-1] = 0.0
    lower[-1] = 3.0
    rhs[-1] = (17.0 * w[-1] - 9.0 * w[-2] - 9.0 * w[-3] + w[-4]) / 6.0
    if b != 0.0:  # C6 second/penultimate rows: C4 interior relation
        lower[1] = upper[1] = 0.25
        rhs[1] = 0.75 * (w[2] - w[0])
        lower[-2] = upper[-2] = 0.25
        rhs[-2] = 0.75 * (w[-1] - w[-3])

    sol = solve_tridiagonal(lower, diag, upper, rhs.reshape(n, -1))
    return _restore(sol.reshape(w.shape), np.ndim(line_values), axis)


def one_sided_differences(line_values, axis: int = 0):
    """Backward/forward first differences B, F (unit spacing).

    At the line ends the missing difference is replaced by the available one
    (B[0] = F[0], F[-1] = B[-1]), so boundary points see the single one-sided
    difference.
    """
    w = _moved(line_values, axis)
    n = w.shape[0]
    _check_length(n, 3, "one-sided differences")
    B = np.empty_like(w)
    F = np.empty_like(w)
    B[1:] = w[1:] - w[:-1]
    F[:-1] = B[1:]
    B[0] = F[0]
    F[-1] = B[-1]
    nd = np.ndim(line_values)
    return _restore(B, nd, axis), _restore(F, nd, axis)


def _sign1(x):
    # Fortran SIGN(1, x): +1 for x >= 0, -1 otherwise
    return np.where(x >= 0.0, 1.0, -1.0)


def _front_selectors(B, F):
    s_fb = _sign1(F + B)
    n_im1 = 0.25 * (1.0 + s_fb) * (1.0 + _sign1(B))
    n_ip1 = 0.25 * (1.0 - s_fb) * (1.0 - _sign1(F))
    return n_im1, n_ip1


def front_derivative_from_bf(B, F):
    """Front-selected derivative with the conventional upwind pairing,
    n_{i-1}*B + n_{i+1}*F.

    This is the pairing the solver must use: the selector firing on the
    wall-front side has to pick the difference on that same side, or a
    distance front can never grow off a wall (the published formula pairs
    them the other way round; see upwind_front_derivative).
    """
    n_im1, n_ip1 = _front_selectors(B, F)
    return n_im1 * B + n_ip1 * F


def upwind_front_derivative(line_values, axis: int = 0,
                            pairing: str = "as_written"):
    """First derivative along ``axis`` with upwind front-direction selectors
    (Fortran SIGN(1, 0) = +1); a local minimum of phi (seed point) yields
    zero.

    pairing="as_written" reproduces the baseline formula exactly as printed,
    n_{i-1}*F + n_{i+1}*B, whose selected branch points away from the wall
    front; pairing="upwind" swaps to the conventional n_{i-1}*B + n_{i+1}*F
    used by the solver.
    """
    B, F = one_sided_differences(line_values, axis)
    n_im1, n_ip1 = _front_selectors(B, F)
    if pairing == "as_written":
        return n_im1 * F + n_ip1 * B
    if pairing == "upwind":
        return n_im1 * B + n_ip1 * F
    raise ValueError(f"unknown pairing {pairing!r}")


def flux_from_bf(u_hat, B, F):
    """Upwind advective flux 0.5(U+|U|)B + 0.5(U-|U|)F."""
    au = np.abs(u_hat)
    return 0.5 * ((u_hat + au) * B + (u_hat - au) * F)


def upwind_flux(u_hat_line, phi_line, axis: int = 0):
    """Upwind advection term U*dphi along ``axis``.

    Positive contravariant velocity selects the backward difference, negative
    the forward one, zero gives zero.
    """
    u_hat = np.asarray(u_hat_line, dtype=float)
    phi = np.asarray(phi_line, dtype=float)
    if u_hat.shape != phi.shape:
        raise ValueError("u_hat and phi must have identical shapes")
    B, F = one_sided_differences(phi, axis)
    return flux_from_bf(u_hat, B, F)


def fourth_derivative(line_values, axis: int = 0):
    """Centered 5-point fourth derivative; boundary points copy the nearest
    interior value (the result feeds a MIN-limited diffusivity, not a
    convergent derivative, so a smooth extension is preferred over one-sided
    stencils)."""
    w = _moved(line_values, axis)
    n = w.shape[0]
    _check_length(n, 5, "fourth derivative")
    out = np.empty_like(w)
    out[2:-2] = w[:-4] - 4.0 * w[1:-3] + 6.0 * w[2:-2] - 4.0 * w[3:-1] + w[4:]
    out[0] = out[2]
    out[1] = out[2]
    out[-1] = out[-3]
    out[-2] = out[-3]
    return _restore(out, np.ndim(line_values), axis)


@dataclass(frozen=True)
class FilterConfig:
    """Implicit filter setup: 10th order interior, reduced to 2nd at walls.

    alpha_f in [0.40, 0.5]; 0.5 makes the filter the identity, the practical
    stabilization range is 0.48-0.495.
    """

    alpha_f: float = 0.49

    def __post_init__(self):
        if not 0.40 <= self.alpha_f <= 0.5:
            raise ValueError(
                f"alpha_f must lie in [0.40, 0.5], got {self.alpha_f}")


def _filter_coeffs(order_half: int, af: float):
    """RHS coefficients a_0..a_N of the 2N-th order implicit filter."""
    if order_half == 1:
        return (0.5 + af, 0.5 + af)
    if order_half == 2:
        return ((5.0 + 6.0 * af) / 8.0,
                (1.0 + 2.0 * af) / 2.0,
                (-1.0 + 2.0 * af) / 8.0)
    if order_half == 3:
        return ((11.0 + 10.0 * af) / 16.0,
                (15.0 + 34.0 * af) / 32.0,
                (-3.0 + 6.0 * af) / 16.0,
                (1.0 - 2.0 * af) / 32.0)
    if order_half == 4:
        return ((93.0 + 70.0 * af) / 128.0,
                (7.0 + 18.0 * af) / 16.0,
                (-7.0 + 14.0 * af) / 32.0,
                (1.0 - 2.0 * af) / 16.0,
                (-1.0 + 2.0 * af) / 128.0)
    if order_half == 5:
        return ((193.0 + 126.0 * af) / 256.0,
                (105.0 + 302.0 * af) / 256.0,
                (-15.0 + 30.0 * af) / 64.0,
                (45.0 - 90.0 * af) / 512.0,
                (-5.0 + 10.0 * af) / 256.0,
                (1.0 - 2.0 * af) / 512.0)
    raise ValueError(f"no filter of half-order {order_half}")


def _filter_rhs_row(w, i, coeffs):
    row = coeffs[0] * w[i]
    for k in range(1, len(coeffs)):
        row = row + 0.5 * coeffs[k] * (w[i + k] + w[i - k])
    return row


def apply_filter(field, axis: int, filter_config: FilterConfig, pinned=None):
    """Implicit low-pass filter along ``axis``.

    Endpoints pass through unfiltered; points 1..4 from a boundary use the
    2nd/4th/6th/8th-order centered formulas, the rest the 10th-order one, so
    short lines automatically fall back to whatever order fits.  Nodes where
    ``pinned`` is True (Dirichlet walls, solid masks) are restored afterwards.
    """
    af = filter_config.alpha_f
    v = np.asarray(field, dtype=float)
    w = _moved(v, axis)
    n = w.shape[0]
    if n < 3:
        out = v.copy()
        if pinned is not None:
            out[pinned] = v[pinned]
        return out

    rhs = np.empty_like(w)
    rhs[0] = w[0]
    rhs[-1] = w[-1]
    full = _filter_coeffs(5, af)
    if n >= 12:
        rhs[5:n - 5] = (full[0] * w[5:n - 5]
                        + 0.5 * full[1] * (w[6:n - 4] + w[4:n - 6])
                        + 0.5 * full[2] * (w[7:n - 3] + w[3:n - 7])
                        + 0.5 * full[3] * (w[8:n - 2] + w[2:n - 8])
                        + 0.5 * full[4] * (w[9:n - 1] + w[1:n - 9])
                        + 0.5 * full[5] * (w[10:n] + w[0:n - 10]))
        near = [i for i in range(1, 5)] + [i for i in range(n - 5, n - 1)]
    else:
        near = list(range(1, n - 1))
    for i in near:
        half = min(i, n - 1 - i, 5)
        rhs[i] = _filter_rhs_row(w, i, _filter_coeffs(half, af))

    # Endpoint rows are identity (boundary values pass through).
    lower = np.full(n, af)
    diag = np.ones(n)
    upper = np.full(n, af)
    upper[0] = 0.0
    lower[-1] = 0.0

    sol = solve_tridiagonal(lower, diag, upper, rhs.reshape(n, -1))
    out = np.ascontiguousarray(_restore(sol.reshape(w.shape), v.ndim, axis))
    if pinned is not None:
        out[pinned] = v[pinned]
    return out
