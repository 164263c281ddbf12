"""Error norms, exact-distance oracles and run diagnostics.

The closed-form distances (flat plate, channel, boxes) are exact; curved or
moving geometry falls back to a brute-force oracle that samples the wall
curves densely and takes the minimum Euclidean distance, which is itself
validated against the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewIterationsError
from .formulations import gradient_and_velocity
from .grid import CurvilinearGrid


def sampled_wall_distance(points, wall_points) -> np.ndarray:
    """Minimum Euclidean distance from each query point to a wall sampling.

    points: (n, d) queries; wall_points: (m, d) dense samples of the wall
    curves.  Chunked so the (n, m) distance matrix never materializes whole.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    wall = np.asarray(wall_points, dtype=float)
    out = np.empty(pts.shape[0])
    chunk = max(1, int(2e7) // max(wall.shape[0], 1))
    for start in range(0, pts.shape[0], chunk):
        block = pts[start:start + chunk]
        d2 = np.sum((block[:, None, :] - wall[None, :, :]) ** 2, axis=2)
        out[start:start + chunk] = np.sqrt(np.min(d2, axis=1))
    return out


def exact_distance(case_id: str, point, time: float | None = None) -> float:
    """Exact (or oracle) wall distance for a canonical case at one point."""
    from . import cases
    case = cases.get_case(case_id)
    pt = np.asarray(point, dtype=float)
    return float(case.exact(pt[None, :], time)[0])


def exact_field(case_id: str, grid: CurvilinearGrid,
                time: float | None = None) -> np.ndarray:
    """Exact wall distance evaluated at every grid node."""
    from . import cases
    case = cases.get_case(case_id)
    pts = grid.coords.reshape(grid.ndim, -1).T
    return case.exact(pts, time).reshape(grid.dims)


def l2_norm(phi, phi_exact, grid: CurvilinearGrid) -> float:
    """Area/volume-weighted global L2 error norm.

    Weight per node is the inverse Jacobian (local cell area/volume), which
    reduces to dx*dy on a uniform Cartesian grid.
    """
    phi = np.asarray(phi, dtype=float)
    phi_exact = np.asarray(phi_exact, dtype=float)
    if phi.shape != phi_exact.shape or phi.shape != grid.dims:
        raise ValueError(
            f"shape mismatch: {phi.shape} vs {phi_exact.shape} vs {grid.dims}")
    w = 1.0 / grid.jacobian
    return float(np.sqrt(np.sum(w * (phi - phi_exact) ** 2)))


@dataclass
class ErrorHistogram:
    """Percentage-error histogram over the counted (non-wall) nodes."""

    bin_edges: np.ndarray
    counts: np.ndarray
    mean_pct: float
    total: int

    def fraction_within(self, lo_pct: float, hi_pct: float) -> float:
        """Fraction of counted nodes with lo <= error% <= hi (bin-resolved)."""
        centers = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        inside = (centers >= lo_pct) & (centers <= hi_pct)
        return float(np.sum(self.counts[inside]) / self.total)


# bin-width presets: HJ errors live in 0-10%, Eikonal errors in +-0.2%
HIST_BIN_PCT_HJ = 0.5
HIST_BIN_PCT_EIKONAL = 0.05


def percentage_errors(phi, exact, exclude=None) -> np.ndarray:
    """(d_act - d)/d_act * 100 over nodes with d_act > 0, minus exclusions.

    Positive means under-prediction.  Wall nodes (d_act = 0) are always
    excluded; ``exclude`` adds solid-mask nodes.
    """
    phi = np.asarray(phi, dtype=float)
    exact = np.asarray(exact, dtype=float)
    keep = exact > 0.0
    if exclude is not None:
        keep &= ~exclude
    return (exact[keep] - phi[keep]) / exact[keep] * 100.0


def error_histogram(phi, grid: CurvilinearGrid, case_id: str,
                    time: float | None = None,
                    bin_width_pct: float = HIST_BIN_PCT_HJ,
                    exclude=None) -> ErrorHistogram:
    """Histogram of percentage wall-distance errors against the case oracle."""
    exact = exact_field(case_id, grid, time)
    errs = percentage_errors(phi, exact, exclude=exclude)
    lo = np.floor(errs.min() / bin_width_pct) * bin_width_pct
    hi = np.ceil(errs.max() / bin_width_pct) * bin_width_pct
    if hi <= lo:
        hi = lo + bin_width_pct
    nbins = int(round((hi - lo) / bin_width_pct))
    counts, edges = np.histogram(errs, bins=nbins, range=(lo, hi))
    return ErrorHistogram(bin_edges=edges, counts=counts,
                          mean_pct=float(np.mean(errs)), total=errs.size)


def gradient_magnitude(phi, grid: CurvilinearGrid, scheme: str) -> np.ndarray:
    """|grad phi| diagnostic (1 everywhere for a perfect Eikonal solution)."""
    gv = gradient_and_velocity(phi, grid, scheme)
    return np.sqrt(sum(u * u for u in gv.U))


def timing_probe(report) -> float:
    """Seconds per 100 pseudo iterations of the solve loop (setup excluded)."""
    if report.iters < 100:
        raise TooFewIterationsError(
            f"timing needs >= 100 iterations, got {report.iters}")
    return report.wall_time_per_100_iters


def summary_record(case: str, formulation: str, scheme: str, grid_dims,
                   report, l2: float | None = None,
                   max_pct_err: float | None = None) -> dict:
    """Flat run summary used by the CLI artifacts and compare tables."""
    return {
        "case": case,
        "formulation": formulation,
        "scheme": scheme,
        "grid": "x".join(str(n) for n in grid_dims),
        "iters": report.iters,
        "converged": report.converged,
        "l2": l2,
        "max_pct_err": max_pct_err,
        "sec_per_100": report.wall_time_per_100_iters,
    }
