import numpy as np
import pytest

from walldist.errors import DegenerateMappingError, DimensionTooSmallError
from walldist.grid import (
    BumpParams,
    CurvilinearGrid,
    build_bump_grid,
    build_cartesian,
    compute_metrics,
    read_grid_csv,
    write_grid_csv,
)


class TestCartesian:
    def test_node_positions(self):
        g = build_cartesian(11, 11, Lx=1.0, Ly=1.0)
        assert g.x[5, 5] == pytest.approx(0.5)
        assert g.y[5, 5] == pytest.approx(0.5)

    def test_analytic_metrics(self):
        g = build_cartesian(11, 21, Lx=1.0, Ly=2.0)
        np.testing.assert_allclose(g.metric(1, 1), 10.0)   # eta_y = 1/dy
        np.testing.assert_allclose(g.metric(0, 0), 10.0)
        np.testing.assert_allclose(g.metric(0, 1), 0.0)
        np.testing.assert_allclose(g.metric(1, 0), 0.0)

    def test_analytic_jacobian(self):
        g = build_cartesian(5, 5, Lx=1.0, Ly=1.0)
        np.testing.assert_allclose(g.jacobian, 16.0)

    def test_3d(self):
        g = build_cartesian(6, 7, 8, Lx=1.0, Ly=2.0, Lz=0.5)
        assert g.ndim == 3
        assert g.dims == (6, 7, 8)
        np.testing.assert_allclose(g.metric(2, 2), 7.0 / 0.5)
        np.testing.assert_allclose(g.jacobian, 5.0 * 3.0 * 14.0)

    def test_too_small(self):
        with pytest.raises(DimensionTooSmallError):
            build_cartesian(4, 11)
        with pytest.raises(ValueError):
            build_cartesian(11, 11, Lx=-1.0)

    def test_computed_metrics_match_analytic(self):
        g = build_cartesian(11, 11, Lx=1.0, Ly=1.0)
        analytic = g.metrics.copy()
        compute_metrics(g, "E2")
        np.testing.assert_allclose(g.metrics, analytic, atol=1e-12)
        np.testing.assert_allclose(g.jacobian, 100.0, atol=1e-10)


class TestComputeMetrics:
    def test_rotated_grid(self):
        # 45-degree rotated uniform grid: |grad xi| = |grad eta| and the
        # cross terms are equal and opposite, per the rotated metric tensor.
        n, d = 12, 0.1
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        x = d * (c * i - s * j)
        y = d * (s * i + c * j)
        g = CurvilinearGrid(coords=np.stack([x, y]))
        compute_metrics(g, "E2")
        gx = np.hypot(g.metric(0, 0), g.metric(0, 1))
        ge = np.hypot(g.metric(1, 0), g.metric(1, 1))
        np.testing.assert_allclose(gx, ge, atol=1e-12)
        np.testing.assert_allclose(g.metric(0, 1), -g.metric(1, 0),
                                   atol=1e-12)
        np.testing.assert_allclose(g.jacobian, 1.0 / d**2, atol=1e-9)

    @pytest.mark.parametrize("scheme", ["E2", "E4", "C4", "C6"])
    def test_quadratic_stretching_exact(self, scheme):
        # x(s) = s^2 is quadratic in the node index, which every scheme
        # (including E2) differentiates exactly, so xi_x hits 1/(2 s h) to
        # round-off -- comfortably inside the spec's O(h^p) bound.
        n = 33
        s = np.linspace(1.0, 2.0, n)
        h = s[1] - s[0]
        x = np.repeat((s**2)[:, None], 7, axis=1)
        y = np.repeat(np.linspace(0.0, 1.0, 7)[None, :], n, axis=0)
        g = CurvilinearGrid(coords=np.stack([x, y]))
        compute_metrics(g, scheme)
        np.testing.assert_allclose(g.metric(0, 0)[:, 3], 1.0 / (2.0 * s * h),
                                   rtol=1e-11)

    @pytest.mark.parametrize("scheme,order", [("E2", 2), ("E4", 4),
                                              ("C4", 4), ("C6", 6)])
    def test_metric_identity_convergence(self, scheme, order):
        # exponentially stretched grid: computed metrics approach the
        # analytic ones at the scheme's nominal order.  Measured on the
        # central third, where boundary-closure pollution has decayed but
        # the C6 truncation error still sits above the round-off floor.
        errs, hs = [], []
        for n in (41, 65, 97, 129):
            s = np.linspace(0.0, 1.0, n)
            h = s[1] - s[0]
            x = np.repeat(np.exp(5.0 * s)[:, None], 7, axis=1)
            y = np.repeat(np.linspace(0.0, 1.0, 7)[None, :], n, axis=0)
            g = CurvilinearGrid(coords=np.stack([x, y]))
            compute_metrics(g, scheme)
            exact = 1.0 / (5.0 * h * np.exp(5.0 * s))  # d(index)/dx
            err = np.abs(g.metric(0, 0)[:, 3] - exact) / exact
            errs.append(np.max(err[n // 3:n - n // 3]))
            hs.append(h)
        slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
        assert abs(slope - order) < 0.3, f"{scheme}: slope {slope:.2f}"

    def test_constant_annihilation_proxy(self):
        # all derivative operators kill constants, so metric-contracted
        # assemblies of a constant field vanish identically
        from walldist.operators import central_derivative

        g = build_cartesian(9, 9)
        c = np.full(g.dims, 4.2)
        for scheme in ("E2", "E4", "C4", "C6"):
            for ax in (0, 1):
                np.testing.assert_allclose(
                    central_derivative(c, scheme, axis=ax), 0.0, atol=1e-13)


class TestBumpGrid:
    def test_zero_height_is_cartesian(self):
        flat = BumpParams(height=0.0)
        g = build_bump_grid(21, 11, flat)
        ref = build_cartesian(21, 11, Lx=flat.length, Ly=flat.domain_height)
        np.testing.assert_allclose(g.coords, ref.coords, atol=1e-14)
        np.testing.assert_allclose(g.metrics, ref.metrics, atol=1e-9)

    def test_all_jacobians_positive(self):
        g = build_bump_grid(201, 101)
        assert np.all(g.jacobian > 0.0)

    def test_wall_nodes_on_arc(self):
        p = BumpParams()
        g = build_bump_grid(101, 51, p)
        xw = g.x[:, 0]
        R = (0.25 * p.chord**2 + p.height**2) / (2.0 * p.height)
        yc = p.height - R
        on_arc = np.abs(xw - p.center_x) <= 0.5 * p.chord
        arc_residual = ((xw[on_arc] - p.center_x) ** 2
                        + (g.y[on_arc, 0] - yc) ** 2) - R**2
        np.testing.assert_allclose(arc_residual, 0.0, atol=1e-12)
        np.testing.assert_allclose(g.y[~on_arc, 0], 0.0, atol=1e-12)

    def test_bump_reaching_top_rejected(self):
        with pytest.raises(DegenerateMappingError):
            build_bump_grid(51, 21, BumpParams(height=1.5, domain_height=1.0))


class TestGridDump:
    def test_roundtrip(self, tmp_path):
        g = build_cartesian(5, 6, Lx=0.5, Ly=1.5)
        path = tmp_path / "grid.csv"
        write_grid_csv(g, path)
        idx, coords, J = read_grid_csv(path)
        assert idx.shape == (30, 2)
        k = 7  # node (1, 1)
        assert tuple(idx[k]) == (1, 1)
        np.testing.assert_allclose(coords[k], [g.x[1, 1], g.y[1, 1]])
        np.testing.assert_allclose(J, g.jacobian.ravel())

    def test_header_mandatory(self, tmp_path):
        g = build_cartesian(5, 5)
        path = tmp_path / "grid.csv"
        write_grid_csv(g, path)
        first = path.read_text().splitlines()[0]
        assert first == "i,j,x,y,J"
