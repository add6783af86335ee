"""Slopes and the four solution-notion checks."""

from __future__ import annotations

import random

import pytest

from eikograph import (
    DirichletProblem,
    GraphError,
    build_graph,
    check_c_subsolution,
    check_c_supersolution,
    check_monge,
    check_regularity,
    constant_field,
    descent_curve,
    field_from_expression,
    field_on,
    fixture,
    lipschitz_constant,
    random_metric_graph,
    slope_field,
    slopes,
    solve_dirichlet,
)
from eikograph.graph import close


def interval_field(fn, n=256):
    """Field from a function of the x coordinate on a dyadic interval.

    n = 256 keeps all coordinates, values and edge lengths dyadic, so the
    stated exact-zero residuals are exact in binary64 too.
    """
    g = fixture("interval", n=n).graph
    u = field_on(g, {v: fn(g.coords[v][0]) for v in g.vertices}, "solution_u")
    return g, u


def center_vertex(g):
    return min(g.vertices, key=lambda v: (abs(g.coords[v][0]), v))


class TestSlopes:
    def test_distance_cone_at_kink(self):
        g, u = interval_field(lambda x: 1.0 - abs(x))
        t = slopes(g, u, center_vertex(g))
        assert t.sub_slope == 1.0
        assert t.super_slope == 0.0
        assert t.slope == 1.0

    def test_absolute_value_has_zero_sub_slope_at_kink(self):
        g, u = interval_field(abs)
        t = slopes(g, u, center_vertex(g))
        assert t.sub_slope == 0.0
        assert t.super_slope == 1.0

    def test_steep_cone_sub_slope_three(self):
        g, u = interval_field(lambda x: -3.0 * abs(x))
        t = slopes(g, u, center_vertex(g))
        assert t.sub_slope == 3.0

    def test_slope_is_max_of_half_slopes(self):
        g = random_metric_graph(31, n_max=25)
        rng = random.Random(31)
        u = field_on(g, {v: rng.uniform(-2.0, 2.0) for v in g.vertices}, "solution_u")
        for v, t in slope_field(g, u).items():
            assert t.slope == max(t.super_slope, t.sub_slope)
            assert t.slope >= 0.0

    def test_negation_duality(self):
        g = random_metric_graph(32, n_max=25)
        rng = random.Random(32)
        u = field_on(g, {v: rng.uniform(-2.0, 2.0) for v in g.vertices}, "solution_u")
        neg = field_on(g, {v: -u[v] for v in g.vertices}, "solution_u")
        for v in g.vertices:
            assert slopes(g, u, v).super_slope == slopes(g, neg, v).sub_slope

    def test_scale_equivariance(self):
        g = random_metric_graph(33, n_max=25)
        rng = random.Random(33)
        u = field_on(g, {v: rng.uniform(-2.0, 2.0) for v in g.vertices}, "solution_u")
        doubled = field_on(g, {v: 2.0 * u[v] for v in g.vertices}, "solution_u")
        for v in g.vertices:
            assert slopes(g, doubled, v).slope == 2.0 * slopes(g, u, v).slope

    def test_isolated_vertex_raises(self):
        g = build_graph({"vertices": ["only"], "edges": [], "boundary": []})
        u = field_on(g, {"only": 0.0}, "solution_u")
        with pytest.raises(GraphError):
            slopes(g, u, "only")


class TestCheckMonge:
    def test_distance_cone_passes_tight(self):
        g, u = interval_field(lambda x: 1.0 - abs(x))
        f = constant_field(g, 1.0, "rhs_f")
        report = check_monge(g, u, f, tol=1e-12)
        assert report.passed
        assert report.max_residual == 0.0

    def test_inverted_cone_fails_exactly_at_kink(self):
        g, u = interval_field(lambda x: abs(x) - 1.0, n=200)
        f = constant_field(g, 1.0, "rhs_f")
        report = check_monge(g, u, f)
        center = center_vertex(g)
        assert not report.passed
        assert report.failures() == [center]
        assert abs(report.residuals[center] - 1.0) <= 1e-12

    def test_sub_and_super_modes_are_one_sided(self):
        g, u = interval_field(lambda x: 0.5 * (1.0 - abs(x)))
        f = constant_field(g, 1.0, "rhs_f")
        sub = check_monge(g, u, f, mode="sub")
        sup = check_monge(g, u, f, mode="super")
        assert sub.passed  # sub-slope 0.5 <= 1
        assert not sup.passed  # deficit 0.5 at every interior vertex
        assert close(sup.max_residual, 0.5)

    def test_gasket_solver_output_passes(self):
        g = fixture("gasket", level=3).graph
        f = constant_field(g, 1.0, "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        report = check_monge(g, vf.u, f, tol=1e-9)
        assert report.passed
        assert report.max_residual == 0.0  # dyadic lengths: exact

    def test_unknown_mode_rejected(self):
        g, u = interval_field(abs, n=4)
        f = constant_field(g, 1.0, "rhs_f")
        with pytest.raises(ValueError):
            check_monge(g, u, f, mode="both")


class TestCheckCSubsolution:
    def test_distance_cone_residuals_zero(self):
        g, u = interval_field(lambda x: 1.0 - abs(x))
        f = constant_field(g, 1.0, "rhs_f")
        report = check_c_subsolution(g, u, f, tol=0.0)
        assert report.passed
        assert report.max_residual == 0.0

    def test_steep_linear_fails_on_every_downhill_edge(self):
        n = 256
        g, u = interval_field(lambda x: 2.0 * x, n=n)
        f = constant_field(g, 1.0, "rhs_f")
        report = check_c_subsolution(g, u, f, tol=0.0)
        assert not report.passed
        failures = report.failures()
        assert len(failures) == n  # one orientation of every edge
        h = g.h_max
        assert all(close(report.residuals[e], h) for e in failures)

    def test_solver_output_passes_at_zero(self):
        for seed in (5, 6):
            g = random_metric_graph(seed)
            rng = random.Random(seed)
            f = field_on(g, {v: rng.uniform(0.5, 2.0) for v in g.vertices}, "rhs_f")
            z = field_on(g, {v: 0.0 for v in g.boundary}, "boundary_zeta")
            vf = solve_dirichlet(DirichletProblem(g, f, z))
            assert check_c_subsolution(g, vf.u, f, tol=0.0).passed

    def test_lipschitz_certificate_attached(self):
        g = fixture("grid", n=8).graph
        f = constant_field(g, 1.0, "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        report = check_c_subsolution(g, vf.u, f)
        rows = report.details["lipschitz_certificate"]
        assert rows
        for _center, _radius, pairs, worst in rows:
            assert worst <= 1e-12


class TestCheckCSupersolution:
    def test_distance_cone_passes_with_eps_zero(self):
        g, u = interval_field(lambda x: 1.0 - abs(x))
        f = constant_field(g, 1.0, "rhs_f")
        report = check_c_supersolution(g, u, f, eps=0.0)
        assert report.passed
        witness = report.details["witness"]
        assert witness.vertices[0] == center_vertex(g)
        assert witness.vertices[-1] in g.boundary

    def test_flat_field_fails_everywhere(self):
        g, u = interval_field(lambda x: 0.0, n=16)
        f = constant_field(g, 1.0, "rhs_f")
        report = check_c_supersolution(g, u, f, eps=0.0)
        assert not report.passed
        assert set(report.failures()) == set(g.interior)

    def test_solver_output_on_grid(self):
        g = fixture("grid", n=64).graph
        f = constant_field(g, 1.0, "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        report = check_c_supersolution(g, vf.u, f, eps=1e-12)
        assert report.passed

    def test_descent_curve_descends(self):
        g = fixture("grid", n=8).graph
        f = constant_field(g, 1.0, "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        curve = descent_curve(g, vf.u, f, "v4_4")
        values = [vf.u[v] for v in curve.vertices]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert curve.vertices[-1] in g.boundary


class TestCheckRegularity:
    def test_solver_output_interval(self):
        g = fixture("interval", n=200).graph
        f = constant_field(g, 1.0, "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        report = check_regularity(g, vf.u, tol=1e-12)
        assert report.passed
        # boundary-adjacent vertices are excluded but reported
        assert set(report.excluded) == {"v1", "v199"}

    def test_absolute_value_flagged_at_kink(self):
        g, u = interval_field(abs)
        report = check_regularity(g, u)
        center = center_vertex(g)
        assert not report.passed
        assert report.residuals[center] == 1.0

    def test_plateau_solution_flagged_at_kink(self):
        g, u = interval_field(lambda x: x if x <= 0.0 else 2.0 * x)
        report = check_regularity(g, u)
        center = center_vertex(g)
        assert report.residuals[center] == 1.0
        others = {v: r for v, r in report.residuals.items() if v != center}
        assert all(r <= 1e-12 for r in others.values())


class TestSolverSlopeIdentities:
    def test_constant_f_sub_slope_equals_f(self):
        g = fixture("gasket", level=3).graph
        f = constant_field(g, 1.0, "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        for x in g.interior:
            assert slopes(g, vf.u, x).sub_slope == 1.0  # dyadic: exact

    def test_lipschitz_f_interpolation_bound(self):
        g = fixture("grid", n=12).graph
        f = field_from_expression(g, "linear:1,0.5", "rhs_f")
        z = constant_field(g, 0.0, "boundary_zeta")
        vf = solve_dirichlet(DirichletProblem(g, f, z))
        bound = lipschitz_constant(g, f) * g.h_max
        for x in g.interior:
            assert abs(slopes(g, vf.u, x).sub_slope - f[x]) <= bound + 1e-12
