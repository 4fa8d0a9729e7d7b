import math

import numpy as np
import pytest

import hho_stokes as hs


def test_config_and_names():
    c = hs.config_from_text("test = B\nk = 1\ngamma = 0.2\nmeshes = 7, 14\n")
    assert c.test == hs.TestCase.B
    assert c.k == 1 and c.meshes == [7, 14]
    assert hs.table_name(c) == "testB_k1_gamma0.2.dat"
    assert hs.default_meshes(hs.TestCase.A) == [4, 8, 16, 32]
    assert len(hs.test_b_cylinders()) == 4
    with pytest.raises(hs.HHOError):
        hs.config_from_text("colour = red\n")


def test_run_test_a_table(tmp_path):
    c = hs.ExperimentConfig()
    c.k = 1
    c.gamma = 0.2
    c.meshes = [4, 8]
    report = hs.run(c)
    assert report.columns == ["L2Error", "EnergyError", "PressureError"]
    assert [r.n for r in report.rows] == [4, 8]
    for r in report.rows:
        assert r.residuals.divergence < 1e-10 * r.residuals.velocity_norm
    assert all(b < a for a, b in zip(report.rows[0].errors, report.rows[1].errors))

    path = tmp_path / hs.table_name(c)
    path.write_text(report.table())
    table = hs.read_table(path)
    assert table["MeshTitle"] == ["Mesh1", "Mesh2"]
    assert table["DOFs"] == [float(r.dofs) for r in report.rows]
    assert table["EnergyError"][1] == pytest.approx(report.rows[1].errors[1], rel=1e-15)


def test_cylinder_solution_is_reproduced():
    c = hs.ExperimentConfig()
    c.gamma = 10.0
    c.radius = 0.2
    c.solution = hs.TestASolution.cylinder
    sc = hs.solve_case(c, 5)
    # k = 0: two polynomial unknowns per internal face, more where enriched.
    assert sc.dofs > sc.cells + 2 * sc.internal_faces
    fields = sc.sample_fields(20)
    assert fields.shape == (400, 6)
    circle = hs.Circle((0.5, 0.5), 0.2)
    fluid = fields[fields[:, 5] == 1]
    assert len(fluid) > 0
    exact = np.array([hs.cylinder_solution(circle, x, y)[:2] for x, y in fluid[:, :2]])
    assert np.max(np.abs(fluid[:, 2:4] - exact)) < 1e-8
    inside = np.hypot(fields[:, 0] - 0.5, fields[:, 1] - 0.5) < 0.2
    assert np.array_equal(fields[:, 5] == 0, inside)


def test_errors_surface_as_exceptions():
    c = hs.ExperimentConfig()
    c.meshes = [4]
    c.radius = 0.7
    with pytest.raises(hs.HHOError, match="mesh n=4"):
        hs.run(c)
    assert math.isclose(hs.Circle((0.1, 0.2), 0.3).radius, 0.3)
