import json
import pathlib

import numpy as np
import pytest

import atmpc

ROOT = pathlib.Path(__file__).resolve().parents[2]
CONFIGS = ROOT / "configs"


def test_polytope_basics():
    box = atmpc.Polytope.box([-1.0, -1.0], [1.0, 1.0])
    assert box.dim == 2
    assert box.volume() == pytest.approx(4.0)
    assert box.contains([0.5, -0.5])
    assert not box.contains([1.5, 0.0])
    s = atmpc.minkowski_sum(box, box)
    assert s.volume() == pytest.approx(16.0)
    d = atmpc.pontryagin_diff(s, box)
    assert atmpc.contains_set(d, box) and atmpc.contains_set(box, d)
    tri = atmpc.Polytope.from_vertices(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]))
    # x in [0, 1], y in [0, 1 - x/2]
    assert atmpc.intersect(tri, box).volume() == pytest.approx(0.75)
    back = atmpc.Polytope.from_json(tri.to_json())
    assert back.volume() == pytest.approx(1.0)
    assert set(json.loads(tri.to_json())) == {"dim", "normals", "offsets", "vertices"}


def test_solve_qp_and_lqr():
    out = atmpc.solve_qp(np.eye(2), np.array([-2.0, -2.0]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert out["status"] == "optimal"
    np.testing.assert_allclose(out["x"], [0.5, 0.5], atol=1e-9)
    P, K = atmpc.lqr(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))
    # Scalar Riccati: P = (1 + sqrt(5)) / 2, K = -P / (1 + P).
    p = (1 + 5**0.5) / 2
    assert P[0, 0] == pytest.approx(p)
    assert K[0, 0] == pytest.approx(-p / (1 + p))


def test_config_round_trip_and_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((CONFIGS / "experiment.schema.json").read_text())
    cfg = atmpc.Config.load(str(CONFIGS / "paper.json"))
    assert cfg.N == 10 and cfg.kappa == 0.9
    assert cfg.modes == ["adaptive", "robust", "reach"]
    dumped = cfg.dump()
    assert atmpc.Config.parse(dumped) == cfg
    jsonschema.validate(json.loads(dumped), schema)
    for path in CONFIGS.glob("*.json"):
        if path.name != "experiment.schema.json":
            jsonschema.validate(json.loads(path.read_text()), schema)


def test_config_errors():
    text = (CONFIGS / "paper.json").read_text().replace('"kappa": 0.9', '"kappa": 2.5')
    with pytest.raises(atmpc.ConfigError, match=r"/controller/kappa: kappa out of \(0,2\)"):
        atmpc.Config.parse(text, "k.json")
    with pytest.raises(ValueError, match="unknown key"):
        atmpc.Config.parse(text.replace('"kappa": 2.5', '"kappa": 0.9, "gamma": 1'))


def test_nominal_run_and_check(tmp_path):
    cfg = atmpc.Config.load(str(CONFIGS / "nominal.json"))
    cfg.T_steps = 15
    tr = atmpc.run(cfg, seed=0, mode="adaptive")
    assert tr.status == "completed"
    assert len(tr) == 15
    assert tr.states.shape == (16, 2)
    assert np.linalg.norm(tr.states[-1]) < 1e-3
    recs = atmpc.records(tr)
    assert recs[0]["t"] == 0 and "volumes" in recs[0]
    results = {r["name"]: r["status"] for r in atmpc.check(tr, cfg)}
    assert results["nominal_decrease"] == "pass"
    assert all(s == "pass" for s in results.values())
    atmpc.write_run(tmp_path, tr)
    assert (tmp_path / "trace.jsonl").exists()
    assert (tmp_path / "sets" / "14.json").exists()


def test_example_run_short():
    cfg = atmpc.Config.load(str(CONFIGS / "paper.json"))
    cfg.T_steps = 3
    tr = atmpc.run(cfg, seed=1, mode="robust")
    assert tr.status == "completed"
    assert tr.constraint_violations == 0
    assert np.all(np.abs(tr.inputs) <= 10.0)
