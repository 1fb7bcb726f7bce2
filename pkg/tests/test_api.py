import json

import pytest
from fastapi.testclient import TestClient

from app.main import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_root_lists_experiments(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["experiments"] == ["E1", "E2", "E3", "E4", "E5"]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert set(body["budgets"]) == {"max_enumeration", "fit_search_cap", "e4_max_states"}


@pytest.mark.parametrize(
    "group, word, identity",
    [("bs12", "taTAA", True), ("heisenberg", "a_z", False), ("product(free:2,free:2:p,q)", "apAP", True)],
)
def test_eval(client, group, word, identity):
    response = client.post("/api/eval", json={"group": group, "word": word})
    assert response.status_code == 200
    assert response.json() == {"group": group, "word": word, "identity": identity}


@pytest.mark.parametrize("payload", [{"group": "nope", "word": "a"}, {"group": "free:1", "word": "b"}])
def test_eval_bad_input(client, payload):
    assert client.post("/api/eval", json=payload).status_code == 400


def test_slice(client):
    response = client.post(
        "/api/slice", json={"group": "bs12", "regex": "t*a(T)*(A)*", "max_len": 7, "project": ["t", "A"]}
    )
    assert response.status_code == 200
    assert response.json() == {"columns": ["t", "A"], "points": [[0, 1], [1, 2]], "words": 2}


def test_slice_budget_is_server_side(client, monkeypatch):
    from app.core.config import settings

    monkeypatch.setattr(settings, "MAX_ENUMERATION", 5)
    response = client.post(
        "/api/slice", json={"group": "free:2", "regex": "(a+b+A+B)*", "max_len": 6, "project": ["a"]}
    )
    assert response.status_code == 500


def test_fit(client):
    response = client.post(
        "/api/fit",
        json={
            "points_in": [[0, 0], [1, 2], [2, 4]],
            "max_components": 1,
            "max_generators": 1,
            "coord_bound": 2,
            "certificate": "quad:1/2",
        },
    )
    body = response.json()
    assert response.status_code == 200
    assert body["found"] is True
    assert body["certificate"] == {"kind": "quad", "coeff": "1/2", "passed": True}
    assert body["max_collinear"] == 3


def test_fit_overlap_is_rejected(client):
    response = client.post(
        "/api/fit",
        json={"points_in": [[1, 1]], "points_out": [[1, 1]], "max_components": 1, "max_generators": 0, "coord_bound": 1},
    )
    assert response.status_code == 400


def test_fit_upload(client, data_dir):
    with open(data_dir / "shape_points.csv", "rb") as f:
        response = client.post(
            "/api/fit/upload",
            files={"file": ("shape_points.csv", f, "text/csv")},
            data={"max_components": "1", "max_generators": "1", "coord_bound": "1", "certificate": "vertical-gap"},
        )
    body = response.json()
    assert response.status_code == 200
    assert body["certificate"]["passed"] is True


def test_fit_upload_requires_csv(client):
    response = client.post(
        "/api/fit/upload",
        files={"file": ("points.txt", b"1,2\n", "text/plain")},
        data={"max_components": "1", "max_generators": "1", "coord_bound": "1"},
    )
    assert response.status_code == 400


def test_graph_classify(client, data_dir):
    document = json.loads((data_dir / "p4.json").read_text(encoding="utf-8"))
    response = client.post("/api/graph/classify", json=document)
    assert response.status_code == 200
    assert response.json()["verdict"] == "NotMCF"


def test_graph_upload_edge_list(client, data_dir):
    with open(data_dir / "c4.edges", "rb") as f:
        response = client.post("/api/graph/classify/upload", files={"file": ("c4.edges", f, "text/plain")})
    body = response.json()
    assert response.status_code == 200
    assert body["witness"]["kind"] == "C4"
    assert body["theorem"] == "F2xF2-not-MCF"


def test_graph_certificate(client):
    response = client.post(
        "/api/graph/certificate", json={"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"], ["c", "a"]]}
    )
    body = response.json()
    assert body["in_class_g"] is True
    assert body["replay_matches"] is True


def test_graph_unknown_mode(client):
    assert client.post("/api/graph/planar", json={"vertices": ["a"], "edges": []}).status_code == 404


def test_graph_bad_edge(client):
    response = client.post("/api/graph/classify", json={"vertices": ["a"], "edges": [["a", "z"]]})
    assert response.status_code == 400


def test_experiment_e1(client):
    response = client.post("/api/experiments/e1", json={"max_len": 7})
    record = response.json()
    assert response.status_code == 200
    assert record["status"] == "success"
    assert record["results"]["points"] == [[0, 1], [1, 2]]
    assert "duration_seconds" in record


def test_experiment_bound_below_minimum(client):
    assert client.post("/api/experiments/E1", json={"max_len": 1}).status_code == 400


def test_experiment_unknown(client):
    assert client.post("/api/experiments/E9", json={}).status_code == 404


def test_geometries(client):
    response = client.get("/api/experiments/geometries")
    assert response.status_code == 200
    assert len(response.json()["geometries"]) == 8


def test_schreier(client, data_dir):
    action = json.loads((data_dir / "z_index2.json").read_text(encoding="utf-8"))
    response = client.post("/api/schreier", json={"group": "free:1", "action": action, "bound": 6})
    body = response.json()
    assert response.status_code == 200
    assert body["results"]["verification"]["passed"] is True


def test_schreier_corrupted(client, data_dir):
    action = json.loads((data_dir / "z_index2.json").read_text(encoding="utf-8"))
    response = client.post("/api/schreier", json={"group": "free:1", "action": action, "corrupt": True})
    assert response.status_code == 422
    assert response.json()["detail"]["witness"] == ["b0'", "aa"]
