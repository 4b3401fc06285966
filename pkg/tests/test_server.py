"""Tests for the interactive session server (HTTP surface)."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from divclust.data import make_blobs, save_matrix
from divclust.evaluation import nmi
from divclust.server import create_app


@pytest.fixture
def data_dir(tmp_path):
    two = make_blobs(n=80, d=4, k=2, separation=20.0, spread=1.0, seed=1)
    save_matrix(tmp_path / "plain.csv", make_blobs(60, 3, 3, 25.0, 1.0, 2))
    # unlabeled variant for sessions (labels column would shift features)
    np.savetxt(tmp_path / "twoblob.csv", two.values, delimiter=",")
    (tmp_path / "truth.json").write_text(json.dumps(two.labels.tolist()))
    return tmp_path


@pytest.fixture
def client(data_dir, tmp_path):
    app = create_app(data_dir=str(data_dir), snapshot_dir=str(tmp_path / "snaps"))
    return TestClient(app)


def pddp_config(k=2):
    return {"algorithm": "pddp", "max_clusters": k, "min_sample_split": 2}


def make_session(client, k=2, dataset="twoblob"):
    response = client.post(
        "/sessions", json={"dataset_id": dataset, "config": pddp_config(k)}
    )
    assert response.status_code == 200, response.text
    return response.json()


class TestHealthAndDatasets:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_upload_csv(self, client):
        body = "1,2\n3,4\n5,6\n"
        response = client.post("/datasets?name=mini", content=body)
        assert response.status_code == 200
        assert response.json() == {"dataset_id": "mini", "n": 3, "d": 2}

    def test_upload_bad_csv(self, client):
        response = client.post("/datasets", content="1,2\n3\n")
        assert response.status_code == 400
        assert response.json()["code"] == "bad_dataset"

    def test_upload_size_cap(self, data_dir, tmp_path):
        app = create_app(data_dir=str(data_dir), upload_limit_bytes=10)
        small = TestClient(app)
        response = small.post("/datasets", content="1,2\n3,4\n5,6\n")
        assert response.status_code == 413


class TestCreateSession:
    def test_two_blob_session(self, client):
        out = make_session(client, k=2)
        assert out["revision"] == 0
        assert out["summary"]["leaf_count"] == 2
        assert out["summary"]["node_count"] == 3

    def test_unknown_dataset_404(self, client):
        response = client.post(
            "/sessions", json={"dataset_id": "ghost", "config": pddp_config()}
        )
        assert response.status_code == 404

    def test_invalid_config_400(self, client):
        response = client.post(
            "/sessions",
            json={"dataset_id": "twoblob", "config": {"algorithm": "dbscan"}},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "bad_config"

    def test_k1_single_leaf(self, client):
        out = make_session(client, k=1)
        assert out["summary"]["leaf_count"] == 1


class TestGetTree:
    def test_node_arithmetic(self, client):
        session = make_session(client, k=3, dataset="plain")
        doc = client.get(f"/sessions/{session['session_id']}/tree").json()
        assert len(doc["nodes"]) == 5  # 2 internal + 3 leaves
        leaves = [n for n in doc["nodes"] if not n["children"]]
        assert sum(n["size"] for n in leaves) == 60

    def test_roundtrips_through_serializer(self, client):
        from divclust.tree import ClusterTree

        session = make_session(client, k=2)
        doc = client.get(f"/sessions/{session['session_id']}/tree").json()
        clone = ClusterTree.from_json(doc["tree"])
        assert clone.labels().tolist() == doc["labels"]

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/tree").status_code == 404


class TestNodeView:
    def test_view_shape(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        view = client.get(f"/sessions/{sid}/nodes/{root}/view")
        assert view.status_code == 200
        record = view.json()
        assert len(record["coords"]) == 80
        assert record["split_point"] is not None
        lo, hi = record["score_range"]
        assert lo < record["split_point"] < hi
        sides = np.asarray(record["side"])
        comp1 = np.asarray(record["coords"])[:, 0]
        assert np.array_equal(sides, (comp1 >= record["split_point"]).astype(int))

    def test_tiny_leaf_409(self, data_dir):
        app = create_app(data_dir=str(data_dir))
        client = TestClient(app)
        response = client.post(
            "/sessions",
            json={
                "dataset_id": "twoblob",
                "config": {"algorithm": "pddp", "max_clusters": 2,
                           "min_sample_split": 60},
            },
        )
        sid = response.json()["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        leaf = next(n for n in tree["nodes"] if not n["children"] and n["size"] < 60)
        view = client.get(f"/sessions/{sid}/nodes/{leaf['id']}/view")
        assert view.status_code == 409
        assert view.json()["code"] == "no_projection"

    def test_unknown_node_404(self, client):
        session = make_session(client)
        sid = session["session_id"]
        assert client.get(f"/sessions/{sid}/nodes/999/view").status_code == 404

    def test_malformed_body_uses_error_shape(self, client):
        session = make_session(client)
        sid = session["session_id"]
        response = client.post(f"/sessions/{sid}/nodes/0/split", json={"point": "x"})
        assert response.status_code == 422
        assert response.json()["code"] == "invalid_request"


class TestSetSplit:
    def test_idempotent_edit(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        point = next(n for n in tree["nodes"] if n["id"] == root)["split_point"]
        before = tree["labels_digest"]
        response = client.post(
            f"/sessions/{sid}/nodes/{root}/split",
            json={"point": point, "expected_revision": 0},
        )
        assert response.status_code == 200
        doc = response.json()
        assert doc["revision"] == 1
        assert doc["labels_digest"] == before

    def test_stale_revision_409_no_change(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        point = next(n for n in tree["nodes"] if n["id"] == root)["split_point"]
        response = client.post(
            f"/sessions/{sid}/nodes/{root}/split",
            json={"point": point, "expected_revision": 7},
        )
        assert response.status_code == 409
        assert response.json()["code"] == "revision_conflict"
        after = client.get(f"/sessions/{sid}/tree").json()
        assert after["revision"] == 0
        assert after["labels"] == tree["labels"]

    def test_point_outside_range_422(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        hi = next(n for n in tree["nodes"] if n["id"] == root)["score_range"][1]
        response = client.post(
            f"/sessions/{sid}/nodes/{root}/split",
            json={"point": hi + 1.0, "expected_revision": 0},
        )
        assert response.status_code == 422
        assert client.get(f"/sessions/{sid}/tree").json()["revision"] == 0

    def test_boundary_edit_reaches_truth(self, client, data_dir):
        truth = json.loads((data_dir / "truth.json").read_text())
        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        view = client.get(f"/sessions/{sid}/nodes/{root}/view").json()
        comp1 = np.asarray(view["coords"])[:, 0]
        # the known blob boundary midpoint on the splitting axis
        a = comp1[np.asarray(truth) == 0]
        b = comp1[np.asarray(truth) == 1]
        midpoint = (min(a.max(), b.max()) + max(a.min(), b.min())) / 2.0
        lo, hi = sorted([a.mean(), b.mean()])
        assert lo < midpoint < hi
        response = client.post(
            f"/sessions/{sid}/nodes/{root}/split",
            json={"point": float(midpoint), "expected_revision": 0},
        )
        assert response.status_code == 200
        assert nmi(response.json()["labels"], truth) == pytest.approx(1.0)


class TestResetAndReplay:
    def test_reset_restores_fresh_fit(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        original = tree["labels"]
        root = tree["root_id"]
        lo, hi = next(n for n in tree["nodes"] if n["id"] == root)["score_range"]
        client.post(
            f"/sessions/{sid}/nodes/{root}/split",
            json={"point": lo + 0.25 * (hi - lo), "expected_revision": 0},
        )
        reset = client.post(f"/sessions/{sid}/reset")
        assert reset.status_code == 200
        doc = reset.json()
        assert doc["labels"] == original
        assert doc["revision"] == 2

    def test_snapshot_written_and_replayable(self, client, tmp_path, data_dir):
        from divclust.algorithms import AlgorithmConfig, fit, make_driver
        from divclust.data import load_matrix

        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        lo, hi = next(n for n in tree["nodes"] if n["id"] == root)["score_range"]
        response = client.post(
            f"/sessions/{sid}/nodes/{root}/split",
            json={"point": lo + 0.3 * (hi - lo), "expected_revision": 0},
        )
        final_labels = response.json()["labels"]

        snap = json.loads((tmp_path / "snaps" / f"{sid}.json").read_text())
        config = AlgorithmConfig.from_dict(snap["config"])
        data = load_matrix(data_dir / "twoblob.csv")
        replay_tree, _ = fit(config, data)
        driver = make_driver(config, data.values)
        for edit in snap["edits"]:
            replay_tree.recompute_subtree(
                edit["node_id"], edit["split_point"], driver
            )
        assert replay_tree.labels().tolist() == final_labels

    def test_get_endpoints_do_not_bump_revision(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        client.get(f"/sessions/{sid}/tree")
        client.get(f"/sessions/{sid}/dendrogram")
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        client.get(f"/sessions/{sid}/nodes/{root}/view")
        assert client.get(f"/sessions/{sid}/tree").json()["revision"] == 0


class TestConcurrentEdits:
    def test_racing_writers_one_wins(self, client):
        import threading

        session = make_session(client, k=2)
        sid = session["session_id"]
        tree = client.get(f"/sessions/{sid}/tree").json()
        root = tree["root_id"]
        point = next(n for n in tree["nodes"] if n["id"] == root)["split_point"]
        statuses = []
        lock = threading.Lock()

        def writer():
            response = client.post(
                f"/sessions/{sid}/nodes/{root}/split",
                json={"point": point, "expected_revision": 0},
            )
            with lock:
                statuses.append(response.status_code)

        threads = [threading.Thread(target=writer) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(statuses) == [200, 409, 409, 409]
        assert client.get(f"/sessions/{sid}/tree").json()["revision"] == 1


class TestDendrogramEndpoint:
    def test_linkage_shape(self, client):
        session = make_session(client, k=2)
        sid = session["session_id"]
        doc = client.get(f"/sessions/{sid}/dendrogram").json()
        linkage = np.asarray(doc["linkage"])
        assert linkage.shape == (79, 4)
        assert doc["class_labels"] is None  # twoblob.csv carries no labels
