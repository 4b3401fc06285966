"""Cross-cutting contract checks that span modules."""

import numpy as np
import pytest

from divclust.algorithms import AlgorithmConfig, fit
from divclust.data import DataMatrix, atomic_write_text, make_blobs
from divclust.errors import ConfigurationError
from divclust.linalg import KernelSpec
from divclust.projections import ProjectionConfig
from divclust.splits import depddp_split, ipddp_split, kmeans_1d_split, pddp_split
from divclust.viz import export_split_views


def test_every_feasible_candidate_partitions_nonempty():
    rng = np.random.default_rng(0)
    for trial in range(200):
        n = int(rng.integers(2, 60))
        scores = rng.normal(size=n) * rng.uniform(0.5, 3.0)
        if trial % 3 == 0:
            scores = scores - scores.mean()  # centered, as pddp requires
        candidates = [
            kmeans_1d_split(scores),
            ipddp_split(scores, trim_fraction=0.1),
            depddp_split(scores),
        ]
        if trial % 3 == 0:
            candidates.append(pddp_split(scores, scatter=1.0))
        for cand in candidates:
            if not cand.feasible:
                continue
            left = scores < cand.split_point
            assert left.any() and not left.all(), cand.rule_tag
            assert scores.min() < cand.split_point < scores.max(), cand.rule_tag


def test_leaf_count_never_exceeds_budget():
    # min_sample_split makes deep splitting infeasible well before k
    data = make_blobs(n=40, d=4, k=2, separation=20.0, spread=1.0, seed=0)
    config = AlgorithmConfig(
        algorithm="km_pddp", max_clusters=30, min_sample_split=12, seed=0
    )
    tree, _ = fit(config, data)
    assert tree.leaf_count() <= 30
    assert all(tree.nodes[l].size >= 1 for l in tree.leaf_ids())


def test_kpca_node_limit_fails_loudly():
    data = make_blobs(n=30, d=4, k=2, separation=15.0, spread=1.0, seed=1)
    config = AlgorithmConfig(
        algorithm="pddp",
        max_clusters=2,
        projection=ProjectionConfig(method="kpca", kernel=KernelSpec(name="rbf")),
        kpca_node_limit=10,
        min_sample_split=2,
    )
    with pytest.raises(ConfigurationError):
        fit(config, data)


def test_views_use_tree_held_data_when_x_omitted():
    data = make_blobs(n=60, d=4, k=2, separation=20.0, spread=1.0, seed=2)
    tree, _ = fit(
        AlgorithmConfig(algorithm="pddp", max_clusters=2, min_sample_split=2), data
    )
    doc = export_split_views(tree)  # no explicit X
    assert len(doc["views"]) == 1
    assert doc["views"][0]["size"] == 60


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "hello\n")
    assert target.read_text() == "hello\n"
    leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
    assert leftovers == []
    atomic_write_text(target, "replaced\n")
    assert target.read_text() == "replaced\n"


def test_cli_export_with_separate_label_file(tmp_path, capsys):
    from divclust.cli import main
    from divclust.data import save_matrix

    data = make_blobs(n=40, d=4, k=2, separation=20.0, spread=1.0, seed=3)
    csv_path = tmp_path / "m.csv"
    save_matrix(csv_path, DataMatrix(data.values))
    labels_path = tmp_path / "labels.txt"
    labels_path.write_text("\n".join(str(int(v)) for v in data.labels) + "\n")
    tree_path = tmp_path / "tree.json"
    assert main([
        "fit", "--algorithm", "pddp", "--input", str(csv_path), "--k", "2",
        "--labels-out", str(tmp_path / "out.txt"), "--tree-out", str(tree_path),
    ]) == 0
    svg_path = tmp_path / "d.svg"
    assert main([
        "export", "--tree", str(tree_path), "--input", str(csv_path),
        "--labels", str(labels_path), "--dendrogram", str(svg_path),
    ]) == 0
    assert 'class="class-strip"' in svg_path.read_text()


def test_server_upload_with_label_column(tmp_path):
    from fastapi.testclient import TestClient

    from divclust.server import create_app

    client = TestClient(create_app())
    body = "a,1.0,2.0\nb,3.0,4.0\na,5.0,6.0\n"
    response = client.post("/datasets?name=lab&label_column=0", content=body)
    assert response.status_code == 200
    assert response.json() == {"dataset_id": "lab", "n": 3, "d": 2}
    created = client.post(
        "/sessions",
        json={
            "dataset_id": "lab",
            "config": {"algorithm": "pddp", "max_clusters": 1},
        },
    )
    assert created.status_code == 200
