"""Tests for split-view export and dendrogram SVG rendering."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from divclust.algorithms import AlgorithmConfig, fit
from divclust.data import make_blobs
from divclust.errors import LinkageValidationError
from divclust.evaluation import BenchRow, BenchReport
from divclust.linalg import KernelSpec
from divclust.projections import ProjectionConfig
from divclust.tree import ClusterTree
from divclust.viz import (
    PALETTE,
    export_split_views,
    parse_dendrogram_svg,
    render_dendrogram_svg,
    save_bench_figure,
    save_split_view_figures,
    validate_linkage,
)


def fitted_tree(algorithm="pddp", k=3, seed=0, n=90, **kwargs):
    data = make_blobs(n=n, d=5, k=k, separation=25.0, spread=1.0, seed=seed)
    kk = None if algorithm == "depddp" else k
    config = AlgorithmConfig(
        algorithm=algorithm, max_clusters=kk, min_sample_split=2, seed=seed, **kwargs
    )
    tree, labels = fit(config, data)
    return tree, labels, data


class TestExportSplitViews:
    def test_bare_root_empty(self):
        data = make_blobs(n=20, d=3, k=1, separation=5.0, spread=1.0, seed=0)
        tree, _ = fit(AlgorithmConfig(algorithm="pddp", max_clusters=1), data)
        doc = export_split_views(tree, data.values)
        assert doc["views"] == []

    def test_one_record_per_internal_node(self):
        tree, _, data = fitted_tree()
        doc = export_split_views(tree, data.values)
        assert len(doc["views"]) == len(tree.split_order)
        assert [v["node_id"] for v in doc["views"]] == tree.split_order

    def test_side_matches_component1_threshold(self):
        tree, _, data = fitted_tree("km_pddp")
        doc = export_split_views(tree, data.values)
        for view in doc["views"]:
            coords = np.asarray(view["coords"])
            side = np.asarray(view["side"])
            expected = (coords[:, 0] >= view["split_point"]).astype(int)
            assert np.array_equal(side, expected)

    def test_side_matches_children_membership(self):
        tree, _, data = fitted_tree("ipddp")
        doc = export_split_views(tree, data.values)
        for view in doc["views"]:
            node = tree.nodes[view["node_id"]]
            left = set(tree.nodes[node.children[0]].sample_indices.tolist())
            for sample, side in zip(view["sample_indices"], view["side"]):
                assert (side == 0) == (sample in left)

    def test_two_dimensional_coords(self):
        tree, _, data = fitted_tree("bkm")
        doc = export_split_views(tree, data.values)
        for view in doc["views"]:
            coords = np.asarray(view["coords"])
            assert coords.shape == (view["size"], 2)
            # second axis is orthogonal content, not a copy of the first
            assert not np.allclose(coords[:, 1], coords[:, 0])

    def test_views_from_deserialized_tree(self):
        tree, _, data = fitted_tree("depddp")
        clone = ClusterTree.from_json(tree.to_json(), data=data.values)
        a = export_split_views(tree, data.values)
        b = export_split_views(clone, data.values)
        assert [v["node_id"] for v in a["views"]] == [v["node_id"] for v in b["views"]]
        for va, vb in zip(a["views"], b["views"]):
            assert va["side"] == vb["side"]

    def test_kpca_views(self):
        tree, _, data = fitted_tree(
            "pddp",
            projection=ProjectionConfig(
                method="kpca", kernel=KernelSpec(name="rbf", gamma=0.05)
            ),
        )
        doc = export_split_views(tree, data.values)
        for view in doc["views"]:
            assert np.isfinite(np.asarray(view["coords"])).all()


class TestValidateLinkage:
    def test_good_linkage(self):
        Z = [[0, 1, 1.0, 2], [2, 3, 1.0, 2], [4, 5, 2.0, 4]]
        validate_linkage(Z)

    def test_bad_shape(self):
        with pytest.raises(LinkageValidationError):
            validate_linkage([[0, 1, 1.0]])

    def test_forward_reference(self):
        with pytest.raises(LinkageValidationError):
            validate_linkage([[0, 5, 1.0, 2], [1, 2, 1.0, 2], [3, 4, 2.0, 4]])

    def test_non_monotone_heights(self):
        Z = [[0, 1, 2.0, 2], [2, 3, 1.0, 2], [4, 5, 1.5, 4]]
        with pytest.raises(LinkageValidationError):
            validate_linkage(Z)

    def test_wrong_size(self):
        with pytest.raises(LinkageValidationError):
            validate_linkage([[0, 1, 1.0, 3]])

    def test_double_merge(self):
        with pytest.raises(LinkageValidationError):
            validate_linkage([[0, 1, 1.0, 2], [0, 2, 2.0, 2], [3, 4, 3.0, 4]])


class TestRenderDendrogramSvg:
    def test_two_sample_single_bracket(self):
        svg = render_dendrogram_svg([[0, 1, 1.0, 2]])
        root = ET.fromstring(svg)
        merges = [
            e
            for e in root.iter("{http://www.w3.org/2000/svg}path")
            if e.get("class") == "merge"
        ]
        assert len(merges) == 1

    def test_hand_example_roundtrip_exact(self):
        Z = np.array([[0, 1, 1.0, 2], [2, 3, 1.0, 2], [4, 5, 2.0, 4]])
        svg = render_dendrogram_svg(Z)
        back = parse_dendrogram_svg(svg)
        assert np.array_equal(back, Z)

    def test_leaf_order_groups_clusters(self):
        Z = np.array([[0, 1, 1.0, 2], [2, 3, 1.0, 2], [4, 5, 2.0, 4]])
        svg = render_dendrogram_svg(Z, class_labels=[0, 0, 1, 1])
        root = ET.fromstring(svg)
        strips = [
            e
            for e in root.iter("{http://www.w3.org/2000/svg}rect")
            if e.get("class") == "class-strip"
        ]
        order = [
            int(e.get("data-sample"))
            for e in sorted(strips, key=lambda e: float(e.get("x")))
        ]
        assert order.index(0) // 2 == order.index(1) // 2
        assert order.index(2) // 2 == order.index(3) // 2

    def test_color_strip_cell_count(self):
        tree, labels, data = fitted_tree()
        svg = render_dendrogram_svg(tree.to_linkage(), class_labels=data.labels)
        root = ET.fromstring(svg)
        strips = [
            e
            for e in root.iter("{http://www.w3.org/2000/svg}rect")
            if e.get("class") == "class-strip"
        ]
        assert len(strips) == data.n
        used = {e.get("fill") for e in strips}
        assert used <= set(PALETTE)

    def test_fitted_tree_roundtrip(self):
        tree, _, _ = fitted_tree("km_pddp", seed=3)
        Z = tree.to_linkage()
        back = parse_dendrogram_svg(render_dendrogram_svg(Z))
        assert np.array_equal(back, Z)

    def test_valid_xml_with_labels(self):
        tree, _, data = fitted_tree("depddp", seed=4)
        svg = render_dendrogram_svg(tree.to_linkage(), class_labels=data.labels)
        ET.fromstring(svg)  # parses cleanly
        assert svg.startswith("<svg")


class TestMatplotlibFigures:
    def test_split_view_pngs(self, tmp_path):
        tree, _, data = fitted_tree()
        doc = export_split_views(tree, data.values)
        paths = save_split_view_figures(doc, tmp_path / "views")
        assert len(paths) == len(doc["views"])
        for p in paths:
            blob = open(p, "rb").read()
            assert blob[:8] == b"\x89PNG\r\n\x1a\n"

    def test_bench_figure(self, tmp_path):
        report = BenchReport(
            rows=[
                BenchRow("pddp", "blobs", 2, 0.1, 0.01, 0.9),
                BenchRow("bkm", "blobs", 2, 0.3, 0.02, 0.95),
            ]
        )
        out = tmp_path / "report.png"
        save_bench_figure(report, out)
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
