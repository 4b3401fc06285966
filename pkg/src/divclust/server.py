"""HTTP/JSON service hosting live clustering sessions.

A session pins a dataset and an algorithm config, runs fit, and then lets
clients inspect the tree, fetch per-node 2-D views, move split points
(recomputing the affected subtree), and reset. Mutations are guarded by an
optimistic ``expected_revision``; stale writers get 409 and no state change.
Sessions live in memory; with a snapshot directory configured, the
(config + edit log) replay document is persisted after every mutation, which
is a complete persistence story because replaying the log against a fresh
fit reproduces the tree exactly.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .algorithms import AlgorithmConfig, Driver, fit, make_driver
from .data import DataMatrix, atomic_write_text, load_matrix
from .errors import (
    ConfigurationError,
    DataValidationError,
    DegenerateSplitError,
    StructuralError,
)
from .tree import ClusterTree
from .viz import node_view_record


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class CreateSessionBody(BaseModel):
    dataset_id: str
    config: dict


class SplitBody(BaseModel):
    point: float
    expected_revision: int


@dataclass
class Session:
    session_id: str
    dataset_id: str
    config: AlgorithmConfig
    dataset: DataMatrix
    tree: ClusterTree
    labels: np.ndarray
    revision: int = 0
    edits: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def driver(self) -> Driver:
        return make_driver(self.config, self.dataset.values)


def labels_digest(labels: np.ndarray) -> str:
    return hashlib.sha256(",".join(str(int(v)) for v in labels).encode()).hexdigest()


def _viewable(session: Session, node) -> bool:
    """Whether the view endpoint can produce a 2-D record for this node.

    Views are computed lazily, so a leaf without a cached projection is
    still viewable as long as it is big enough to project; a node whose
    candidate computation already failed (zero variance) is not.
    """
    if node.projection is not None:
        return node.projection.scores.shape[0] == node.size
    if node.candidate is not None:
        return False
    return node.size >= max(2, session.config.min_sample_split)


def tree_document(session: Session) -> dict:
    """Tree JSON plus labels and revision, shaped for the UI."""
    doc = session.tree.to_json()
    nodes = []
    for record in doc["nodes"]:
        node = session.tree.nodes[record["id"]]
        nodes.append(
            {
                "id": record["id"],
                "parent": record["parent"],
                "children": record["children"],
                "depth": record["depth"],
                "size": record["size"],
                "criterion": record["candidate"]["criterion"]
                if record["candidate"]
                else None,
                "feasible": record["candidate"]["feasible"]
                if record["candidate"]
                else False,
                "rule_tag": record["candidate"]["rule_tag"]
                if record["candidate"]
                else None,
                "split_point": node.split_point,
                "manual": record["manual_split"] is not None,
                "score_range": record["score_range"],
                "viewable": _viewable(session, node),
            }
        )
    return {
        "revision": session.revision,
        "labels": session.labels.tolist(),
        "labels_digest": labels_digest(session.labels),
        "n": session.tree.n,
        "root_id": session.tree.root_id,
        "split_order": list(session.tree.split_order),
        "config": session.config.to_dict(),
        "nodes": nodes,
        "tree": doc,
    }


def create_app(
    data_dir: Optional[str] = None,
    snapshot_dir: Optional[str] = None,
    ui_dir: Optional[str] = None,
    upload_limit_bytes: int = 64 * 1024 * 1024,
) -> FastAPI:
    app = FastAPI(title="divclust session server")
    from fastapi.middleware.cors import CORSMiddleware

    # the editor UI may be served from another origin during development
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    datasets: dict[str, DataMatrix] = {}
    sessions: dict[str, Session] = {}
    upload_counter = {"n": 0}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    from fastapi.exceptions import RequestValidationError

    @app.exception_handler(RequestValidationError)
    def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "invalid_request", "message": str(exc.errors())},
        )

    def get_dataset(dataset_id: str) -> DataMatrix:
        with registry_lock:
            if dataset_id in datasets:
                return datasets[dataset_id]
        if data_dir is not None:
            for suffix, delim in ((".csv", "comma"), (".tsv", "tab")):
                path = Path(data_dir) / f"{dataset_id}{suffix}"
                if path.exists():
                    matrix = load_matrix(path, delimiter=delim)
                    with registry_lock:
                        datasets[dataset_id] = matrix
                    return matrix
        raise ApiError(404, "unknown_dataset", f"no dataset named {dataset_id!r}")

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def snapshot(session: Session) -> None:
        if snapshot_dir is None:
            return
        Path(snapshot_dir).mkdir(parents=True, exist_ok=True)
        atomic_write_text(
            Path(snapshot_dir) / f"{session.session_id}.json",
            json.dumps(
                {
                    "session_id": session.session_id,
                    "dataset_id": session.dataset_id,
                    "config": session.config.to_dict(),
                    "revision": session.revision,
                    "edits": session.edits,
                },
                indent=2,
            ),
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/datasets")
    async def upload_dataset(
        request: Request,
        name: Optional[str] = Query(default=None),
        label_column: Optional[int] = Query(default=None),
        delimiter: str = Query(default="comma"),
    ):
        body = await request.body()
        if len(body) > upload_limit_bytes:
            raise ApiError(413, "too_large",
                           f"upload exceeds {upload_limit_bytes} bytes")
        import tempfile

        with tempfile.NamedTemporaryFile("w", suffix=".csv", delete=False) as handle:
            handle.write(body.decode("utf-8"))
            tmp_path = handle.name
        try:
            matrix = load_matrix(tmp_path, delimiter=delimiter, label_column=label_column)
        except DataValidationError as exc:
            raise ApiError(400, "bad_dataset", str(exc))
        except ConfigurationError as exc:
            raise ApiError(400, "bad_config", str(exc))
        finally:
            Path(tmp_path).unlink(missing_ok=True)
        with registry_lock:
            if name is None:
                upload_counter["n"] += 1
                name = f"upload-{upload_counter['n']}"
            datasets[name] = matrix
        return {"dataset_id": name, "n": matrix.n, "d": matrix.d}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        dataset = get_dataset(body.dataset_id)
        try:
            config = AlgorithmConfig.from_dict(body.config)
        except ConfigurationError as exc:
            raise ApiError(400, "bad_config", str(exc))
        tree, labels = fit(config, dataset)
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            dataset_id=body.dataset_id,
            config=config,
            dataset=dataset,
            tree=tree,
            labels=labels,
        )
        sessions[session.session_id] = session
        snapshot(session)
        return {
            "session_id": session.session_id,
            "revision": session.revision,
            "summary": {
                "node_count": len(tree.nodes),
                "leaf_count": tree.leaf_count(),
                "labels_digest": labels_digest(labels),
            },
        }

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return tree_document(session)

    @app.get("/sessions/{session_id}/nodes/{node_id}/view")
    def get_node_view(session_id: str, node_id: int):
        session = get_session(session_id)
        with session.lock:
            try:
                record = node_view_record(session.tree, node_id, session.driver())
            except StructuralError as exc:
                if node_id not in session.tree.nodes:
                    raise ApiError(404, "unknown_node", str(exc))
                raise ApiError(409, "no_projection", str(exc))
            record["revision"] = session.revision
            return record

    @app.post("/sessions/{session_id}/nodes/{node_id}/split")
    def set_split(session_id: str, node_id: int, body: SplitBody):
        session = get_session(session_id)
        with session.lock:
            if body.expected_revision != session.revision:
                raise ApiError(
                    409,
                    "revision_conflict",
                    f"expected revision {body.expected_revision}, "
                    f"current is {session.revision}",
                )
            if node_id not in session.tree.nodes:
                raise ApiError(404, "unknown_node", f"no node {node_id}")
            try:
                session.tree.recompute_subtree(node_id, body.point, session.driver())
            except DegenerateSplitError as exc:
                raise ApiError(422, "point_out_of_range", str(exc))
            except StructuralError as exc:
                raise ApiError(409, "no_projection", str(exc))
            session.labels = session.tree.labels()
            session.revision += 1
            session.edits.append(
                {"node_id": node_id, "split_point": body.point, "timestamp": time.time()}
            )
            snapshot(session)
            return tree_document(session)

    @app.post("/sessions/{session_id}/reset")
    def reset_session(session_id: str):
        session = get_session(session_id)
        with session.lock:
            session.tree, session.labels = fit(session.config, session.dataset)
            session.edits.clear()
            session.revision += 1
            snapshot(session)
            return tree_document(session)

    @app.get("/sessions/{session_id}/dendrogram")
    def get_dendrogram(session_id: str):
        session = get_session(session_id)
        with session.lock:
            linkage = session.tree.to_linkage()
            return {
                "revision": session.revision,
                "linkage": linkage.tolist(),
                "labels": session.labels.tolist(),
                "class_labels": session.dataset.labels.tolist()
                if session.dataset.labels is not None
                else None,
            }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
