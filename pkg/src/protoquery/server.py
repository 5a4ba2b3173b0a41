"""HTTP service: ontology and session management, graph editing, snapshots,
diffs, query execution, chart data, NL proposals, CSV export, live feedback.

Sessions are mutated under a per-session writer lock; live-feedback count
queries run off the mutation path and never block edits.
"""

from __future__ import annotations

import json
import queue as queue_mod
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from . import client as sparql_client
from .conditions import Condition
from .config import ServiceConfig
from .diffing import diff_graphs, diff_instances, diff_result_values
from .embeddings import MockEmbedder, HttpEmbedder, VectorStore, build_embedding_index
from .errors import (
    EndpointError,
    LmError,
    NetworkError,
    PendingProposalError,
    ProtoQueryError,
    StaleProposalError,
    UnknownElementError,
)
from .feedback import FeedbackHub
from .graph import PrototypeGraph
from .localstore import TripleStore, eval_local
from .nl import AuditLog, HttpLm, propose
from .overview import ChartParams, build_chart, build_overlay, export_csv
from .results import ResultTable, to_instance_graphs
from .sessions import (
    OntologyRegistry,
    PendingProposal,
    Session,
    SessionSettings,
    SessionStore,
)
from .sparqlgen import generate_count, generate_select

_STATUS_BY_CODE = {
    "unknown_element": 404,
    "unknown_snapshot": 404,
    "stale_proposal": 409,
    "pending_proposal": 409,
    "endpoint_error": 502,
    "network_error": 502,
    "timeout": 504,
    "lm_error": 502,
    "embedder_error": 502,
    "storage_error": 500,
    "unrepairable": 500,
}


class OntologyIn(BaseModel):
    document: str
    format: str = "turtle"


class SessionIn(BaseModel):
    ontology: str
    settings: dict = {}


class QueryIn(BaseModel):
    target: str = "current"
    kind: str = "select"
    limit: int | None = None


class NlIn(BaseModel):
    request: str


class PatchIn(BaseModel):
    operations: list[dict]


class _StoreCache:
    def __init__(self):
        self._stores: dict[str, TripleStore] = {}

    def get(self, path: str) -> TripleStore:
        if path not in self._stores:
            self._stores[path] = TripleStore.from_file(path)
        return self._stores[path]


def create_app(config: ServiceConfig | None = None, lm=None, embedder=None) -> FastAPI:
    config = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        hub.shutdown()  # cancel pending debounce timers

    app = FastAPI(title="protoquery", version="0.1.0", lifespan=lifespan)
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    registry = OntologyRegistry(config.data_dir)
    sessions = SessionStore(config.data_dir, registry)
    stores = _StoreCache()
    vectors = VectorStore(Path(config.data_dir) / "embeddings")
    audit = AuditLog(Path(config.data_dir) / "audit.jsonl")

    if embedder is None:
        if config.embed_url and not config.use_mock_providers:
            embedder = HttpEmbedder(config.embed_url, config.embed_model)
        else:
            embedder = MockEmbedder(config.embed_dimension)
    if lm is None and config.lm_url and not config.use_mock_providers:
        lm = HttpLm(config.lm_url, config.lm_model)

    def run_select(session: Session, graph: PrototypeGraph, limit: int | None) -> ResultTable:
        ontology = registry.get(session.ontology_id)
        if session.settings.local_data:
            return eval_local(stores.get(session.settings.local_data), graph, ontology, limit)
        if session.settings.sparql_endpoint:
            query = generate_select(
                graph, ontology, limit, session.settings.expand_subclasses
            )
            return sparql_client.execute(
                session.settings.sparql_endpoint, query, config.request_timeout_s
            )
        raise NetworkError("session has neither an endpoint nor local data configured")

    def run_count(session: Session, graph: PrototypeGraph) -> int:
        ontology = registry.get(session.ontology_id)
        if session.settings.local_data:
            return len(eval_local(stores.get(session.settings.local_data), graph, ontology).rows)
        if session.settings.sparql_endpoint:
            query = generate_count(graph, ontology, session.settings.expand_subclasses)
            table = sparql_client.execute(
                session.settings.sparql_endpoint, query, config.request_timeout_s
            )
            if table.rows and table.rows[0][0] is not None:
                return int(table.rows[0][0].value)
            raise EndpointError(200, "count query returned no value")
        raise NetworkError("session has neither an endpoint nor local data configured")

    def feedback_count(session_id: str) -> tuple[str, int]:
        session = sessions.get(session_id)
        graph = session.graph
        return graph.version_tag, run_count(session, graph)

    hub = FeedbackHub(feedback_count, config.debounce_ms)

    app.state.config = config
    app.state.registry = registry
    app.state.sessions = sessions
    app.state.hub = hub
    app.state.embedder = embedder
    app.state.lm = lm

    @app.exception_handler(ProtoQueryError)
    async def _domain_error(request: Request, exc: ProtoQueryError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.get("/")
    def root():
        return {"service": "protoquery", "version": "0.1.0"}

    # --- ontologies ---

    @app.post("/ontologies", status_code=201)
    def add_ontology(payload: OntologyIn):
        ontology_id, ontology = registry.add(payload.document, payload.format)
        return {
            "ontology": ontology_id,
            "classes": len(ontology.classes),
            "links": len(ontology.links),
            "properties": len(ontology.properties),
            "warnings": ontology.warnings,
        }

    @app.get("/ontologies")
    def list_ontologies():
        return {"ontologies": registry.ids()}

    @app.get("/ontologies/{ontology_id}")
    def get_ontology(ontology_id: str):
        ontology = registry.get(ontology_id)
        return {"ontology": ontology_id, **ontology.to_json()}

    # --- sessions ---

    @app.post("/sessions", status_code=201)
    def create_session(payload: SessionIn):
        settings = SessionSettings.from_config(config, payload.settings)
        session = sessions.create(payload.ontology, settings)
        return {"session": session.id, "version_tag": session.graph.version_tag}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = sessions.get(session_id)
        return {
            "session": session.id,
            "ontology": session.ontology_id,
            "version_tag": session.graph.version_tag,
            "settings": session.settings.__dict__,
            "snapshots": sorted(session.snapshots),
            "pending": session.pending is not None,
        }

    @app.get("/sessions/{session_id}/graph")
    def get_graph(session_id: str, target: str = "current"):
        session = sessions.get(session_id)
        graph = session.resolve_graph(target)
        return {"version_tag": graph.version_tag, "graph": graph.to_json()}

    @app.patch("/sessions/{session_id}/graph")
    def patch_graph(session_id: str, payload: PatchIn):
        session = sessions.get(session_id)
        with sessions.lock(session_id):
            scratch = session.graph.clone()
            results = [_apply_operation(scratch, op) for op in payload.operations]
            session.graph = scratch
            sessions.save(session)
            hub.notify(session_id, session.graph.version_tag, session.settings.debounce_ms)
            return {"results": results, "version_tag": session.graph.version_tag}

    @app.post("/sessions/{session_id}/snapshots/{tag}", status_code=201)
    def make_snapshot(session_id: str, tag: str):
        session = sessions.get(session_id)
        with sessions.lock(session_id):
            snap = session.graph.snapshot()
            session.snapshots[tag] = snap
            sessions.save(session)
            return {"tag": tag, "version_tag": snap.version_tag}

    @app.get("/sessions/{session_id}/snapshots")
    def list_snapshots(session_id: str):
        session = sessions.get(session_id)
        return {
            "snapshots": [
                {"tag": tag, "version_tag": g.version_tag}
                for tag, g in sorted(session.snapshots.items())
            ]
        }

    # --- diffing ---

    @app.get("/sessions/{session_id}/diff")
    def get_diff(session_id: str, left: str, right: str = "current"):
        session = sessions.get(session_id)
        left_graph = session.resolve_graph(left)
        right_graph = session.resolve_graph(right)
        diff = diff_graphs(left_graph, right_graph)
        return {
            "left": left_graph.version_tag,
            "right": right_graph.version_tag,
            "diff": diff.to_json(),
        }

    @app.get("/sessions/{session_id}/instances/diff")
    def get_instance_diff(session_id: str, left: str, right: str = "current"):
        session = sessions.get(session_id)
        diff, tags = _instance_diff(session, left, right)
        return {"left": tags[0], "right": tags[1], "diff": diff.to_json()}

    def _instance_diff(session: Session, left: str, right: str):
        left_graph = session.resolve_graph(left)
        right_graph = session.resolve_graph(right)
        graph_diff = diff_graphs(left_graph, right_graph)
        left_table = run_select(session, left_graph, session.settings.row_limit)
        right_table = run_select(session, right_graph, session.settings.row_limit)
        left_instances = to_instance_graphs(left_table, left_graph)
        right_instances = to_instance_graphs(right_table, right_graph)
        diff = diff_instances(left_instances, right_instances, graph_diff.nodes_shared)
        return diff, (left_graph.version_tag, right_graph.version_tag)

    # --- query execution ---

    @app.post("/sessions/{session_id}/query")
    def run_query(session_id: str, payload: QueryIn):
        session = sessions.get(session_id)
        graph = session.resolve_graph(payload.target)
        if payload.kind == "count":
            return {"version_tag": graph.version_tag, "count": run_count(session, graph)}
        limit = payload.limit if payload.limit is not None else session.settings.row_limit
        table = run_select(session, graph, limit)
        return {"version_tag": graph.version_tag, **table.to_json()}

    @app.get("/sessions/{session_id}/sparql")
    def get_sparql(session_id: str, target: str = "current", count: bool = False,
                   limit: int | None = None):
        session = sessions.get(session_id)
        graph = session.resolve_graph(target)
        ontology = registry.get(session.ontology_id)
        if count:
            query = generate_count(graph, ontology, session.settings.expand_subclasses)
        else:
            query = generate_select(graph, ontology, limit, session.settings.expand_subclasses)
        return {"version_tag": graph.version_tag, "text": query.text}

    # --- charts ---

    def _selected_ids(values: str) -> list[int]:
        try:
            return [int(v) for v in values.split(",") if v != ""]
        except ValueError:
            raise UnknownElementError(f"malformed values selection {values!r}") from None

    def _chart(session: Session, values: str, target: str, left: str, right: str):
        ontology = registry.get(session.ontology_id)
        selected = _selected_ids(values)
        params = ChartParams()
        limit = session.settings.distribution_limit
        if left and right:
            left_graph = session.resolve_graph(left)
            right_graph = session.resolve_graph(right)
            left_table = run_select(session, left_graph, limit)
            right_table = run_select(session, right_graph, limit)
            diff_result_values(left_table, right_table, left_graph, right_graph, selected)
            spec = build_overlay(
                left_table, right_table, left_graph, right_graph, ontology, selected, params,
                names=(left, right),
            )
            return spec, {"left": left_graph.version_tag, "right": right_graph.version_tag}
        graph = session.resolve_graph(target)
        table = run_select(session, graph, limit)
        return build_chart(table, graph, ontology, selected, params), {
            "target": graph.version_tag,
        }

    @app.get("/sessions/{session_id}/chart")
    def get_chart(session_id: str, values: str, target: str = "current",
                  left: str = "", right: str = ""):
        session = sessions.get(session_id)
        spec, tags = _chart(session, values, target, left, right)
        return {**spec.to_json(), "version_tags": tags}

    # --- NL proposals ---

    @app.post("/sessions/{session_id}/nl")
    def nl_propose(session_id: str, payload: NlIn):
        session = sessions.get(session_id)
        with sessions.lock(session_id):
            if session.pending is not None:
                raise PendingProposalError("a proposal is already pending; accept or reject it")
            if app.state.lm is None:
                raise LmError("no language model configured")
            ontology = registry.get(session.ontology_id)
            index = build_embedding_index(ontology, app.state.embedder, vectors)
            proposal = propose(
                payload.request,
                session.graph,
                ontology,
                index,
                app.state.embedder,
                app.state.lm,
                k=session.settings.retrieval_k,
                audit=audit,
            )
            session.pending = PendingProposal(
                request=payload.request,
                changeset=proposal.changeset,
                repairs=proposal.repairs,
                base_tag=session.graph.version_tag,
                proposed_graph=proposal.proposed_graph,
                diff=proposal.diff,
            )
            sessions.save(session)
            return {
                "request": payload.request,
                "changeset": proposal.changeset.to_json(),
                "repairs": [r.to_json() for r in proposal.repairs],
                "diff": proposal.diff.to_json(),
                "base_version_tag": session.pending.base_tag,
                "proposed_version_tag": proposal.proposed_graph.version_tag,
            }

    @app.post("/sessions/{session_id}/nl/accept")
    def nl_accept(session_id: str):
        session = sessions.get(session_id)
        with sessions.lock(session_id):
            if session.pending is None:
                raise PendingProposalError("no pending proposal")
            if session.pending.base_tag != session.graph.version_tag:
                raise StaleProposalError(
                    "the graph changed since the proposal was made; refresh and re-propose"
                )
            session.graph = session.pending.proposed_graph
            session.pending = None
            sessions.save(session)
            hub.notify(session_id, session.graph.version_tag, session.settings.debounce_ms)
            return {"version_tag": session.graph.version_tag}

    @app.post("/sessions/{session_id}/nl/reject")
    def nl_reject(session_id: str):
        session = sessions.get(session_id)
        with sessions.lock(session_id):
            if session.pending is None:
                raise PendingProposalError("no pending proposal")
            session.pending = None
            sessions.save(session)
            return {"version_tag": session.graph.version_tag}

    # --- export ---

    @app.get("/sessions/{session_id}/export.csv")
    def export(session_id: str, kind: str = "results", target: str = "current",
               left: str = "", right: str = "", values: str = ""):
        session = sessions.get(session_id)
        headers = {"Content-Disposition": f'attachment; filename="{kind}.csv"'}
        if kind == "results":
            graph = session.resolve_graph(target)
            payload = run_select(session, graph, session.settings.row_limit)
            headers["X-Version-Tag"] = graph.version_tag
        elif kind == "instance_diff":
            payload, tags = _instance_diff(session, left, right or "current")
            headers["X-Left-Version-Tag"], headers["X-Right-Version-Tag"] = tags
        elif kind == "chart":
            payload, tags = _chart(session, values, target, left, right)
            for key, tag in tags.items():
                headers[f"X-{key.capitalize()}-Version-Tag"] = tag
        else:
            raise UnknownElementError(f"unknown export kind {kind!r}")
        return Response(content=export_csv(payload), media_type="text/csv", headers=headers)

    # --- live feedback ---

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str):
        sessions.get(session_id)  # 404 early for unknown sessions

        def stream():
            q = hub.subscribe(session_id)
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        event = q.get(timeout=0.5)
                        yield f"data: {json.dumps(event.to_json(), sort_keys=True)}\n\n"
                    except queue_mod.Empty:
                        yield ": keepalive\n\n"
            finally:
                hub.unsubscribe(session_id, q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def _apply_operation(graph: PrototypeGraph, op: dict) -> dict:
    kind = op.get("op")
    if kind == "add_node":
        return {"node": graph.add_node(op["class"])}
    if kind == "add_edge":
        return {"edge": graph.add_edge(int(op["tail"]), op["link"], int(op["head"]))}
    if kind == "set_subquery":
        condition = Condition.from_json(op["condition"]) if op.get("condition") else None
        return {
            "subquery": graph.set_subquery(
                int(op["node"]), op["property"], op["kind"], condition
            )
        }
    if kind == "update_subquery":
        return {
            "subquery": graph.update_subquery(
                int(op["subquery"]), Condition.from_json(op["condition"])
            )
        }
    if kind == "remove":
        report = graph.remove_element(op["kind"], int(op["id"]))
        return {
            "removed": {
                "nodes": report.nodes,
                "edges": report.edges,
                "subqueries": report.subqueries,
            }
        }
    raise UnknownElementError(f"unknown operation {kind!r}")
