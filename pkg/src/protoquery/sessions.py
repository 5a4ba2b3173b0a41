"""Sessions: ontology registry, per-session graph state, and persistence.

Everything lives in plain JSON files under the data directory, written
atomically, so a restart loses nothing. One writer lock per session keeps
concurrent mutations in a total order.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .changeset import ChangeSet, RepairAction
from .config import ServiceConfig
from .diffing import GraphDiff
from .errors import ParseError, UnknownElementError
from .graph import PrototypeGraph
from .ontology import Ontology, ingest_ontology

SESSION_FORMAT = "session-1"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, tmp_path = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as tmp:
            tmp.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


class OntologyRegistry:
    """Parsed ontologies stored by content hash in canonical JSON."""

    def __init__(self, data_dir: str | Path):
        self.dir = Path(data_dir) / "ontologies"
        self._cache: dict[str, Ontology] = {}
        self._lock = threading.Lock()

    def add(self, document: str, format: str = "turtle") -> tuple[str, Ontology]:
        ontology = ingest_ontology(document, format)
        ontology_id = ontology.content_hash()
        with self._lock:
            self._cache[ontology_id] = ontology
        _atomic_write(
            self.dir / f"{ontology_id}.json",
            json.dumps(ontology.to_json(), sort_keys=True, indent=2) + "\n",
        )
        return ontology_id, ontology

    def get(self, ontology_id: str) -> Ontology:
        with self._lock:
            if ontology_id in self._cache:
                return self._cache[ontology_id]
        path = self.dir / f"{ontology_id}.json"
        if not path.exists():
            raise UnknownElementError(f"no ontology {ontology_id}")
        ontology = Ontology.from_json(json.loads(path.read_text(encoding="utf-8")))
        with self._lock:
            self._cache[ontology_id] = ontology
        return ontology

    def ids(self) -> list[str]:
        stored = {p.stem for p in self.dir.glob("*.json")} if self.dir.exists() else set()
        with self._lock:
            stored.update(self._cache)
        return sorted(stored)


@dataclass
class SessionSettings:
    sparql_endpoint: str = ""
    local_data: str = ""
    row_limit: int = 1000
    distribution_limit: int = 100000
    expand_subclasses: bool = False
    colorblind: bool = False
    debounce_ms: int = 300
    retrieval_k: int = 16

    @classmethod
    def from_config(cls, config: ServiceConfig, overrides: dict | None = None) -> "SessionSettings":
        settings = cls(
            sparql_endpoint=config.sparql_endpoint,
            local_data=config.local_data,
            row_limit=config.row_limit,
            distribution_limit=config.distribution_limit,
            expand_subclasses=config.expand_subclasses,
            debounce_ms=config.debounce_ms,
            retrieval_k=config.retrieval_k,
        )
        for key, value in (overrides or {}).items():
            if hasattr(settings, key):
                setattr(settings, key, value)
        return settings


@dataclass
class PendingProposal:
    request: str
    changeset: ChangeSet
    repairs: list[RepairAction]
    base_tag: str
    proposed_graph: PrototypeGraph
    diff: GraphDiff

    def to_json(self) -> dict:
        return {
            "request": self.request,
            "changeset": self.changeset.to_json(),
            "repairs": [r.to_json() for r in self.repairs],
            "base_tag": self.base_tag,
            "proposed_graph": self.proposed_graph.to_json(),
            "diff": self.diff.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict, ontology: Ontology) -> "PendingProposal":
        return cls(
            request=doc["request"],
            changeset=ChangeSet.from_json(doc["changeset"]),
            repairs=[RepairAction(r["action"], r["detail"]) for r in doc["repairs"]],
            base_tag=doc["base_tag"],
            proposed_graph=PrototypeGraph.from_json(doc["proposed_graph"], ontology),
            diff=GraphDiff.from_json(doc["diff"]),
        )


@dataclass
class Session:
    id: str
    ontology_id: str
    graph: PrototypeGraph
    settings: SessionSettings
    snapshots: dict[str, PrototypeGraph] = field(default_factory=dict)
    pending: PendingProposal | None = None

    def to_json(self) -> dict:
        return {
            "format": SESSION_FORMAT,
            "id": self.id,
            "ontology": self.ontology_id,
            "settings": asdict(self.settings),
            "graph": self.graph.to_json(),
            "snapshots": {tag: g.to_json() for tag, g in sorted(self.snapshots.items())},
            "pending": self.pending.to_json() if self.pending else None,
        }

    @classmethod
    def from_json(cls, doc: dict, ontology: Ontology) -> "Session":
        session = cls(
            id=doc["id"],
            ontology_id=doc["ontology"],
            graph=PrototypeGraph.from_json(doc["graph"], ontology),
            settings=SessionSettings(**doc["settings"]),
            snapshots={
                tag: PrototypeGraph.from_json(g, ontology)
                for tag, g in doc.get("snapshots", {}).items()
            },
        )
        if doc.get("pending"):
            session.pending = PendingProposal.from_json(doc["pending"], ontology)
        return session

    def resolve_graph(self, target: str) -> PrototypeGraph:
        """'current', 'proposed', or a snapshot tag."""
        if target in ("", "current"):
            return self.graph
        if target == "proposed":
            if self.pending is None:
                raise UnknownElementError("no pending proposal")
            return self.pending.proposed_graph
        if target in self.snapshots:
            return self.snapshots[target]
        raise UnknownSnapshot(target)


class UnknownSnapshot(UnknownElementError):
    code = "unknown_snapshot"

    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"no snapshot tagged {tag!r}")


class SessionStore:
    """File-per-session persistence plus in-memory cache and writer locks."""

    def __init__(self, data_dir: str | Path, registry: OntologyRegistry):
        self.dir = Path(data_dir) / "sessions"
        self.registry = registry
        self._cache: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._global = threading.Lock()

    def lock(self, session_id: str) -> threading.RLock:
        with self._global:
            if session_id not in self._locks:
                self._locks[session_id] = threading.RLock()
            return self._locks[session_id]

    def create(self, ontology_id: str, settings: SessionSettings) -> Session:
        ontology = self.registry.get(ontology_id)
        session = Session(
            id=uuid.uuid4().hex[:16],
            ontology_id=ontology_id,
            graph=PrototypeGraph(ontology),
            settings=settings,
        )
        self._cache[session.id] = session
        self.save(session)
        return session

    def get(self, session_id: str) -> Session:
        if session_id in self._cache:
            return self._cache[session_id]
        path = self.dir / f"{session_id}.json"
        if not path.exists():
            raise UnknownElementError(f"no session {session_id}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("format") != SESSION_FORMAT:
            raise ParseError(f"unknown session format in {path}")
        ontology = self.registry.get(doc["ontology"])
        session = Session.from_json(doc, ontology)
        self._cache[session.id] = session
        return session

    def save(self, session: Session) -> None:
        _atomic_write(
            self.dir / f"{session.id}.json",
            json.dumps(session.to_json(), sort_keys=True, indent=2) + "\n",
        )

    def ids(self) -> list[str]:
        stored = {p.stem for p in self.dir.glob("*.json")} if self.dir.exists() else set()
        stored.update(self._cache)
        return sorted(stored)
