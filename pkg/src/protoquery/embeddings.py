"""Embedding providers, the persistent vector index, and candidate retrieval.

Class and link embeddings are computed once per ontology content hash and
persisted; later startups load the index without touching the provider.
Nearest-neighbor search is an exact brute-force cosine scan, which is all
an ontology-sized vocabulary needs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .errors import EmbedderError, StorageError
from .ontology import Ontology

INDEX_FORMAT = "embedding-index-1"


@dataclass
class IndexEntry:
    kind: str  # "class" | "link"
    element: str
    text: str


class EmbeddingIndex:
    def __init__(self, ontology_hash: str, dimension: int, entries: list[IndexEntry], vectors: np.ndarray):
        if vectors.shape != (len(entries), dimension):
            raise StorageError(
                f"vector matrix {vectors.shape} does not match {len(entries)} entries x {dimension}"
            )
        self.ontology_hash = ontology_hash
        self.dimension = dimension
        self.entries = entries
        self.vectors = vectors

    def __len__(self) -> int:
        return len(self.entries)


class MockEmbedder:
    """Deterministic offline embedder: hashed character trigrams, unit norm.

    Shared tokens and character n-grams give related labels high cosine
    similarity, which is enough to make retrieval rankings reproducible in
    tests and demos. Counts calls so caching behavior is observable.
    """

    def __init__(self, dimension: int = 256):
        self.dimension = dimension
        self.calls = 0

    def embed(self, texts: list[str]) -> np.ndarray:
        self.calls += 1
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            padded = f"  {text.lower()} "
            for i in range(len(padded) - 2):
                gram = padded[i : i + 3]
                digest = hashlib.md5(gram.encode("utf-8")).digest()
                index = int.from_bytes(digest[:4], "big") % self.dimension
                out[row, index] += 1.0
        return _unit_rows(out)


class HttpEmbedder:
    """Client for an embeddings endpoint with the common JSON contract:
    POST {model, input: [...]} -> {data: [{embedding: [...]}, ...]}.
    """

    def __init__(self, url: str, model: str, timeout: float = 60.0):
        self.url = url
        self.model = model
        self.timeout = timeout
        self.calls = 0

    def embed(self, texts: list[str]) -> np.ndarray:
        self.calls += 1
        try:
            response = requests.post(
                self.url,
                json={"model": self.model, "input": texts},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise EmbedderError(f"embedding endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise EmbedderError(
                f"embedding endpoint returned HTTP {response.status_code}: {response.text[:300]}"
            )
        try:
            data = response.json()["data"]
            matrix = np.array([entry["embedding"] for entry in data], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbedderError(f"malformed embedding response: {exc}") from exc
        if matrix.shape[0] != len(texts):
            raise EmbedderError(
                f"embedding endpoint returned {matrix.shape[0]} vectors for {len(texts)} inputs"
            )
        return _unit_rows(matrix)


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return matrix / norms


class VectorStore:
    """File-backed store: one directory per ontology hash under base_dir."""

    def __init__(self, base_dir: str | Path):
        self.base_dir = Path(base_dir)

    def _index_dir(self, ontology_hash: str) -> Path:
        return self.base_dir / ontology_hash

    def load(self, ontology_hash: str) -> EmbeddingIndex | None:
        index_dir = self._index_dir(ontology_hash)
        meta_path = index_dir / "meta.json"
        vectors_path = index_dir / "vectors.npy"
        if not (meta_path.exists() and vectors_path.exists()):
            return None
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            if meta.get("format") != INDEX_FORMAT:
                raise StorageError(f"unknown index format in {meta_path}")
            vectors = np.load(vectors_path)
            entries = [IndexEntry(e["kind"], e["element"], e["text"]) for e in meta["entries"]]
            return EmbeddingIndex(meta["ontology_hash"], int(meta["dimension"]), entries, vectors)
        except (OSError, KeyError, ValueError) as exc:
            raise StorageError(f"cannot load embedding index: {exc}") from exc

    def save(self, index: EmbeddingIndex) -> None:
        index_dir = self._index_dir(index.ontology_hash)
        try:
            index_dir.mkdir(parents=True, exist_ok=True)
            np.save(index_dir / "vectors.npy", index.vectors)
            meta = {
                "format": INDEX_FORMAT,
                "ontology_hash": index.ontology_hash,
                "dimension": index.dimension,
                "entries": [
                    {"kind": e.kind, "element": e.element, "text": e.text}
                    for e in index.entries
                ],
            }
            (index_dir / "meta.json").write_text(
                json.dumps(meta, sort_keys=True, indent=2), encoding="utf-8"
            )
        except OSError as exc:
            raise StorageError(f"cannot persist embedding index: {exc}") from exc


def embedding_texts(ontology: Ontology) -> list[IndexEntry]:
    """One entry per class and link, embedded from label and comment text."""
    entries: list[IndexEntry] = []
    for cls in sorted(ontology.classes.values(), key=lambda c: c.id):
        text = cls.label + ("." if not cls.label.endswith(".") else "")
        if cls.comment:
            text += " " + cls.comment
        entries.append(IndexEntry("class", cls.id, text))
    for link in sorted(ontology.links.values(), key=lambda l: l.id):
        from_label = ontology.classes[link.fromtype].label
        to_label = ontology.classes[link.totype].label
        text = f"{link.label}: {from_label} to {to_label}."
        if link.comment:
            text += " " + link.comment
        entries.append(IndexEntry("link", link.id, text))
    return entries


def build_embedding_index(
    ontology: Ontology,
    embedder,
    store: VectorStore,
    batch_size: int = 64,
) -> EmbeddingIndex:
    """Load the cached index (zero provider calls) or embed and persist it."""
    ontology_hash = ontology.content_hash()
    cached = store.load(ontology_hash)
    if cached is not None:
        return cached
    entries = embedding_texts(ontology)
    batches = []
    for start in range(0, len(entries), batch_size):
        texts = [e.text for e in entries[start : start + batch_size]]
        batch = embedder.embed(texts)
        if batch.ndim != 2:
            raise EmbedderError("embedder must return a 2-D matrix")
        batches.append(batch)
    if not batches:
        raise EmbedderError("ontology has no classes or links to embed")
    vectors = np.vstack(batches)
    index = EmbeddingIndex(ontology_hash, vectors.shape[1], entries, vectors)
    store.save(index)
    return index


@dataclass
class RankedElement:
    element: str
    score: float


@dataclass
class Candidates:
    classes: list[RankedElement]
    links: list[RankedElement]

    def class_ids(self) -> set[str]:
        return {c.element for c in self.classes}

    def link_ids(self) -> set[str]:
        return {l.element for l in self.links}


def retrieve_candidates(
    index: EmbeddingIndex,
    request: str,
    embedder,
    k: int = 16,
) -> Candidates:
    """Top-k classes and top-k links by cosine similarity to the request."""
    if k < 1:
        raise ValueError("k must be >= 1")
    query = embedder.embed([request])
    if query.shape != (1, index.dimension):
        raise EmbedderError(
            f"request embedding has shape {query.shape}, index dimension is {index.dimension}"
        )
    scores = index.vectors @ query[0]

    def ranked(kind: str) -> list[RankedElement]:
        rows = [
            (float(scores[i]), entry.element)
            for i, entry in enumerate(index.entries)
            if entry.kind == kind
        ]
        rows.sort(key=lambda r: (-r[0], r[1]))
        return [RankedElement(element, score) for score, element in rows[:k]]

    return Candidates(classes=ranked("class"), links=ranked("link"))
