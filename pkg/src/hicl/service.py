"""HTTP API for programmatic clients and the annotation workbench.

Annotations are persisted to an append-only JSONL log, fsynced before the
request is acknowledged; restarting the service over the same log restores
every acknowledged annotation. The retrieval database is held as an immutable
snapshot; annotation-driven appends build a new snapshot and swap it in
atomically, so readers never observe a partial append.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from . import prompts
from .corpus import Document, tokenize
from .indexer import EncoderParams
from .inference import (
    InferenceConfig,
    classify_iterative,
    classify_retrieval_only,
)
from .llm import LLMClient, OracleDemoClient
from .retrieval import RetrievalDatabase, append_instance, search_topk_diverse
from .taxonomy import ROOT_ID, Taxonomy
from .indexer import encode


class RetrieveRequest(BaseModel):
    text: str = Field(min_length=1)
    k: int = Field(default=3, ge=1)


class ClassifyRequest(BaseModel):
    text: str = Field(min_length=1)
    k: int = Field(default=3, ge=1)
    iterative: bool = True
    demos: bool = True
    pruning: bool = True
    candidate_set: bool = True
    fallback_policy: str = "paper"


class AnnotationRequest(BaseModel):
    annotator: str = Field(min_length=1)
    path: list[str] = Field(min_length=1)
    seconds: float = Field(ge=0)
    mode: str = Field(default="retrieval-assisted")
    suggestion: Optional[list[str]] = None


@dataclass
class ServiceState:
    taxonomy: Taxonomy
    params: EncoderParams
    db: RetrievalDatabase
    tasks: list[Document]                    # documents awaiting annotation
    doc_texts: dict[str, str]                # retrieval doc id -> text
    annotations_path: Path
    llm: LLMClient = field(default_factory=OracleDemoClient)
    append_on_annotate: bool = False
    reloading: bool = False

    def __post_init__(self):
        self._write_lock = threading.Lock()
        self._db_lock = threading.Lock()
        self.annotations: list[dict] = []
        self._seen: set[tuple[str, str]] = set()
        self._replay()

    # -- durability -------------------------------------------------------

    def _replay(self) -> None:
        if not self.annotations_path.exists():
            return
        with open(self.annotations_path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                self.annotations.append(record)
                self._seen.add((record["doc_id"], record["annotator"]))

    def persist(self, record: dict) -> None:
        with self._write_lock:
            with open(self.annotations_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
                f.flush()
                os.fsync(f.fileno())
            self.annotations.append(record)
            self._seen.add((record["doc_id"], record["annotator"]))

    def already_annotated(self, doc_id: str, annotator: str) -> bool:
        return (doc_id, annotator) in self._seen

    def annotators_of(self, doc_id: str) -> set[str]:
        return {r["annotator"] for r in self.annotations if r["doc_id"] == doc_id}

    # -- db snapshot ------------------------------------------------------

    def snapshot(self) -> RetrievalDatabase:
        with self._db_lock:
            return self.db

    def append_document(self, doc: Document) -> None:
        with self._db_lock:
            self.db = append_instance(self.db, doc, self.params)
            self.doc_texts[doc.id] = doc.text


def create_app(state: ServiceState, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="hicl annotation service")
    token = os.environ.get("HICL_API_TOKEN")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def guard(request: Request) -> None:
        if token and request.headers.get("x-api-token") != token:
            raise HTTPException(status_code=401, detail="missing or bad api token")
        if state.reloading:
            raise HTTPException(status_code=503, detail="database reloading")

    @app.get("/api/taxonomy")
    def get_taxonomy(request: Request):
        guard(request)
        tax = state.taxonomy
        nodes = []
        for level in range(0, tax.depth + 1):
            for nid in ([ROOT_ID] if level == 0 else tax.level_nodes(level)):
                node = tax.node(nid)
                nodes.append(
                    {
                        "id": node.id,
                        "name": node.name,
                        "level": node.level,
                        "parent": node.parent,
                        "children": tax.children_of(nid),
                        "description": tax.description_of(nid),
                    }
                )
        return {"depth": tax.depth, "nodes": nodes}

    @app.post("/api/retrieve")
    def retrieve(body: RetrieveRequest, request: Request):
        guard(request)
        db = state.snapshot()
        vectors = encode(tokenize(body.text), state.params).m
        ranked = search_topk_diverse(db, vectors, body.k)
        demos = []
        for inst, score in ranked:
            demos.append(
                {
                    "doc_id": inst.doc_id,
                    "text": state.doc_texts.get(inst.doc_id, ""),
                    "score": score,
                    "labels": state.taxonomy.path_names(inst.path),
                }
            )
        return {"demos": demos}

    @app.post("/api/classify")
    def classify(body: ClassifyRequest, request: Request):
        guard(request)
        db = state.snapshot()
        cfg = InferenceConfig(
            k=body.k,
            iterative=body.iterative,
            demos=body.demos,
            pruning=body.pruning,
            candidate_set=body.candidate_set,
            fallback_policy=body.fallback_policy,
        )
        trace = classify_iterative(
            body.text, db, state.params, state.taxonomy, cfg, state.llm, state.doc_texts
        )
        return {
            "final_labels": list(trace.final_names),
            "llm_calls": trace.llm_calls,
            "template_version": trace.template_version,
            "db_fingerprint": trace.db_fingerprint,
            "levels": [
                {
                    "level": lv.level,
                    "demo_ids": list(lv.demo_ids),
                    "candidates": list(lv.candidates),
                    "raw_reply": lv.raw_reply,
                    "parsed_label": lv.parsed_label,
                    "fallback_used": lv.fallback_used,
                }
                for lv in trace.levels
            ],
        }

    @app.get("/api/tasks/next")
    def next_task(request: Request, annotator: str = ""):
        guard(request)
        for doc in state.tasks:
            if annotator:
                if state.already_annotated(doc.id, annotator):
                    continue
            elif state.annotators_of(doc.id):
                continue
            db = state.snapshot()
            suggestion = None
            if len(db):
                path = classify_retrieval_only(doc.text, db, state.params)
                suggestion = state.taxonomy.path_names(path)
            return {"id": doc.id, "text": doc.text, "suggestion": suggestion}
        raise HTTPException(status_code=404, detail="no unannotated tasks remain")

    @app.post("/api/tasks/{doc_id}/annotation")
    def annotate(doc_id: str, body: AnnotationRequest, request: Request):
        guard(request)
        doc = next((d for d in state.tasks if d.id == doc_id), None)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown task {doc_id!r}")
        if state.already_annotated(doc_id, body.annotator):
            raise HTTPException(
                status_code=409, detail=f"{body.annotator!r} already annotated {doc_id!r}"
            )
        try:
            path = state.taxonomy.resolve_path(body.path)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        record = {
            "doc_id": doc_id,
            "annotator": body.annotator,
            "path": body.path,
            "mode": body.mode,
            "suggestion": body.suggestion,
            "seconds": body.seconds,
            "timestamp": time.time(),
        }
        state.persist(record)
        if state.append_on_annotate:
            labeled = Document(
                id=f"{doc_id}+ann", text=doc.text, tokens=doc.tokens, gold=path
            )
            state.append_document(labeled)
        return {"ok": True}

    @app.get("/api/stats")
    def stats(request: Request):
        guard(request)
        records = state.annotations
        per_mode: dict[str, dict] = {}
        for r in records:
            agg = per_mode.setdefault(r["mode"], {"count": 0, "total_seconds": 0.0})
            agg["count"] += 1
            agg["total_seconds"] += r["seconds"]
        for agg in per_mode.values():
            agg["avg_seconds"] = agg["total_seconds"] / agg["count"]
        by_doc: dict[str, list[tuple[str, ...]]] = {}
        for r in records:
            by_doc.setdefault(r["doc_id"], []).append(tuple(r["path"]))
        multi = [paths for paths in by_doc.values() if len(paths) > 1]
        agree = sum(1 for paths in multi if len(set(paths)) == 1)
        return {
            "count": len(records),
            "avg_seconds": (
                sum(r["seconds"] for r in records) / len(records) if records else 0.0
            ),
            "per_mode": per_mode,
            "agreement": {"docs_multi_annotated": len(multi), "docs_all_agree": agree},
            "db_size": len(state.snapshot()),
            "template_version": prompts.TEMPLATE_VERSION,
        }

    if ui_dir is not None and ui_dir.exists():
        root = ui_dir.resolve()

        @app.get("/")
        def index():
            return FileResponse(root / "index.html")

        @app.get("/{asset:path}")
        def asset(asset: str):
            target = (root / asset).resolve()
            if root not in target.parents or not target.is_file():
                raise HTTPException(status_code=404, detail="no such asset")
            return FileResponse(target)

    return app
