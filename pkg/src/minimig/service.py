"""HTTP session service consumed by the companion UI.

Every state-changing endpoint maps onto exactly one engine directive; the
service never mutates models directly. Directives are serialized behind a
lock. In the choice modes a directive suspends on a pending-choice token:
the worker thread blocks inside the chooser until the client answers (or
abandons, which unwinds the transaction and leaves state unchanged). Read
endpoints serve the last committed view, so trees stay stable while a
directive is in flight.
"""

from __future__ import annotations

import queue
import threading
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .errors import ChoiceCancelled, MigrationError, NotExportable
from .frontends.dialect import validate
from .frontends.printer import print_model, render_fragment
from .meta_model import NodeRef
from .rule_system import ChoicePrompt, LookupMode, RuleFamily
from .session import Session

_CANCEL = object()


class ProduceBody(BaseModel):
    source: str
    target: str
    mode: str = "auto"


class MapBody(BaseModel):
    source: str
    target: str
    scope: str


class AnswerBody(BaseModel):
    token: str
    choice: Optional[int] = None
    cancel: bool = False


class RollbackBody(BaseModel):
    txn: Optional[int] = None


class ExportBody(BaseModel):
    model: str


class _PendingDirective:
    """A directive suspended on user choices; owns the worker thread."""

    def __init__(self):
        self.token = uuid.uuid4().hex
        self.events: "queue.Queue[tuple[str, object]]" = queue.Queue()
        self.answers: "queue.Queue[object]" = queue.Queue()

    def chooser(self, prompt: ChoicePrompt) -> int:
        self.events.put(("prompt", prompt))
        answer = self.answers.get()
        if answer is _CANCEL:
            raise ChoiceCancelled("directive abandoned")
        return int(answer)  # type: ignore[arg-type]

    def run(self, fn) -> None:
        def worker():
            try:
                self.events.put(("done", fn()))
            except Exception as exc:  # surfaced to the waiting request
                self.events.put(("error", exc))

        threading.Thread(target=worker, daemon=True).start()

    def next_event(self) -> tuple[str, object]:
        return self.events.get(timeout=30)


def _ref_json(workspace, ref: NodeRef) -> dict:
    return {"model": ref.model_id, "node": ref.node_id, "path": workspace.decl_path(ref)}


def _result_json(session: Session, result) -> dict:
    ws = session.workspace
    return {
        "status": "applied",
        "txn": result.txn_id,
        "directive": result.directive,
        "createdNodes": [_ref_json(ws, r) for r in result.created_nodes if ws.has(r)],
        "mappings": result.mappings,
        "stubsCreated": [{"model": r.model_id, "node": r.node_id} for r in result.stubs_created],
        "adapted": [{"model": r.model_id, "node": r.node_id} for r in result.adapted],
        "stubsRemoved": [{"model": r.model_id, "node": r.node_id} for r in result.stubs_removed],
        "log": result.log,
    }


def build_app(session: Session) -> FastAPI:
    app = FastAPI(title="minimig session service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    state = _ServiceState(session)

    @app.get("/models")
    def models():
        return state.committed["models"]

    @app.get("/models/{model_id}/tree")
    def tree(model_id: str):
        trees = state.committed["trees"]
        if model_id not in trees:
            raise HTTPException(404, f"no model {model_id!r}")
        return trees[model_id]

    @app.get("/nodes/{model_id}/{node_id}/source")
    def node_source(model_id: str, node_id: int):
        try:
            model = session.workspace.model(model_id)
            text = render_fragment(model, node_id)
        except MigrationError as exc:
            raise HTTPException(404, str(exc))
        return {"model": model_id, "node": node_id, "text": text}

    @app.get("/rules/applicable")
    def applicable_rules(source: str, target: str):
        try:
            source_ref = session.workspace.resolve_path(source)
            target_ref = session.workspace.resolve_path(target)
        except MigrationError as exc:
            raise HTTPException(404, str(exc))
        ops = _ReadOps(session)
        chain = session.workspace.context_chain(target_ref)
        candidates = []
        for inst in session.rulebook.along_chain(chain, RuleFamily.PRODUCTIVE):
            if inst.rule.condition(ops, source_ref, target_ref):
                candidates.append({
                    "rule": inst.rule.describe(),
                    "seq": inst.seq,
                    "context": session.workspace.decl_path(inst.context),
                })
        return {"source": source, "target": target, "candidates": candidates}

    @app.get("/contexts/{model_id}/{node_id}/info")
    def context_info(model_id: str, node_id: int):
        ws = session.workspace
        try:
            ref = NodeRef(model_id, node_id)
            chain = ws.context_chain(ref)
        except MigrationError as exc:
            raise HTTPException(404, str(exc))
        visible = {ctx: depth for depth, ctx in enumerate(chain)}
        mappings = [
            {
                "source": ws.decl_path(r.mapping.source),
                "target": ws.decl_path(r.mapping.target),
                "scope": ws.decl_path(r.mapping.scope),
                "origin": r.mapping.origin,
            }
            for r in session.mapbook.all_records()
            if r.mapping.scope in visible
        ]
        unresolved = [
            {"node": row[0].node_id, "stub": row[1], "foreign": row[2]}
            for row in session.engine.unresolved_report(ref)
        ]
        rules = {
            "productive": [
                {"rule": i.rule.describe(), "context": ws.decl_path(i.context)}
                for i in session.rulebook.along_chain(chain, RuleFamily.PRODUCTIVE)
            ],
            "adaptive": [
                {"rule": i.rule.describe(), "context": ws.decl_path(i.context)}
                for i in session.rulebook.along_chain(chain, RuleFamily.ADAPTIVE)
            ],
        }
        return {"context": ws.decl_path(ref), "mappings": mappings,
                "unresolved": unresolved, "rules": rules}

    @app.post("/directives/produce")
    def produce(body: ProduceBody):
        try:
            mode = LookupMode(body.mode)
            source = session.workspace.resolve_path(body.source)
            target = session.workspace.resolve_path(body.target)
        except (ValueError, MigrationError) as exc:
            raise HTTPException(422, str(exc))
        return state.run_directive(
            lambda: session.engine.produce(source, target, mode),
            interactive=mode is not LookupMode.AUTOMATIC,
        )

    @app.post("/directives/map")
    def map_directive(body: MapBody):
        try:
            source = session.workspace.resolve_path(body.source)
            target = session.workspace.resolve_path(body.target)
            scope = session.workspace.resolve_path(body.scope)
        except MigrationError as exc:
            raise HTTPException(422, str(exc))
        return state.run_directive(lambda: session.engine.map(source, target, scope),
                                   interactive=False)

    @app.post("/directives/answer")
    def answer(body: AnswerBody):
        return state.answer(body)

    @app.post("/rollback")
    def rollback(body: RollbackBody):
        stack = session.engine.applied
        if not stack:
            raise HTTPException(409, "transaction stack is empty")
        txn_id = body.txn if body.txn is not None else stack[-1].id
        try:
            with state.directive_lock():
                session.engine.rollback(txn_id)
                state.refresh()
        except MigrationError as exc:
            raise HTTPException(409, str(exc))
        return {"status": "rolledBack", "txn": txn_id}

    @app.post("/export")
    def export(body: ExportBody):
        try:
            model = session.workspace.model(body.model)
            text = print_model(model)
        except NotExportable as exc:
            raise HTTPException(409, {
                "error": "NotExportable",
                "violations": [
                    {"node": v.node_id, "reason": v.reason.value, "detail": v.detail}
                    for v in exc.violations
                ],
            })
        except MigrationError as exc:
            raise HTTPException(404, str(exc))
        return {"model": body.model, "text": text}

    @app.get("/transactions")
    def transactions():
        return {
            "stack": [
                {"txn": t.id, "label": t.label, "status": t.status}
                for t in session.engine.applied
            ]
        }

    @app.get("/log")
    def log(since: int = 0):
        lines = session.engine.session_log
        return {"lines": lines[since:], "next": len(lines)}

    return app


class _ReadOps:
    """Read-only stand-in handed to rule conditions outside directives."""

    def __init__(self, session: Session):
        self.workspace = session.workspace
        self.chooser = None


class _ServiceState:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.pending: Optional[_PendingDirective] = None
        self.committed: dict = {}
        self.refresh()

    def directive_lock(self):
        if not self.lock.acquire(timeout=30):
            raise HTTPException(409, "another directive is in flight")
        outer = self

        class _Guard:
            def __enter__(self):
                return self

            def __exit__(self, *exc):
                outer.lock.release()
                return False

        return _Guard()

    # -- committed view -------------------------------------------------------

    def refresh(self) -> None:
        ws = self.session.workspace
        trees = {}
        models = []
        for model_id in sorted(ws.models):
            model = ws.model(model_id)
            violations = validate(model)
            violating = {v.node_id for v in violations}
            stub_rows = self.session.engine.unresolved_report(NodeRef(model_id, model.root))
            stubby = {row[0].node_id for row in stub_rows}

            def build(node_id: int) -> dict:
                node = model.node(node_id)
                subtree_unresolved = sum(1 for other in stubby
                                         if _is_within(model, other, node_id))
                return {
                    "id": node_id,
                    "kind": node.kind.value,
                    "name": node.name,
                    "declaration": node.is_declaration(),
                    "badges": {
                        "stubRef": node_id in stubby,
                        "violation": node_id in violating,
                        "unresolved": subtree_unresolved,
                    },
                    "children": [build(c) for c in node.children],
                }

            root_tree = build(model.root)
            root_tree["library"] = [build(lib_id) for lib_id in sorted(
                model.library, key=lambda i: (model.node(i).kind.value, model.node(i).name or ""))]
            trees[model_id] = root_tree
            models.append({
                "id": model_id,
                "dialect": model.dialect,
                "role": self.session.roles.get(model_id, "target"),
                "root": model.root,
                "violations": len(violations),
                "unresolved": len(stub_rows),
            })
        self.committed = {"models": models, "trees": trees}

    # -- directive execution -----------------------------------------------------

    def run_directive(self, fn, interactive: bool):
        if not self.lock.acquire(blocking=False):
            raise HTTPException(409, "another directive is in flight")
        if not interactive:
            try:
                result = fn()
            except MigrationError as exc:
                raise HTTPException(422, {"error": type(exc).__name__, "detail": str(exc)})
            finally:
                self.refresh()
                self.lock.release()
            return _result_json(self.session, result)
        pending = _PendingDirective()
        self.session.set_chooser(pending.chooser)
        try:
            pending.run(fn)
            self.pending = pending
        except Exception:
            self.session.set_chooser(None)
            self.lock.release()
            raise
        return self._await_event(pending)

    def _await_event(self, pending: _PendingDirective):
        """Next prompt from the worker, or the directive's final outcome.
        The directive lock is held until the outcome arrives."""
        try:
            kind, payload = pending.next_event()
        except queue.Empty:
            self._finish_pending()
            raise HTTPException(504, "directive did not respond")
        if kind == "prompt":
            prompt: ChoicePrompt = payload  # type: ignore[assignment]
            return {
                "status": "pendingChoice",
                "token": pending.token,
                "prompt": {"kind": prompt.kind, "subject": prompt.subject, "options": prompt.options},
            }
        self._finish_pending()
        if kind == "error":
            if isinstance(payload, ChoiceCancelled):
                return {"status": "abandoned"}
            raise HTTPException(422, {"error": type(payload).__name__, "detail": str(payload)})
        return _result_json(self.session, payload)

    def _finish_pending(self) -> None:
        self.pending = None
        self.session.set_chooser(None)
        self.refresh()
        self.lock.release()

    def answer(self, body: AnswerBody):
        pending = self.pending
        if pending is None or pending.token != body.token:
            raise HTTPException(409, "no pending choice for that token")
        pending.answers.put(_CANCEL if body.cancel else (body.choice or 0))
        return self._await_event(pending)


def _is_within(model, node_id: int, ancestor: int) -> bool:
    current: Optional[int] = node_id
    while current is not None:
        if current == ancestor:
            return True
        current = model.node(current).parent
    return False
