"""Migration sessions: loaded models, installed rules, fixture mappings.

A session owns one workspace plus the rule and mapping registries and the
engine's transaction stack. All mutation happens through the engine, one
directive at a time; manifest-level setup (rules, fixture mappings) is not
transactional and cannot be rolled back.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .builtin_rules import create_rule
from .engine import Engine
from .frontends.dialect import DIALECTS, MINIPROC, install_catalog
from .frontends.miniproc import parse_source
from .frontends.targets import parse_target_skeleton
from .meta_model import GLOBAL_ROOT, Model, NodeRef, Workspace
from .rule_system import Chooser, Mapping, MappingBook, RuleBook


class Session:
    def __init__(self):
        self.workspace = Workspace()
        self.rulebook = RuleBook(self.workspace)
        self.mapbook = MappingBook(self.workspace)
        self.engine = Engine(self.workspace, self.rulebook, self.mapbook)
        self.roles: dict[str, str] = {}  # model id -> source | target

    # -- setup ------------------------------------------------------------------

    def load_model(self, model_id: str, dialect: str, role: str, text: str = "") -> Model:
        if dialect == MINIPROC:
            model = parse_source(text, model_id)
        elif text.strip():
            model = parse_target_skeleton(dialect, text, model_id)
        else:
            model = Model(model_id, dialect)
            install_catalog(model)
        self.workspace.add_model(model)
        self.roles[model_id] = role
        return model

    def resolve_context(self, path: str) -> NodeRef:
        if path in ("global", ""):
            return GLOBAL_ROOT
        return self.workspace.resolve_path(path)

    def install(self, rule_name: str, parameters: Optional[dict] = None, context: str = "global"):
        rule = create_rule(rule_name, **(parameters or {}))
        return self.rulebook.install(rule, self.resolve_context(context))

    def register_fixture_mapping(self, source: str, target: str, scope: Optional[str] = None) -> None:
        target_ref = self.workspace.resolve_path(target)
        scope_ref = (self.workspace.resolve_path(scope) if scope
                     else NodeRef(target_ref.model_id, self.workspace.model(target_ref.model_id).root))
        self.mapbook.register(Mapping(
            source=self.workspace.resolve_path(source),
            target=target_ref,
            scope=scope_ref,
            origin="UserDirective",
        ))

    def set_chooser(self, chooser: Optional[Chooser]) -> None:
        self.engine.chooser = chooser

    # -- state inspection -----------------------------------------------------

    def snapshot_state(self) -> str:
        """Serialized session state: every model plus the mapping registry.
        Equal strings mean structurally equal states."""
        parts = []
        for model_id in sorted(self.workspace.models):
            parts.append(f"=== model {model_id}")
            parts.append(self.workspace.snapshot(model_id))
        rows = sorted(
            f"{self.workspace.decl_path(r.mapping.source)} => "
            f"{self.workspace.decl_path(r.mapping.target)} "
            f"@ {self.workspace.decl_path(r.mapping.scope)} [{r.mapping.origin}]"
            for r in self.mapbook.all_records()
        )
        parts.append("=== mappings")
        parts.extend(rows)
        return "\n".join(parts) + "\n"


def load_manifest(path: Path) -> Session:
    """Build a session from a manifest file: model triples (dialect, role,
    path), rule installations, and fixture mappings."""
    path = Path(path)
    data = json.loads(path.read_text())
    session = Session()
    for entry in data.get("models", []):
        dialect = entry["dialect"]
        if dialect not in DIALECTS:
            raise ValueError(f"unknown dialect {dialect!r}")
        text = ""
        if entry.get("path"):
            text = (path.parent / entry["path"]).read_text()
        session.load_model(entry["id"], dialect, entry.get("role", "target"), text)
    for entry in data.get("rules", []):
        session.install(entry["rule"], entry.get("params"), entry.get("context", "global"))
    for entry in data.get("mappings", []):
        session.register_fixture_mapping(entry["source"], entry["target"], entry.get("scope"))
    return session
