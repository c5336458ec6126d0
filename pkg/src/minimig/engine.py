"""Directive execution: recursive produce, map with its adaptive phase,
LIFO rollback and export.

Every directive runs inside one transaction. All mutations go through the
``MigrationOps`` facade, which records an inverse operation for each one;
playing the journal backwards restores the pre-directive state exactly,
whether the user refused the outcome or a rule blew up halfway through.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .errors import (
    ChooserRequired,
    DirectivePrecondition,
    MigrationError,
    NotTopOfStack,
    RuleApplicationFailed,
)
from .frontends.dialect import DIALECTS
from .frontends.printer import print_model
from .meta_model import (
    DECLARATION_KINDS,
    GLOBAL_ROOT,
    NodeKind,
    NodeRef,
    Shape,
    Site,
    Workspace,
)
from .rule_system import (
    Chooser,
    LookupMode,
    Mapping,
    MappingBook,
    MappingRecord,
    RuleBook,
    RuleFamily,
    lookup_adaptive,
    lookup_productive,
    unresolved_target,
)


@dataclass
class Transaction:
    id: int
    label: str
    undo_ops: list[Callable[[], None]] = field(default_factory=list)
    status: str = "Applied"

    def record(self, undo: Callable[[], None]) -> None:
        self.undo_ops.append(undo)

    def unwind(self) -> None:
        for undo in reversed(self.undo_ops):
            undo()
        self.undo_ops.clear()
        self.status = "RolledBack"


@dataclass
class DirectiveResult:
    txn_id: int
    directive: str
    created_nodes: list[NodeRef] = field(default_factory=list)
    mappings: list[int] = field(default_factory=list)
    stubs_created: list[NodeRef] = field(default_factory=list)
    adapted: list[NodeRef] = field(default_factory=list)
    stubs_removed: list[NodeRef] = field(default_factory=list)
    unadapted: list[NodeRef] = field(default_factory=list)
    log: list[str] = field(default_factory=list)


class MigrationOps:
    """Transaction-scoped mutation facade handed to rules.

    Rules never touch models directly: every mutation made here lands in the
    journal of the directive's transaction, and child migration is delegated
    back through :meth:`migrate` so nested lookups stay rule-driven.
    """

    def __init__(self, engine: "Engine", txn: Transaction, result: DirectiveResult,
                 mode: LookupMode, chooser: Optional[Chooser]):
        self.engine = engine
        self.workspace: Workspace = engine.workspace
        self.txn = txn
        self.result = result
        self.mode = mode
        self.chooser = chooser

    # -- journaled primitives -------------------------------------------------

    def create_node(self, model_id: str, parent: int, kind: NodeKind,
                    name: Optional[str] = None, payload: Optional[dict] = None,
                    origin: Optional[NodeRef] = None, site_ident: Optional[str] = None) -> int:
        model = self.workspace.model(model_id)
        node_id = model.add_node(parent, kind, name, payload)
        node = model.node(node_id)
        node.origin = origin
        node.site_ident = site_ident

        def undo():
            # later journal entries have already detached any children
            if model.node(node_id).parent is not None:
                model.detach(node_id)
            model.delete_node(node_id)

        self.txn.record(undo)
        self.result.created_nodes.append(NodeRef(model_id, node_id))
        return node_id

    def create_detached(self, model_id: str, kind: NodeKind,
                        name: Optional[str] = None, payload: Optional[dict] = None,
                        origin: Optional[NodeRef] = None, site_ident: Optional[str] = None) -> int:
        model = self.workspace.model(model_id)
        node_id = model.add_detached(kind, name, payload)
        node = model.node(node_id)
        node.origin = origin
        node.site_ident = site_ident

        def undo():
            if model.node(node_id).parent is not None:
                model.detach(node_id)
            model.delete_node(node_id)

        self.txn.record(undo)
        self.result.created_nodes.append(NodeRef(model_id, node_id))
        return node_id

    def copy_one(self, source: NodeRef, target_model_id: str, target_parent: int) -> int:
        """Shallow structural copy: same kind, name and scalar payload; the
        referee and declared-type edges stay empty for later re-binding."""
        src = self.workspace.node(source)
        return self.create_node(
            target_model_id, target_parent, src.kind, src.name, dict(src.payload),
            origin=source, site_ident=src.site_ident,
        )

    def set_site(self, model_id: str, site: Site, target: Optional[int]) -> None:
        model = self.workspace.model(model_id)
        old = model.get_site(site)
        model.set_site(site, target)
        self.txn.record(lambda: model.set_site(site, old))

    def detach(self, model_id: str, node_id: int) -> tuple[int, int]:
        model = self.workspace.model(model_id)
        parent, index = model.detach(node_id)
        self.txn.record(lambda: model.attach(parent, index, node_id))
        return parent, index

    def attach(self, model_id: str, parent: int, index: int, node_id: int) -> None:
        model = self.workspace.model(model_id)
        model.attach(parent, index, node_id)
        self.txn.record(lambda: model.detach(node_id))

    def delete_node(self, model_id: str, node_id: int) -> None:
        model = self.workspace.model(model_id)
        node = model.delete_node(node_id)
        self.txn.record(lambda: model.restore_node(node))

    def delete_subtree(self, model_id: str, node_id: int) -> None:
        model = self.workspace.model(model_id)
        for child in list(model.node(node_id).children):
            self.delete_subtree(model_id, child)
        if model.node(node_id).parent is not None:
            self.detach(model_id, node_id)
        self.delete_node(model_id, node_id)

    def replace_node(self, model_id: str, old_id: int, new_id: int, move_children: bool = True) -> None:
        """Swap ``new_id`` into the tree position of ``old_id``; optionally
        move the old node's children across (order preserved), then drop it."""
        model = self.workspace.model(model_id)
        if move_children:
            for position, child in enumerate(list(model.node(old_id).children)):
                self.detach(model_id, child)
                self.attach(model_id, new_id, position, child)
        parent, index = self.detach(model_id, old_id)
        if model.node(new_id).parent is not None:
            self.detach(model_id, new_id)
        self.attach(model_id, parent, index, new_id)
        self.delete_node(model_id, old_id)

    def make_stub(self, host_model_id: str, foreign: NodeRef, shape: Optional[Shape] = None) -> int:
        model = self.workspace.model(host_model_id)
        existing = model.stub_for(foreign)
        if existing is not None:
            return existing
        stub_id = self.workspace.make_stub(host_model_id, foreign, shape)
        self.txn.record(lambda: model.delete_node(stub_id))
        self.result.stubs_created.append(NodeRef(host_model_id, stub_id))
        return stub_id

    def register_mapping(self, mapping: Mapping) -> MappingRecord:
        record, created = self.engine.mapbook.register(mapping)
        if created:
            self.txn.record(lambda: self.engine.mapbook.remove(record))
            self.result.mappings.append(record.seq)
            self.log(
                f"mapping {self.workspace.decl_path(mapping.source)} => "
                f"{self.workspace.decl_path(mapping.target)} "
                f"[{mapping.origin}] @ {self.workspace.decl_path(mapping.scope)}"
            )
            self.engine._adaptive_phase(self, record.mapping)
        return record

    # -- recursion & helpers -----------------------------------------------------

    def migrate(self, source: NodeRef, target_parent: NodeRef) -> int:
        return self.engine._migrate(self, source, target_parent)

    def migrate_children(self, source: NodeRef, target_parent: NodeRef) -> None:
        for child in list(self.workspace.node(source).children):
            self.engine._migrate(self, NodeRef(source.model_id, child), target_parent)

    def fix_reference(self, ref: NodeRef, allow_fallback: bool = True) -> bool:
        return self.engine._fix_reference(self, ref, allow_fallback)

    def find_library(self, model_id: str, name: str) -> Optional[int]:
        return self.workspace.model(model_id).find_library(name)

    def top_type(self, model_id: str) -> Optional[int]:
        model = self.workspace.model(model_id)
        return model.find_library(DIALECTS[model.dialect].top_type)

    def void_type(self, model_id: str) -> Optional[int]:
        return self.find_library(model_id, "void")

    def log(self, line: str) -> None:
        self.result.log.append(line)
        self.engine.session_log.append(line)


class Engine:
    """Serialized directive executor over one workspace."""

    def __init__(self, workspace: Workspace, rulebook: RuleBook, mapbook: MappingBook,
                 chooser: Optional[Chooser] = None):
        self.workspace = workspace
        self.rulebook = rulebook
        self.mapbook = mapbook
        self.chooser = chooser
        self.applied: list[Transaction] = []
        self.session_log: list[str] = []
        self._txn_ids = itertools.count(1)

    # -- directives ---------------------------------------------------------------

    def produce(self, source: NodeRef, target_context: NodeRef,
                mode: LookupMode = LookupMode.AUTOMATIC) -> DirectiveResult:
        """Create the migrated version of ``source`` inside ``target_context``.

        Recursive rule-driven production, then the reference-fixing pass over
        every created unbound reference (mapping double lookup, library
        fallback, else a stub), then the automatic source-to-produced mapping
        when the source is a declaration.
        """
        if not self.workspace.has(source):
            raise DirectivePrecondition(f"no source {source}")
        if not self.workspace.has(target_context):
            raise DirectivePrecondition(f"no target context {target_context}")
        if source.model_id == target_context.model_id:
            raise DirectivePrecondition("produce requires a target in a different model")
        if self.workspace.node(target_context).kind not in DECLARATION_KINDS:
            raise DirectivePrecondition(f"target context {target_context} is not a declaration")
        if mode is not LookupMode.AUTOMATIC and self.chooser is None:
            raise ChooserRequired(f"{mode.value} mode requires a chooser")
        label = (f"produce {self.workspace.decl_path(source)} -> "
                 f"{self.workspace.decl_path(target_context)}")

        def run(ops: MigrationOps) -> None:
            ops.log(label)
            created = self._migrate(ops, source, target_context, root=True)
            self._fix_created_references(ops)
            root_ref = NodeRef(target_context.model_id, created)
            if self.workspace.node(source).kind in DECLARATION_KINDS:
                ops.register_mapping(Mapping(source=source, target=root_ref,
                                             scope=self._mapping_scope(root_ref),
                                             origin="ProduceAuto"))
            self._sweep_stubs(ops, target_context.model_id)

        return self._run_transaction(label, mode, run)

    def map(self, source_decl: NodeRef, target_decl: NodeRef, scope: NodeRef) -> DirectiveResult:
        """Declare source and target semantically equivalent within ``scope``
        and run the adaptive phase over every unresolved use in that scope."""
        for ref in (source_decl, target_decl):
            if not self.workspace.has(ref):
                raise DirectivePrecondition(f"no declaration {ref}")
            if self.workspace.node(ref).kind not in DECLARATION_KINDS:
                raise DirectivePrecondition(f"{ref} is not a declaration")
        if not self.workspace.has(scope) or not self.workspace.node(scope).is_declaration():
            raise DirectivePrecondition(f"scope {scope} is not an existing declaration")
        label = (f"map {self.workspace.decl_path(source_decl)} => "
                 f"{self.workspace.decl_path(target_decl)}")

        def run(ops: MigrationOps) -> None:
            ops.log(label)
            ops.register_mapping(Mapping(source=source_decl, target=target_decl,
                                         scope=scope, origin="UserDirective"))
            self._sweep_stubs(ops, target_decl.model_id)

        return self._run_transaction(label, LookupMode.AUTOMATIC, run)

    def rollback(self, txn_id: int) -> None:
        """Undo the most recent applied directive (strictly LIFO)."""
        if not self.applied or self.applied[-1].id != txn_id:
            raise NotTopOfStack(f"transaction {txn_id} is not on top")
        txn = self.applied.pop()
        txn.unwind()
        self.session_log.append(f"rolled back txn {txn.id}: {txn.label}")

    def export(self, model_id: str, out_dir: Path) -> list[Path]:
        model = self.workspace.model(model_id)
        text = print_model(model)  # raises NotExportable when violations remain
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{model_id}.{DIALECTS[model.dialect].file_extension}"
        path.write_text(text)
        self.session_log.append(f"exported {model_id} -> {path}")
        return [path]

    def unresolved_report(self, context: NodeRef) -> list[tuple[NodeRef, int, str]]:
        """Read-only census of stub-bridged references under a declaration."""
        model = self.workspace.model(context.model_id)
        rows = []
        for site in model.iter_sites(context.node_id):
            target = model.get_site(site)
            if target is not None and model.node(target).stub is not None:
                info = model.node(target).stub
                rows.append((NodeRef(model.id, site.node_id), target, self.workspace.decl_path(info.foreign)))
        return rows

    # -- internals -------------------------------------------------------------------

    def _run_transaction(self, label: str, mode: LookupMode,
                         body: Callable[[MigrationOps], None]) -> DirectiveResult:
        txn = Transaction(id=next(self._txn_ids), label=label)
        result = DirectiveResult(txn_id=txn.id, directive=label)
        ops = MigrationOps(self, txn, result, mode, self.chooser)
        try:
            body(ops)
        except Exception as exc:
            txn.unwind()
            self.session_log.append(f"failed: {label}: {exc}")
            raise
        self.applied.append(txn)
        return result

    def _migrate(self, ops: MigrationOps, source: NodeRef, target_parent: NodeRef,
                 root: bool = False) -> int:
        """One engine-loop step: look up the productive rule, apply it, and
        auto-map declaration sources to what they produced."""
        mode = ops.mode if (root or ops.mode is LookupMode.DEBUG) else LookupMode.AUTOMATIC
        installation = lookup_productive(ops, self.rulebook, source, target_parent,
                                         mode, ops.chooser)
        rule = installation.rule
        try:
            created = rule.apply(ops, source, target_parent)
        except MigrationError:
            raise
        except Exception as exc:
            raise RuleApplicationFailed(rule.name, exc) from exc
        created_ref = NodeRef(target_parent.model_id, created)
        ops.log(f"{rule.describe()}: {self.workspace.node(source).kind.value} "
                f"{self.workspace.node(source).name or ''} -> #{created}".rstrip())
        if not root and self.workspace.node(source).kind in DECLARATION_KINDS:
            # automatically recorded mappings are valid project-wide, so that
            # references migrated earlier (other classes included) adapt too
            model = self.workspace.model(created_ref.model_id)
            ops.register_mapping(Mapping(source=source, target=created_ref,
                                         scope=NodeRef(created_ref.model_id, model.root),
                                         origin="ProduceAuto"))
        return created

    def _mapping_scope(self, created: NodeRef) -> NodeRef:
        """Scope for the directive-level automatic mapping: the declaration
        context the node was produced into (its parent, not the node itself)."""
        model = self.workspace.model(created.model_id)
        parent = model.node(created.node_id).parent
        base = NodeRef(created.model_id, parent if parent is not None else model.root)
        chain = self.workspace.context_chain(base)
        return chain[0] if chain[0] != GLOBAL_ROOT else base

    def _fix_created_references(self, ops: MigrationOps) -> None:
        """Reference-fixing pass: every created, still-unbound reference site
        gets the adaptive double lookup; where nothing applies, a stub."""
        for ref in list(ops.result.created_nodes):
            model = self.workspace.model(ref.model_id)
            if not model.has(ref.node_id):
                continue  # replaced during an earlier fix
            for site in model.sites_of(ref.node_id):
                if model.get_site(site) is None:
                    self._fix_reference(ops, ref, allow_fallback=True)
                    break

    def _fix_reference(self, ops: MigrationOps, ref: NodeRef, allow_fallback: bool = True) -> bool:
        """Resolve one unbound or stub-bound reference site. Returns True when
        the site ends up bound to a real declaration."""
        model = self.workspace.model(ref.model_id)
        if not model.has(ref.node_id):
            return False
        sites = model.sites_of(ref.node_id)
        if not sites:
            return False
        site = sites[0]
        wanted = unresolved_target(self.workspace, ref)
        if wanted is None:
            return model.get_site(site) is not None
        if wanted.model_id == ref.model_id:
            # the "foreign" declaration is actually here; bind directly
            ops.set_site(ref.model_id, site, wanted.node_id)
            ops.result.adapted.append(ref)
            return True
        chain = self.workspace.context_chain(ref)
        candidates = self.mapbook.for_source(wanted, chain)
        for mapping in candidates:
            installation = lookup_adaptive(ops, self.rulebook, ref, mapping)
            if installation is not None:
                self._apply_adaptive(ops, installation.rule, ref, mapping)
                return True
        if allow_fallback and not candidates:
            fallback = self._lookup_fallback(ops, ref)
            if fallback is not None:
                self._apply_adaptive(ops, fallback.rule, ref, None)
                return True
        if model.get_site(site) is None:
            stub_id = ops.make_stub(ref.model_id, wanted)
            ops.set_site(ref.model_id, site, stub_id)
            ops.log(f"stub for {self.workspace.decl_path(wanted)} bound at #{ref.node_id}")
        return False

    def _apply_adaptive(self, ops: MigrationOps, rule, ref: NodeRef, mapping: Optional[Mapping]) -> None:
        try:
            rule.apply(ops, ref, mapping)
        except MigrationError:
            raise
        except Exception as exc:
            raise RuleApplicationFailed(rule.name, exc) from exc
        ops.result.adapted.append(ref)
        ops.log(f"{rule.describe()}: adapted #{ref.node_id}")

    def _lookup_fallback(self, ops: MigrationOps, ref: NodeRef):
        chain = self.workspace.context_chain(ref)
        for installation in self.rulebook.along_chain(chain, RuleFamily.ADAPTIVE):
            if getattr(installation.rule, "is_fallback", False) and installation.rule.condition(ops, ref, None):
                return installation
        return None

    def _adaptive_phase(self, ops: MigrationOps, mapping: Mapping) -> None:
        """Systematic application of adaptive rules after a mapping lands:
        collect unresolved uses of the mapped source within scope, double
        lookup per reference (mappings most concrete first, then rules), and
        apply the first positive pair."""
        model = self.workspace.model(mapping.scope.model_id)
        pending: list[NodeRef] = []
        for site in model.iter_sites(mapping.scope.node_id):
            target = model.get_site(site)
            if target is None:
                continue
            bound = model.node(target)
            if bound.stub is not None and bound.stub.foreign == mapping.source:
                pending.append(NodeRef(model.id, site.node_id))
        for ref in pending:
            if not self._fix_reference(ops, ref, allow_fallback=False):
                ops.result.unadapted.append(ref)
                ops.log(f"no adaptive rule for #{ref.node_id}")

    def _sweep_stubs(self, ops: MigrationOps, model_id: str) -> None:
        """Remove stubs nothing points at any more; never touches a stub that
        still has incoming references."""
        model = self.workspace.model(model_id)
        for stub_id in sorted(model.stubs):
            if not model.incoming_sites(stub_id):
                ops.delete_node(model_id, stub_id)
                ops.result.stubs_removed.append(NodeRef(model_id, stub_id))
                ops.log(f"swept stub #{stub_id}")
