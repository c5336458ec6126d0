"""Heterogeneous unified abstract semantic graph.

All application models, whatever their dialect, are instances of the same
node taxonomy. Every node is exactly one of three categories:

* declaration -- can be referred to (modules, classes, methods, variables,
  types, library routines, stubs);
* reference -- uses a declaration (invocations, variable accesses); the
  referee must live in the same model, possibly via a stub;
* grammatical -- plain language constructs (statements, operators, literals).

Models are deliberately permissive: they may hold nodes that are illegal for
their dialect, so that intermediate migration states are representable. Only
validation (see frontends.dialect) reports such nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple, Optional

from .errors import (
    ForeignNotDeclaration,
    SameModelStub,
    UnknownModel,
    UnknownNode,
    UnknownParent,
)


class NodeKind(Enum):
    PROJECT = "Project"
    PACKAGE = "Package"
    MODULE = "Module"
    CLASS = "Class"
    METHOD = "Method"
    SUB_PROCEDURE = "SubProcedure"
    FUNCTION = "Function"
    VARIABLE_DECLARATION = "VariableDeclaration"
    ATTRIBUTE_DECLARATION = "AttributeDeclaration"
    PARAMETER = "Parameter"
    PRIMITIVE_TYPE_DECLARATION = "PrimitiveTypeDeclaration"
    LIBRARY_ROUTINE_DECLARATION = "LibraryRoutineDeclaration"
    STUB_DECLARATION = "StubDeclaration"
    METHOD_INVOCATION = "MethodInvocation"
    FUNCTION_INVOCATION = "FunctionInvocation"
    VARIABLE_ACCESS = "VariableAccess"
    EXPRESSION_STATEMENT = "ExpressionStatement"
    BINARY_OPERATION = "BinaryOperation"
    STRING_LITERAL = "StringLiteral"
    NUMBER_LITERAL = "NumberLiteral"
    IF_STATEMENT = "IfStatement"
    ASSIGNMENT = "Assignment"
    RETURN = "Return"


class Category(Enum):
    DECLARATION = "declaration"
    REFERENCE = "reference"
    GRAMMATICAL = "grammatical"


DECLARATION_KINDS = frozenset(
    {
        NodeKind.PROJECT,
        NodeKind.PACKAGE,
        NodeKind.MODULE,
        NodeKind.CLASS,
        NodeKind.METHOD,
        NodeKind.SUB_PROCEDURE,
        NodeKind.FUNCTION,
        NodeKind.VARIABLE_DECLARATION,
        NodeKind.ATTRIBUTE_DECLARATION,
        NodeKind.PARAMETER,
        NodeKind.PRIMITIVE_TYPE_DECLARATION,
        NodeKind.LIBRARY_ROUTINE_DECLARATION,
        NodeKind.STUB_DECLARATION,
    }
)

REFERENCE_KINDS = frozenset(
    {
        NodeKind.METHOD_INVOCATION,
        NodeKind.FUNCTION_INVOCATION,
        NodeKind.VARIABLE_ACCESS,
    }
)

# Declarations whose declared type (variable type or return type) is itself a
# reference that must resolve. LibraryRoutineDeclaration return types are
# optional and therefore excluded.
TYPED_DECLARATION_KINDS = frozenset(
    {
        NodeKind.VARIABLE_DECLARATION,
        NodeKind.ATTRIBUTE_DECLARATION,
        NodeKind.PARAMETER,
        NodeKind.FUNCTION,
        NodeKind.METHOD,
    }
)


def category_of(kind: NodeKind) -> Category:
    if kind in DECLARATION_KINDS:
        return Category.DECLARATION
    if kind in REFERENCE_KINDS:
        return Category.REFERENCE
    return Category.GRAMMATICAL


class Shape(Enum):
    CALLABLE = "callable"
    VARIABLE = "variable"
    TYPE = "type"


_SHAPES = {
    NodeKind.SUB_PROCEDURE: Shape.CALLABLE,
    NodeKind.FUNCTION: Shape.CALLABLE,
    NodeKind.METHOD: Shape.CALLABLE,
    NodeKind.LIBRARY_ROUTINE_DECLARATION: Shape.CALLABLE,
    NodeKind.VARIABLE_DECLARATION: Shape.VARIABLE,
    NodeKind.ATTRIBUTE_DECLARATION: Shape.VARIABLE,
    NodeKind.PARAMETER: Shape.VARIABLE,
    NodeKind.CLASS: Shape.TYPE,
    NodeKind.PRIMITIVE_TYPE_DECLARATION: Shape.TYPE,
    NodeKind.MODULE: Shape.TYPE,
    NodeKind.PACKAGE: Shape.TYPE,
    NodeKind.PROJECT: Shape.TYPE,
}


class NodeRef(NamedTuple):
    """Cross-model address: node ids are opaque and model-scoped."""

    model_id: str
    node_id: int


# Distinguished context above every model root; rules installed here apply
# regardless of which project is the target.
GLOBAL_ROOT = NodeRef("", 0)


@dataclass
class StubInfo:
    foreign: NodeRef
    shape: Shape


@dataclass
class AsgNode:
    id: int
    kind: NodeKind
    name: Optional[str] = None
    parent: Optional[int] = None
    children: list[int] = field(default_factory=list)
    referee: Optional[int] = None  # reference-kind nodes only
    type_ref: Optional[int] = None  # declared/return type of typed declarations
    payload: dict = field(default_factory=dict)  # kind-specific scalar data
    stub: Optional[StubInfo] = None  # StubDeclaration only
    origin: Optional[NodeRef] = None  # node this one was copied from, if any
    site_ident: Optional[str] = None  # identifier text written at this node's
    # reference site; display fallback only, never part of structural identity

    @property
    def category(self) -> Category:
        return category_of(self.kind)

    def is_declaration(self) -> bool:
        return self.kind in DECLARATION_KINDS

    def is_reference(self) -> bool:
        return self.kind in REFERENCE_KINDS

    def shape(self) -> Shape:
        if self.kind is NodeKind.STUB_DECLARATION and self.stub is not None:
            return self.stub.shape
        return _SHAPES[self.kind]


class Site(NamedTuple):
    """One rebindable reference slot: a referee edge or a declared-type edge."""

    node_id: int
    slot: str  # "referee" | "type"


class Model:
    """One application's ASG: a node store, a user tree, and a library area.

    The user tree hangs off ``root`` (a Project declaration). Library and
    primitive declarations -- plus stubs bridging to other models -- are
    parentless trees tracked in ``library`` / ``stubs``; they are
    referenceable but never exported.
    """

    def __init__(self, model_id: str, dialect: str, project_name: Optional[str] = None):
        self.id = model_id
        self.dialect = dialect
        self.nodes: dict[int, AsgNode] = {}
        self._next_id = 1
        self.root = self._new_node(NodeKind.PROJECT, name=project_name or model_id).id
        self.library: set[int] = set()
        self.stubs: set[int] = set()
        self._stub_index: dict[NodeRef, int] = {}

    # -- store primitives ---------------------------------------------------

    def _new_node(self, kind: NodeKind, name: Optional[str] = None, payload: Optional[dict] = None) -> AsgNode:
        node = AsgNode(id=self._next_id, kind=kind, name=name, payload=dict(payload or {}))
        self._next_id += 1
        self.nodes[node.id] = node
        return node

    def node(self, node_id: int) -> AsgNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"{self.id}: no node #{node_id}") from None

    def has(self, node_id: int) -> bool:
        return node_id in self.nodes

    def add_node(
        self,
        parent: int,
        kind: NodeKind,
        name: Optional[str] = None,
        payload: Optional[dict] = None,
        index: Optional[int] = None,
    ) -> int:
        """Create a node under ``parent`` (appended unless ``index`` given)."""
        if parent not in self.nodes:
            raise UnknownParent(f"{self.id}: no parent #{parent}")
        node = self._new_node(kind, name, payload)
        node.parent = parent
        siblings = self.nodes[parent].children
        siblings.insert(len(siblings) if index is None else index, node.id)
        return node.id

    def add_detached(self, kind: NodeKind, name: Optional[str] = None, payload: Optional[dict] = None) -> int:
        """Create a parentless node (library area, stubs, pending replacements)."""
        return self._new_node(kind, name, payload).id

    def attach(self, parent: int, index: int, child: int) -> None:
        node = self.node(child)
        if node.parent is not None:
            raise ValueError(f"node #{child} already attached")
        node.parent = parent
        self.node(parent).children.insert(index, child)

    def detach(self, child: int) -> tuple[int, int]:
        """Unlink ``child`` from its parent; returns (parent, index) for undo."""
        node = self.node(child)
        if node.parent is None:
            raise ValueError(f"node #{child} is not attached")
        parent = node.parent
        index = self.nodes[parent].children.index(child)
        del self.nodes[parent].children[index]
        node.parent = None
        return parent, index

    def delete_node(self, node_id: int) -> AsgNode:
        """Remove a detached, childless node from the store; returns it for undo."""
        node = self.node(node_id)
        if node.parent is not None or node.children:
            raise ValueError(f"node #{node_id} still wired into the tree")
        del self.nodes[node_id]
        self.library.discard(node_id)
        if node_id in self.stubs:
            self.stubs.discard(node_id)
            if node.stub is not None:
                self._stub_index.pop(node.stub.foreign, None)
        return node

    def restore_node(self, node: AsgNode) -> None:
        self.nodes[node.id] = node
        if node.kind is NodeKind.STUB_DECLARATION and node.stub is not None:
            self.stubs.add(node.id)
            self._stub_index[node.stub.foreign] = node.id

    # -- reference sites ----------------------------------------------------

    def get_site(self, site: Site) -> Optional[int]:
        node = self.node(site.node_id)
        return node.referee if site.slot == "referee" else node.type_ref

    def set_site(self, site: Site, target: Optional[int]) -> None:
        node = self.node(site.node_id)
        if site.slot == "referee":
            node.referee = target
        else:
            node.type_ref = target

    def sites_of(self, node_id: int) -> list[Site]:
        node = self.node(node_id)
        sites = []
        if node.kind in REFERENCE_KINDS:
            sites.append(Site(node_id, "referee"))
        if node.kind in TYPED_DECLARATION_KINDS or node.kind is NodeKind.LIBRARY_ROUTINE_DECLARATION:
            sites.append(Site(node_id, "type"))
        return sites

    def iter_sites(self, under: Optional[int] = None) -> Iterator[Site]:
        """All reference sites, tree order, optionally limited to a subtree."""
        for node_id in self.walk(under if under is not None else self.root):
            yield from self.sites_of(node_id)

    def incoming_sites(self, target: int) -> list[Site]:
        found = [s for s in self.iter_sites() if self.get_site(s) == target]
        # stubs and library declarations may reference each other's types
        for extra_root in sorted(self.stubs | self.library):
            for node_id in self.walk(extra_root):
                for s in self.sites_of(node_id):
                    if self.get_site(s) == target:
                        found.append(s)
        return found

    # -- traversal ----------------------------------------------------------

    def walk(self, node_id: Optional[int] = None) -> Iterator[int]:
        """Pre-order ids of the subtree rooted at ``node_id`` (default: root)."""
        stack = [self.root if node_id is None else node_id]
        while stack:
            current = stack.pop()
            yield current
            stack.extend(reversed(self.nodes[current].children))

    def children_of(self, node_id: int) -> list[AsgNode]:
        return [self.nodes[c] for c in self.node(node_id).children]

    def find_child(self, parent: int, name: str) -> Optional[int]:
        for child in self.node(parent).children:
            if self.nodes[child].name == name:
                return child
        return None

    def find_library(self, name: str) -> Optional[int]:
        for lib_id in sorted(self.library):
            if self.nodes[lib_id].name == name:
                return lib_id
        return None

    def stub_for(self, foreign: NodeRef) -> Optional[int]:
        return self._stub_index.get(foreign)

    def register_stub(self, node_id: int) -> None:
        node = self.node(node_id)
        self.stubs.add(node_id)
        self._stub_index[node.stub.foreign] = node_id


def check_tree(model: Model) -> list[str]:
    """Integrity scan: parent/child edges mutually consistent, no cycles."""
    problems = []
    seen: set[int] = set()
    for node_id, node in model.nodes.items():
        if node.id != node_id:
            problems.append(f"#{node_id}: id mismatch")
        for child in node.children:
            if child not in model.nodes:
                problems.append(f"#{node_id}: dangling child #{child}")
            elif model.nodes[child].parent != node_id:
                problems.append(f"#{child}: parent backlink broken")
        if node.parent is not None and node_id not in model.nodes[node.parent].children:
            problems.append(f"#{node_id}: missing from parent's children")
    for start in model.nodes:
        current, hops = start, 0
        while current is not None and hops <= len(model.nodes):
            current = model.nodes[current].parent
            hops += 1
        if current is not None:
            problems.append(f"#{start}: parent cycle")
        seen.add(start)
    return problems


class Workspace:
    """The set of coexisting models plus cross-model operations.

    Node addressing is always (model id, node id); a reference node can only
    point within its own model, so every cross-model link goes through a stub.
    """

    def __init__(self):
        self.models: dict[str, Model] = {}

    def add_model(self, model: Model) -> Model:
        if model.id in self.models:
            raise ValueError(f"duplicate model id {model.id!r}")
        self.models[model.id] = model
        return model

    def model(self, model_id: str) -> Model:
        try:
            return self.models[model_id]
        except KeyError:
            raise UnknownModel(f"no model {model_id!r}") from None

    def node(self, ref: NodeRef) -> AsgNode:
        return self.model(ref.model_id).node(ref.node_id)

    def has(self, ref: NodeRef) -> bool:
        return ref.model_id in self.models and self.models[ref.model_id].has(ref.node_id)

    # -- contexts -----------------------------------------------------------

    def context_chain(self, ref: NodeRef) -> list[NodeRef]:
        """Enclosing declaration contexts, innermost first.

        Starts at ``ref`` itself when it is a declaration, ends with the model
        root and then the global root. Parentless nodes (library area) still
        chain through the model root.
        """
        if ref == GLOBAL_ROOT:
            return [GLOBAL_ROOT]
        model = self.model(ref.model_id)
        chain: list[NodeRef] = []
        current: Optional[int] = ref.node_id
        while current is not None:
            node = model.node(current)
            if node.is_declaration():
                chain.append(NodeRef(model.id, current))
            current = node.parent
        if not chain or chain[-1].node_id != model.root:
            chain.append(NodeRef(model.id, model.root))
        chain.append(GLOBAL_ROOT)
        return chain

    # -- meta-model operations ----------------------------------------------

    def deep_copy(self, source: NodeRef, target_model_id: str, target_parent: int) -> int:
        """Structural copy of a subtree into another model.

        Kinds, names, scalar payloads and child order are preserved; referee
        and declared-type edges are model-scoped, so they are left empty for
        the engine to re-bind. Each copy remembers its source node.
        """
        src_model = self.model(source.model_id)
        src_model.node(source.node_id)
        target_model = self.model(target_model_id)
        if not target_model.has(target_parent):
            raise UnknownParent(f"{target_model_id}: no parent #{target_parent}")

        def copy(node_id: int, parent: int) -> int:
            node = src_model.node(node_id)
            new_id = target_model.add_node(parent, node.kind, node.name, dict(node.payload))
            fresh = target_model.node(new_id)
            fresh.origin = NodeRef(src_model.id, node_id)
            fresh.site_ident = node.site_ident
            for child in node.children:
                copy(child, new_id)
            return new_id

        return copy(source.node_id, target_parent)

    def make_stub(self, host_model_id: str, foreign: NodeRef, shape: Optional[Shape] = None) -> int:
        """Install (or reuse) a stub bridging ``host`` to a foreign declaration."""
        host = self.model(host_model_id)
        foreign_node = self.node(foreign)
        if not foreign_node.is_declaration():
            raise ForeignNotDeclaration(f"{foreign} is {foreign_node.kind.value}, not a declaration")
        if foreign.model_id == host_model_id:
            raise SameModelStub(f"stub target {foreign} is in the host model")
        existing = host.stub_for(foreign)
        if existing is not None:
            return existing
        stub_id = host.add_detached(NodeKind.STUB_DECLARATION, name=foreign_node.name)
        host.node(stub_id).stub = StubInfo(foreign=foreign, shape=shape or foreign_node.shape())
        host.register_stub(stub_id)
        return stub_id

    # -- paths and snapshots --------------------------------------------------

    def decl_path(self, ref: NodeRef) -> str:
        """Human-facing address of a declaration: model:Name.Name..."""
        if ref == GLOBAL_ROOT:
            return "global"
        model = self.model(ref.model_id)
        segments: list[str] = []
        current: Optional[int] = ref.node_id
        while current is not None and current != model.root:
            node = model.node(current)
            if node.is_declaration():
                if node.name is not None:
                    segments.append(node.name)
                else:
                    parent = node.parent
                    pos = model.node(parent).children.index(current) if parent is not None else 0
                    segments.append(f"#{pos}")
            current = node.parent
        return f"{ref.model_id}:" + ".".join(reversed(segments))

    def resolve_path(self, path: str) -> NodeRef:
        """Inverse of decl_path: tree children first, then the library area."""
        model_id, _, rest = path.partition(":")
        model = self.model(model_id)
        if not rest:
            return NodeRef(model_id, model.root)
        segments = rest.split(".")
        current = model.find_child(model.root, segments[0])
        if current is None:
            current = model.find_library(segments[0])
        if current is None:
            for stub_id in sorted(model.stubs):
                if model.node(stub_id).name == segments[0]:
                    current = stub_id
                    break
        if current is None:
            raise UnknownNode(f"{model_id}: no declaration named {segments[0]!r}")
        for segment in segments[1:]:
            nxt = model.find_child(current, segment)
            if nxt is None:
                raise UnknownNode(f"{model_id}: no member {segment!r} under {path!r}")
            current = nxt
        return NodeRef(model_id, current)

    def _render_target(self, model: Model, target: Optional[int]) -> str:
        if target is None:
            return "?"
        node = model.node(target)
        if node.kind is NodeKind.STUB_DECLARATION and node.stub is not None:
            return f"stub({self.decl_path(node.stub.foreign)})"
        return self.decl_path(NodeRef(model.id, target))

    def _snapshot_node(self, model: Model, node_id: int, depth: int, lines: list[str]) -> None:
        node = model.node(node_id)
        parts = [f"{'  ' * depth}{node.kind.value}"]
        if node.name is not None:
            parts.append(node.name)
        payload = {k: node.payload[k] for k in sorted(node.payload)}
        if payload:
            parts.append(repr(payload))
        if node.is_reference():
            parts.append(f"-> {self._render_target(model, node.referee)}")
        if node.kind in TYPED_DECLARATION_KINDS or (
            node.kind is NodeKind.LIBRARY_ROUTINE_DECLARATION and node.type_ref is not None
        ):
            parts.append(f": {self._render_target(model, node.type_ref)}")
        lines.append(" ".join(parts))
        for child in node.children:
            self._snapshot_node(model, child, depth + 1, lines)

    def snapshot(self, model_id: str) -> str:
        """Deterministic tree-ordered text form of one model.

        One node per line (depth, kind, name, payload, referee path); the
        library area and stubs follow the user tree. Two models with equal
        snapshots are structurally equal, whatever their internal ids.
        """
        model = self.model(model_id)
        lines: list[str] = []
        self._snapshot_node(model, model.root, 0, lines)
        lib_lines: list[str] = []
        for lib_id in model.library:
            chunk: list[str] = []
            self._snapshot_node(model, lib_id, 1, chunk)
            lib_lines.append("\n".join(chunk))
        if lib_lines:
            lines.append("library:")
            lines.extend(sorted(lib_lines))
        stub_lines = []
        for stub_id in model.stubs:
            info = model.node(stub_id).stub
            stub_lines.append(f"  stub {info.shape.value} -> {self.decl_path(info.foreign)}")
        if stub_lines:
            lines.append("stubs:")
            lines.extend(sorted(stub_lines))
        return "\n".join(lines) + "\n"
