"""Per-dialect legality tables and the permissive validation pass.

A model may hold any node whatever its dialect -- mutation never rejects.
This module is the only place that knows which kinds and operators a dialect
would actually accept, so the user can be told what still needs transforming
before a model can produce source code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Optional

from ..meta_model import (
    NodeKind,
    Model,
    REFERENCE_KINDS,
    TYPED_DECLARATION_KINDS,
)

MINIPROC = "MiniProc"
MINIOO = "MiniOO"
MINISCRIPT = "MiniScript"


@dataclass(frozen=True)
class DialectSpec:
    name: str
    file_extension: str
    legal_kinds: frozenset[NodeKind]
    legal_operators: frozenset[str]
    top_type: str  # catches-everything type used for generated skeletons

    @property
    def catalog(self) -> dict:
        return _load_catalog(self.name)


_SHARED_KINDS = {
    NodeKind.PROJECT,
    NodeKind.VARIABLE_DECLARATION,
    NodeKind.PARAMETER,
    NodeKind.VARIABLE_ACCESS,
    NodeKind.EXPRESSION_STATEMENT,
    NodeKind.BINARY_OPERATION,
    NodeKind.STRING_LITERAL,
    NodeKind.NUMBER_LITERAL,
    NodeKind.IF_STATEMENT,
    NodeKind.ASSIGNMENT,
    NodeKind.RETURN,
    NodeKind.PRIMITIVE_TYPE_DECLARATION,
    NodeKind.LIBRARY_ROUTINE_DECLARATION,
}

_OO_KINDS = frozenset(
    _SHARED_KINDS
    | {
        NodeKind.PACKAGE,
        NodeKind.CLASS,
        NodeKind.METHOD,
        NodeKind.ATTRIBUTE_DECLARATION,
        NodeKind.METHOD_INVOCATION,
    }
)

DIALECTS: dict[str, DialectSpec] = {
    MINIPROC: DialectSpec(
        name=MINIPROC,
        file_extension="mproc",
        legal_kinds=frozenset(
            _SHARED_KINDS
            | {
                NodeKind.MODULE,
                NodeKind.SUB_PROCEDURE,
                NodeKind.FUNCTION,
                NodeKind.FUNCTION_INVOCATION,
            }
        ),
        legal_operators=frozenset({"&", "+", "-", "*", "/", "=", "<", ">"}),
        top_type="Variant",
    ),
    MINIOO: DialectSpec(
        name=MINIOO,
        file_extension="moo",
        legal_kinds=_OO_KINDS,
        legal_operators=frozenset({"+", "-", "*", "/", "==", "<", ">"}),
        top_type="Object",
    ),
    MINISCRIPT: DialectSpec(
        name=MINISCRIPT,
        file_extension="mscript",
        legal_kinds=_OO_KINDS,
        legal_operators=frozenset({"+", "-", "*", "/", "==", "<", ">"}),
        top_type="any",
    ),
}


def _load_catalog(dialect: str) -> dict:
    data = resources.files(__package__).joinpath("catalogs", f"{dialect.lower()}.json")
    return json.loads(data.read_text())


def install_catalog(model: Model) -> None:
    """Preload the dialect's library and primitive declarations.

    These assert the existence of library entities -- they carry no bodies
    and are never exported, but they are referenceable.
    """
    catalog = DIALECTS[model.dialect].catalog
    types: dict[str, int] = {}
    for type_name in catalog.get("types", []):
        node_id = model.add_detached(NodeKind.PRIMITIVE_TYPE_DECLARATION, name=type_name)
        model.library.add(node_id)
        types[type_name] = node_id
    for const in catalog.get("consts", []):
        node_id = model.add_detached(NodeKind.VARIABLE_DECLARATION, name=const["name"])
        model.node(node_id).type_ref = types.get(const.get("type"))
        model.library.add(node_id)
    for routine in catalog.get("routines", []):
        node_id = model.add_detached(NodeKind.LIBRARY_ROUTINE_DECLARATION, name=routine["name"])
        model.node(node_id).type_ref = types.get(routine.get("returns"))
        model.library.add(node_id)
    for cls in catalog.get("classes", []):
        class_id = model.add_detached(NodeKind.CLASS, name=cls["name"])
        model.library.add(class_id)
        for method in cls.get("methods", []):
            method_id = model.add_node(
                class_id,
                NodeKind.METHOD,
                name=method["name"],
                payload={"static": bool(method.get("static", True)), "visibility": None},
            )
            model.node(method_id).type_ref = types.get(method.get("returns"))


class ViolationReason(Enum):
    ILLEGAL_KIND = "IllegalKindForDialect"
    ILLEGAL_OPERATOR = "IllegalOperator"
    UNRESOLVED_REFERENCE = "UnresolvedReference"
    REFERENCE_TO_STUB = "ReferenceToStub"


@dataclass(frozen=True)
class Violation:
    node_id: int
    reason: ViolationReason
    detail: str


def validate(model: Model) -> list[Violation]:
    """Everything in the user tree that the dialect would reject.

    An empty result means the model can be exported: no foreign kinds, no
    foreign operators, no dangling or stub-bridged references.
    """
    spec = DIALECTS[model.dialect]
    violations: list[Violation] = []
    for node_id in model.walk():
        node = model.node(node_id)
        if node.kind not in spec.legal_kinds:
            violations.append(
                Violation(node_id, ViolationReason.ILLEGAL_KIND, f"{node.kind.value} is not {spec.name}")
            )
        if node.kind is NodeKind.BINARY_OPERATION:
            operator = node.payload.get("operator", "?")
            if operator not in spec.legal_operators:
                violations.append(
                    Violation(node_id, ViolationReason.ILLEGAL_OPERATOR, f"operator {operator!r}")
                )
        for site in model.sites_of(node_id):
            target = model.get_site(site)
            if target is None:
                required = node.kind in REFERENCE_KINDS or node.kind in TYPED_DECLARATION_KINDS
                if required:
                    label = "referee" if site.slot == "referee" else "declared type"
                    violations.append(
                        Violation(node_id, ViolationReason.UNRESOLVED_REFERENCE, f"empty {label}")
                    )
            elif model.node(target).kind is NodeKind.STUB_DECLARATION:
                violations.append(
                    Violation(node_id, ViolationReason.REFERENCE_TO_STUB, f"via stub #{target}")
                )
    return violations


def exportable(model: Model) -> bool:
    return not validate(model)


def find_type(model: Model, name: str) -> Optional[int]:
    """Locate a type declaration by name: library first, then user classes."""
    lib = model.find_library(name)
    if lib is not None and model.node(lib).shape().value == "type":
        return lib
    for node_id in model.walk():
        node = model.node(node_id)
        if node.kind is NodeKind.CLASS and node.name == name:
            return node_id
    return None
