"""The built-in rule catalog.

Productive rules create target entities from source entities and delegate
their children back to the engine; adaptive rules rewrite unresolved
references once an equivalent target declaration exists. Receiver rules are
the bridge from procedural calls to method invocations: the same call site
becomes ``Class.m(...)``, ``this.m(...)`` or ``arg.m(...)`` depending on the
mapped method.
"""

from __future__ import annotations

from typing import Optional

from .errors import ChooserRequired, DuplicateMember
from .meta_model import NodeKind, NodeRef, Shape
from .rule_system import (
    AdaptiveRule,
    ChoicePrompt,
    Mapping,
    ProductiveRule,
    unresolved_target,
)


def _free_member_slot(ops, class_ref: NodeRef, name: str, overwrite: bool) -> None:
    model = ops.workspace.model(class_ref.model_id)
    existing = model.find_child(class_ref.node_id, name)
    if existing is None:
        return
    if not overwrite:
        raise DuplicateMember(f"{ops.workspace.decl_path(class_ref)} already has a member {name!r}")
    ops.delete_subtree(class_ref.model_id, existing)


class AnyCopy(ProductiveRule):
    """Default rule at the global root: same-kind copy, children delegated."""

    name = "AnyCopy"

    def condition(self, ops, source, target) -> bool:
        return True

    def apply(self, ops, source, target) -> int:
        created = ops.copy_one(source, target.model_id, target.node_id)
        ops.migrate_children(source, NodeRef(target.model_id, created))
        return created


class CopyAsStaticMethod(ProductiveRule):
    """Sub-procedure into a class: static method, void return type."""

    name = "CopyAsStaticMethod"

    def condition(self, ops, source, target) -> bool:
        return (
            ops.workspace.node(source).kind is NodeKind.SUB_PROCEDURE
            and ops.workspace.node(target).kind is NodeKind.CLASS
        )

    def apply(self, ops, source, target) -> int:
        src = ops.workspace.node(source)
        _free_member_slot(ops, target, src.name, self.parameters.get("overwrite", False))
        method = ops.create_node(
            target.model_id, target.node_id, NodeKind.METHOD, name=src.name,
            payload={"static": True, "visibility": None}, origin=source,
        )
        model = ops.workspace.model(target.model_id)
        ops.set_site(target.model_id, model.sites_of(method)[0], ops.void_type(target.model_id))
        ops.migrate_children(source, NodeRef(target.model_id, method))
        return method


class FunctionToMethod(ProductiveRule):
    """Function into a class: static method, return type re-bound by mapping."""

    name = "FunctionToMethod"

    def condition(self, ops, source, target) -> bool:
        return (
            ops.workspace.node(source).kind is NodeKind.FUNCTION
            and ops.workspace.node(target).kind is NodeKind.CLASS
        )

    def apply(self, ops, source, target) -> int:
        src = ops.workspace.node(source)
        _free_member_slot(ops, target, src.name, self.parameters.get("overwrite", False))
        method = ops.create_node(
            target.model_id, target.node_id, NodeKind.METHOD, name=src.name,
            payload={"static": True, "visibility": None},
            origin=source, site_ident=src.site_ident,
        )
        ops.migrate_children(source, NodeRef(target.model_id, method))
        return method


class ModuleToClass(ProductiveRule):
    name = "ModuleToClass"

    def condition(self, ops, source, target) -> bool:
        return (
            ops.workspace.node(source).kind is NodeKind.MODULE
            and ops.workspace.node(target).kind in (NodeKind.PACKAGE, NodeKind.PROJECT)
        )

    def apply(self, ops, source, target) -> int:
        src = ops.workspace.node(source)
        model = ops.workspace.model(target.model_id)
        if model.find_child(target.node_id, src.name) is not None:
            if not self.parameters.get("overwrite", False):
                raise DuplicateMember(f"{target.model_id} already has {src.name!r}")
            ops.delete_subtree(target.model_id, model.find_child(target.node_id, src.name))
        cls = ops.create_node(target.model_id, target.node_id, NodeKind.CLASS,
                              name=src.name, origin=source)
        ops.migrate_children(source, NodeRef(target.model_id, cls))
        return cls


class GlobalToAttribute(ProductiveRule):
    """Module-level variable into a class: static attribute."""

    name = "GlobalToAttribute"

    def condition(self, ops, source, target) -> bool:
        src = ops.workspace.node(source)
        if src.kind is not NodeKind.VARIABLE_DECLARATION or src.parent is None:
            return False
        parent_kind = ops.workspace.model(source.model_id).node(src.parent).kind
        return parent_kind is NodeKind.MODULE and ops.workspace.node(target).kind is NodeKind.CLASS

    def apply(self, ops, source, target) -> int:
        src = ops.workspace.node(source)
        _free_member_slot(ops, target, src.name, self.parameters.get("overwrite", False))
        return ops.create_node(
            target.model_id, target.node_id, NodeKind.ATTRIBUTE_DECLARATION, name=src.name,
            payload={"static": True, "visibility": None},
            origin=source, site_ident=src.site_ident,
        )


class CopyReplaceOperator(ProductiveRule):
    """Parameterized operator swap: detects OtD, produces OtR."""

    name = "CopyReplaceOperator"

    def condition(self, ops, source, target) -> bool:
        node = ops.workspace.node(source)
        return (
            node.kind is NodeKind.BINARY_OPERATION
            and node.payload.get("operator") == self.parameters.get("OtD")
        )

    def apply(self, ops, source, target) -> int:
        created = ops.create_node(
            target.model_id, target.node_id, NodeKind.BINARY_OPERATION,
            payload={"operator": self.parameters["OtR"]}, origin=source,
        )
        ops.migrate_children(source, NodeRef(target.model_id, created))
        return created


class SimpleRename(AdaptiveRule):
    """Rebind a like-shaped reference (type to type, variable to variable)."""

    name = "SimpleRename"

    def condition(self, ops, reference, mapping: Optional[Mapping]) -> bool:
        if mapping is None:
            return False
        wanted = unresolved_target(ops.workspace, reference)
        if wanted != mapping.source:
            return False
        source_shape = ops.workspace.node(mapping.source).shape()
        target_shape = ops.workspace.node(mapping.target).shape()
        return source_shape == target_shape and source_shape in (Shape.TYPE, Shape.VARIABLE)

    def apply(self, ops, reference, mapping: Mapping) -> Optional[int]:
        model = ops.workspace.model(reference.model_id)
        site = model.sites_of(reference.node_id)[0]
        ops.set_site(reference.model_id, site, mapping.target.node_id)
        return None


def _invocation_args(ops, reference: NodeRef) -> list[int]:
    return list(ops.workspace.node(reference).children)


def _swap_in_method_invocation(ops, reference: NodeRef, mapping: Mapping,
                               receiver: str, receiver_child: Optional[int] = None) -> int:
    """Replace a function invocation by a method invocation bound to the
    mapped method, keeping the original arguments in order."""
    old = ops.workspace.node(reference)
    invocation = ops.create_detached(
        reference.model_id, NodeKind.METHOD_INVOCATION,
        payload={"receiver": receiver}, origin=old.origin, site_ident=old.site_ident,
    )
    ops.replace_node(reference.model_id, reference.node_id, invocation, move_children=True)
    if receiver_child is not None:
        ops.detach(reference.model_id, receiver_child)
        ops.attach(reference.model_id, invocation, 0, receiver_child)
    model = ops.workspace.model(reference.model_id)
    ops.set_site(reference.model_id, model.sites_of(invocation)[0], mapping.target.node_id)
    return invocation


class RenameAdaptToStaticReceiver(AdaptiveRule):
    """Function call becomes a method invocation with the class as receiver."""

    name = "RenameAdaptToStaticReceiver"

    def condition(self, ops, reference, mapping: Optional[Mapping]) -> bool:
        if mapping is None:
            return False
        if ops.workspace.node(reference).kind is not NodeKind.FUNCTION_INVOCATION:
            return False
        if unresolved_target(ops.workspace, reference) != mapping.source:
            return False
        target = ops.workspace.node(mapping.target)
        return target.kind is NodeKind.METHOD and bool(target.payload.get("static"))

    def apply(self, ops, reference, mapping: Mapping) -> Optional[int]:
        return _swap_in_method_invocation(ops, reference, mapping, receiver="static")


class RenameAdaptToSameClassReceiver(AdaptiveRule):
    """Call to an instance method of the enclosing class: ``this`` receiver."""

    name = "RenameAdaptToSameClassReceiver"

    def condition(self, ops, reference, mapping: Optional[Mapping]) -> bool:
        if mapping is None:
            return False
        if ops.workspace.node(reference).kind is not NodeKind.FUNCTION_INVOCATION:
            return False
        if unresolved_target(ops.workspace, reference) != mapping.source:
            return False
        target = ops.workspace.node(mapping.target)
        if target.kind is not NodeKind.METHOD or target.payload.get("static"):
            return False
        enclosing = _enclosing_class(ops, reference)
        return enclosing is not None and enclosing == target.parent

    def apply(self, ops, reference, mapping: Mapping) -> Optional[int]:
        return _swap_in_method_invocation(ops, reference, mapping, receiver="this")


class RenameAdaptToArgumentReceiver(AdaptiveRule):
    """Call to an instance method elsewhere: one argument becomes the
    receiver; which one is the user's call."""

    name = "RenameAdaptToArgumentReceiver"

    def condition(self, ops, reference, mapping: Optional[Mapping]) -> bool:
        if mapping is None:
            return False
        node = ops.workspace.node(reference)
        if node.kind is not NodeKind.FUNCTION_INVOCATION or not node.children:
            return False
        if unresolved_target(ops.workspace, reference) != mapping.source:
            return False
        target = ops.workspace.node(mapping.target)
        if target.kind is not NodeKind.METHOD or target.payload.get("static"):
            return False
        return _enclosing_class(ops, reference) != target.parent

    def apply(self, ops, reference, mapping: Mapping) -> Optional[int]:
        if ops.chooser is None:
            raise ChooserRequired("argument receiver extraction needs a chooser")
        from .frontends.printer import render_fragment

        model = ops.workspace.model(reference.model_id)
        args = _invocation_args(ops, reference)
        prompt = ChoicePrompt(
            kind="argument",
            subject=f"receiver for {ops.workspace.decl_path(mapping.target)}",
            options=[render_fragment(model, a) for a in args],
        )
        chosen = args[ops.chooser(prompt)]
        return _swap_in_method_invocation(ops, reference, mapping,
                                          receiver="expr", receiver_child=chosen)


class Autowrap(AdaptiveRule):
    """Fallback for library elements with no mapped equivalent: generate an
    empty-bodied skeleton in the target, map it, then adapt normally."""

    name = "Autowrap"
    is_fallback = True
    CONTAINER = "LibraryShims"

    def condition(self, ops, reference, mapping: Optional[Mapping]) -> bool:
        if mapping is not None:
            return False
        wanted = unresolved_target(ops.workspace, reference)
        if wanted is None or wanted.model_id == reference.model_id:
            return False
        return _is_library_element(ops, wanted)

    def apply(self, ops, reference, mapping: Optional[Mapping]) -> Optional[int]:
        wanted = unresolved_target(ops.workspace, reference)
        model = ops.workspace.model(reference.model_id)
        foreign = ops.workspace.node(wanted)
        shape = foreign.shape()
        if shape is Shape.TYPE:
            skeleton = model.find_child(model.root, foreign.name)
            if skeleton is None:
                skeleton = ops.create_node(model.id, model.root, NodeKind.CLASS,
                                           name=foreign.name, origin=wanted)
        else:
            container = model.find_child(model.root, self.CONTAINER)
            if container is None:
                container = ops.create_node(model.id, model.root, NodeKind.CLASS, name=self.CONTAINER)
            top = ops.top_type(model.id)
            if shape is Shape.CALLABLE:
                skeleton = model.find_child(container, foreign.name)
                if skeleton is None:
                    skeleton = ops.create_node(
                        model.id, container, NodeKind.METHOD, name=foreign.name,
                        payload={"static": True, "visibility": None}, origin=wanted,
                    )
                    ops.set_site(model.id, model.sites_of(skeleton)[0], top)
                    arity = len(ops.workspace.node(reference).children)
                    for position in range(arity):
                        param = ops.create_node(model.id, skeleton, NodeKind.PARAMETER, name=f"a{position}")
                        ops.set_site(model.id, model.sites_of(param)[0], top)
            else:
                skeleton = model.find_child(container, foreign.name)
                if skeleton is None:
                    skeleton = ops.create_node(
                        model.id, container, NodeKind.ATTRIBUTE_DECLARATION, name=foreign.name,
                        payload={"static": True, "visibility": None}, origin=wanted,
                    )
                    ops.set_site(model.id, model.sites_of(skeleton)[0], top)
        ops.register_mapping(Mapping(
            source=wanted, target=NodeRef(model.id, skeleton),
            scope=NodeRef(model.id, model.root), origin="ProduceAuto",
        ))
        ops.fix_reference(reference, allow_fallback=False)
        return skeleton


def _enclosing_class(ops, reference: NodeRef) -> Optional[int]:
    model = ops.workspace.model(reference.model_id)
    current = model.node(reference.node_id).parent
    while current is not None:
        if model.node(current).kind is NodeKind.CLASS:
            return current
        current = model.node(current).parent
    return None


def _is_library_element(ops, ref: NodeRef) -> bool:
    model = ops.workspace.model(ref.model_id)
    current: Optional[int] = ref.node_id
    while current is not None:
        if current in model.library:
            return True
        current = model.node(current).parent
    return False


_CATALOG = {
    rule.name: rule
    for rule in (
        AnyCopy,
        CopyAsStaticMethod,
        FunctionToMethod,
        ModuleToClass,
        GlobalToAttribute,
        CopyReplaceOperator,
        SimpleRename,
        RenameAdaptToStaticReceiver,
        RenameAdaptToSameClassReceiver,
        RenameAdaptToArgumentReceiver,
        Autowrap,
    )
}
# accepted aliases seen in rule manifests
_ALIASES = {
    "CopyReplaceBinaryOperator": "CopyReplaceOperator",
    "RenameAdaptToThisReceiver": "RenameAdaptToSameClassReceiver",
}


def rule_names() -> list[str]:
    return sorted(_CATALOG)


def create_rule(name: str, **parameters):
    key = _ALIASES.get(name, name)
    try:
        cls = _CATALOG[key]
    except KeyError:
        raise KeyError(f"unknown rule {name!r}; known: {', '.join(rule_names())}") from None
    return cls(**parameters)
