"""Scoped rule installations, scoped mappings, and the two lookup walks.

Productive lookup is a single walk: up the target's context chain, innermost
context first, newest installation first inside one context, taking the first
rule whose condition holds (or, in the choice modes, collecting every positive
rule and delegating to a chooser). Adaptive lookup is the second half of a
double lookup: candidate mappings are gathered most-concrete-first, then for
each mapping the adaptive rules are walked the same way as productive ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .errors import ChooserRequired, NoRuleFound, ScopeModelMismatch, UnknownContext
from .meta_model import GLOBAL_ROOT, NodeRef, Workspace


class RuleFamily(Enum):
    PRODUCTIVE = "Productive"
    ADAPTIVE = "Adaptive"


class Rule:
    """Scoped conditional operation: a side-effect-free condition plus an
    operation that runs only after the condition held on the same arguments."""

    name: str = "Rule"
    family: RuleFamily

    def __init__(self, **parameters):
        self.parameters = parameters

    def describe(self) -> str:
        if not self.parameters:
            return self.name
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        return f"{self.name}({inner})"


class ProductiveRule(Rule):
    family = RuleFamily.PRODUCTIVE

    def condition(self, ops, source: NodeRef, target: NodeRef) -> bool:
        raise NotImplementedError

    def apply(self, ops, source: NodeRef, target: NodeRef) -> int:
        """Create the migrated version of ``source`` under ``target``; returns
        the created node id. Children are delegated back through ``ops``."""
        raise NotImplementedError


class AdaptiveRule(Rule):
    family = RuleFamily.ADAPTIVE

    def condition(self, ops, reference: NodeRef, mapping: "Mapping") -> bool:
        raise NotImplementedError

    def apply(self, ops, reference: NodeRef, mapping: "Mapping") -> Optional[int]:
        """Rewrite ``reference`` to use the mapping's target declaration.
        Returns the replacement node id when the reference node was swapped."""
        raise NotImplementedError


@dataclass(frozen=True)
class RuleInstallation:
    rule: Rule
    context: NodeRef
    seq: int


class LookupMode(Enum):
    AUTOMATIC = "auto"
    MULTIPLE_CHOICE = "choice"
    DEBUG = "debug"


@dataclass
class ChoicePrompt:
    """One pending decision handed to the registered chooser.

    ``kind`` is "rule" for lookup choices and "argument" for receiver-argument
    extraction; the chooser answers with an index into ``options``.
    """

    kind: str
    subject: str
    options: list[str]


Chooser = Callable[[ChoicePrompt], int]


@dataclass(frozen=True)
class Mapping:
    """Scoped semantic equivalence: within ``scope`` (a target-model context),
    references to ``source`` are to be replaced by references to ``target``."""

    source: NodeRef
    target: NodeRef
    scope: NodeRef
    origin: str = "UserDirective"  # or "ProduceAuto"


@dataclass(frozen=True)
class MappingRecord:
    mapping: Mapping
    seq: int


class RuleBook:
    """Rule installations, ordered by installation sequence per context."""

    def __init__(self, workspace: Workspace):
        self.workspace = workspace
        self._installations: list[RuleInstallation] = []
        self._next_seq = 1

    def install(self, rule: Rule, context: NodeRef) -> RuleInstallation:
        if context != GLOBAL_ROOT:
            if not self.workspace.has(context):
                raise UnknownContext(f"no context {context}")
            if not self.workspace.node(context).is_declaration():
                raise UnknownContext(f"context {context} is not a declaration")
        inst = RuleInstallation(rule=rule, context=context, seq=self._next_seq)
        self._next_seq += 1
        self._installations.append(inst)
        return inst

    def at_context(self, context: NodeRef, family: RuleFamily) -> list[RuleInstallation]:
        """Installations at one context, newest first (recency wins ties)."""
        found = [i for i in self._installations if i.context == context and i.rule.family is family]
        return sorted(found, key=lambda i: -i.seq)

    def along_chain(self, chain: list[NodeRef], family: RuleFamily) -> list[RuleInstallation]:
        out: list[RuleInstallation] = []
        for context in chain:
            out.extend(self.at_context(context, family))
        return out

    def all_installations(self) -> list[RuleInstallation]:
        return list(self._installations)


class MappingBook:
    """Scoped mapping registry; duplicates collapse onto the first record."""

    def __init__(self, workspace: Workspace):
        self.workspace = workspace
        self._records: list[MappingRecord] = []
        self._next_seq = 1

    def register(self, mapping: Mapping) -> tuple[MappingRecord, bool]:
        """Store a mapping; a duplicate (source, target, scope) is a no-op
        that returns the existing record with ``created`` False."""
        ws = self.workspace
        if not ws.node(mapping.source).is_declaration():
            raise ScopeModelMismatch(f"mapping source {mapping.source} is not a declaration")
        if not ws.node(mapping.target).is_declaration():
            raise ScopeModelMismatch(f"mapping target {mapping.target} is not a declaration")
        if mapping.scope.model_id != mapping.target.model_id:
            raise ScopeModelMismatch(
                f"scope {mapping.scope} is outside the target model {mapping.target.model_id!r}"
            )
        for record in self._records:
            if (
                record.mapping.source == mapping.source
                and record.mapping.target == mapping.target
                and record.mapping.scope == mapping.scope
            ):
                return record, False
        record = MappingRecord(mapping=mapping, seq=self._next_seq)
        self._next_seq += 1
        self._records.append(record)
        return record, True

    def remove(self, record: MappingRecord) -> None:
        self._records.remove(record)

    def all_records(self) -> list[MappingRecord]:
        return list(self._records)

    def for_source(self, source: NodeRef, chain: list[NodeRef]) -> list[Mapping]:
        """Mappings of ``source`` whose scope lies on ``chain``, most concrete
        (deepest scope) first; ties broken by newest registration."""
        position = {ctx: i for i, ctx in enumerate(chain)}
        hits = [
            (position[r.mapping.scope], -r.seq, r.mapping)
            for r in self._records
            if r.mapping.source == source and r.mapping.scope in position
        ]
        hits.sort(key=lambda t: (t[0], t[1]))
        return [m for _, _, m in hits]


def lookup_productive(
    ops,
    rulebook: RuleBook,
    source: NodeRef,
    target: NodeRef,
    mode: LookupMode = LookupMode.AUTOMATIC,
    chooser: Optional[Chooser] = None,
) -> RuleInstallation:
    """Choose the productive rule for (source, target context).

    Automatic mode returns the first installation whose condition holds along
    the chain; the choice modes gather every positive installation in the
    scope and let the chooser pick. Never empty while the default copy rule
    stays installed at the global root.
    """
    chain = ops.workspace.context_chain(target)
    positives: list[RuleInstallation] = []
    for inst in rulebook.along_chain(chain, RuleFamily.PRODUCTIVE):
        if inst.rule.condition(ops, source, target):
            if mode is LookupMode.AUTOMATIC:
                return inst
            positives.append(inst)
    if not positives:
        raise NoRuleFound(f"no productive rule accepts {source} -> {target}")
    if chooser is None:
        raise ChooserRequired(f"{mode.value} lookup needs a chooser")
    subject = f"{ops.workspace.decl_path(source)} -> {ops.workspace.decl_path(target)}"
    prompt = ChoicePrompt(kind="rule", subject=subject,
                          options=[inst.rule.describe() for inst in positives])
    return positives[chooser(prompt)]


def mappings_for(ops, mapbook: MappingBook, reference: NodeRef) -> list[Mapping]:
    """All mappings that could resolve an unresolved reference, ordered most
    concrete first. The reference must currently point at a stub."""
    target = unresolved_target(ops.workspace, reference)
    if target is None:
        raise ValueError(f"reference {reference} is not stub-bound")
    chain = ops.workspace.context_chain(reference)
    return mapbook.for_source(target, chain)


def unresolved_target(workspace: Workspace, reference: NodeRef) -> Optional[NodeRef]:
    """The foreign declaration an unresolved reference is waiting for.

    Stub-bound sites report the stub's foreign declaration; empty sites fall
    back to the provenance of the copied node (what its source referred to).
    """
    model = workspace.model(reference.model_id)
    node = model.node(reference.node_id)
    sites = model.sites_of(reference.node_id)
    if not sites:
        return None
    current = model.get_site(sites[0])
    if current is not None:
        bound = model.node(current)
        if bound.stub is not None:
            return bound.stub.foreign
        return None  # already resolved to a real declaration
    if node.origin is None:
        return None
    origin_model = workspace.model(node.origin.model_id)
    origin_node = origin_model.node(node.origin.node_id)
    origin_site = origin_model.sites_of(node.origin.node_id)
    if not origin_site:
        return None
    origin_target = origin_model.get_site(origin_site[0])
    if origin_target is None:
        return None
    origin_decl = origin_model.node(origin_target)
    if origin_decl.stub is not None:
        return origin_decl.stub.foreign
    return NodeRef(origin_model.id, origin_target)


def lookup_adaptive(
    ops,
    rulebook: RuleBook,
    reference: NodeRef,
    mapping: Mapping,
) -> Optional[RuleInstallation]:
    """First adaptive installation accepting (reference, mapping) along the
    reference's context chain; None when the process should finish."""
    chain = ops.workspace.context_chain(reference)
    for inst in rulebook.along_chain(chain, RuleFamily.ADAPTIVE):
        if inst.rule.condition(ops, reference, mapping):
            return inst
    return None
