"""Parsers for the two object-oriented target dialects.

MiniOO is brace-structured with Java-style member declarations; MiniScript
uses TypeScript-style annotations and namespaces. Both produce bound models
and accept skeletons (declarations with empty bodies) as well as full
programs, so exported code can be reloaded.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError
from ..meta_model import Model, NodeKind
from . import lexing
from .dialect import MINIOO, MINISCRIPT, find_type, install_catalog
from .lexing import EOF, NAME, NUMBER, OP, STRING, TokenStream


def parse_target_skeleton(dialect: str, text: str, model_id: str = "target",
                          project_name: Optional[str] = None) -> Model:
    if dialect not in (MINIOO, MINISCRIPT):
        raise ValueError(f"not a target dialect: {dialect!r}")
    tokens = lexing.tokenize(text, newlines=False, comment="//")
    parser = _TargetParser(TokenStream(tokens), dialect, model_id, project_name)
    return parser.parse()


class _TargetParser:
    def __init__(self, stream: TokenStream, dialect: str, model_id: str, project_name: Optional[str]):
        self.ts = stream
        self.dialect = dialect
        self.model = Model(model_id, dialect, project_name)
        install_catalog(self.model)
        self.pend_types: list[tuple[int, str]] = []
        self.pend_vars: list[tuple[int, str]] = []
        self.pend_calls: list[tuple[int, str]] = []
        self.pend_methods: list[tuple[int, str, str]] = []  # node, receiver ident, method

    def parse(self) -> Model:
        container = "package" if self.dialect == MINIOO else "namespace"
        while not self.ts.at(EOF):
            if self.ts.at(NAME, container):
                self.ts.next()
                name = self.ts.expect(NAME).value
                package_id = self.model.add_node(self.model.root, NodeKind.PACKAGE, name=name)
                self.ts.expect(OP, "{")
                while not self.ts.at(OP, "}"):
                    self._class(package_id)
                self.ts.expect(OP, "}")
            else:
                self._class(self.model.root)
        self._bind()
        return self.model

    # -- declarations --------------------------------------------------------

    def _class(self, parent: int) -> None:
        payload = {}
        if self.dialect == MINISCRIPT and self.ts.at(NAME, "export"):
            self.ts.next()
            payload["export"] = True
        if self.dialect == MINIOO and self.ts.at(NAME, "public"):
            self.ts.next()
            payload["visibility"] = "public"
        self.ts.expect(NAME, "class")
        name = self.ts.expect(NAME).value
        class_id = self.model.add_node(parent, NodeKind.CLASS, name=name, payload=payload)
        self.ts.expect(OP, "{")
        while not self.ts.at(OP, "}"):
            self._member(class_id)
        self.ts.expect(OP, "}")

    def _member(self, class_id: int) -> None:
        visibility = None
        static = False
        if self.dialect == MINIOO and (self.ts.at(NAME, "public") or self.ts.at(NAME, "private")):
            visibility = self.ts.next().value
        if self.ts.at(NAME, "static"):
            self.ts.next()
            static = True
        if self.dialect == MINIOO:
            type_name = self.ts.expect(NAME).value
            name = self.ts.expect(NAME).value
            if self.ts.at(OP, "("):
                self._method(class_id, name, type_name, static, visibility)
            else:
                self.ts.expect(OP, ";")
                attr = self.model.add_node(
                    class_id, NodeKind.ATTRIBUTE_DECLARATION, name=name,
                    payload={"static": static, "visibility": visibility},
                )
                self._want_type(attr, type_name)
        else:
            name = self.ts.expect(NAME).value
            if self.ts.at(OP, "("):
                self._method(class_id, name, None, static, visibility)
            else:
                self.ts.expect(OP, ":")
                type_name = self.ts.expect(NAME).value
                self.ts.expect(OP, ";")
                attr = self.model.add_node(
                    class_id, NodeKind.ATTRIBUTE_DECLARATION, name=name,
                    payload={"static": static, "visibility": visibility},
                )
                self._want_type(attr, type_name)

    def _method(self, class_id: int, name: str, return_type: Optional[str],
                static: bool, visibility: Optional[str]) -> None:
        method_id = self.model.add_node(
            class_id, NodeKind.METHOD, name=name,
            payload={"static": static, "visibility": visibility},
        )
        self.ts.expect(OP, "(")
        while not self.ts.at(OP, ")"):
            if self.dialect == MINIOO:
                param_type = self.ts.expect(NAME).value
                param_name = self.ts.expect(NAME).value if self.ts.at(NAME) else None
            else:
                param_name = self.ts.expect(NAME).value
                self.ts.expect(OP, ":")
                param_type = self.ts.expect(NAME).value
            param = self.model.add_node(method_id, NodeKind.PARAMETER, name=param_name)
            self._want_type(param, param_type)
            if self.ts.at(OP, ","):
                self.ts.next()
        self.ts.expect(OP, ")")
        if self.dialect == MINISCRIPT:
            return_type = "void"
            if self.ts.at(OP, ":"):
                self.ts.next()
                return_type = self.ts.expect(NAME).value
        self._want_type(method_id, return_type)
        self._block(method_id)

    def _want_type(self, node_id: int, type_name: str) -> None:
        self.model.node(node_id).site_ident = type_name
        self.pend_types.append((node_id, type_name))

    # -- statements ------------------------------------------------------------

    def _block(self, parent: int) -> int:
        self.ts.expect(OP, "{")
        count = 0
        while not self.ts.at(OP, "}"):
            self._statement(parent)
            count += 1
        self.ts.expect(OP, "}")
        return count

    def _statement(self, parent: int) -> None:
        if self.ts.at(NAME, "return"):
            self.ts.next()
            stmt = self.model.add_node(parent, NodeKind.RETURN)
            if not self.ts.at(OP, ";"):
                self._expression(stmt)
            self.ts.expect(OP, ";")
            return
        if self.ts.at(NAME, "if"):
            self._if(parent)
            return
        if self.dialect == MINISCRIPT and self.ts.at(NAME, "let"):
            self.ts.next()
            name = self.ts.expect(NAME).value
            self.ts.expect(OP, ":")
            type_name = self.ts.expect(NAME).value
            self.ts.expect(OP, ";")
            decl = self.model.add_node(parent, NodeKind.VARIABLE_DECLARATION, name=name)
            self._want_type(decl, type_name)
            return
        if self.dialect == MINIOO and self.ts.at(NAME) and self.ts.peek(1).type == NAME:
            type_name = self.ts.next().value
            name = self.ts.expect(NAME).value
            self.ts.expect(OP, ";")
            decl = self.model.add_node(parent, NodeKind.VARIABLE_DECLARATION, name=name)
            self._want_type(decl, type_name)
            return
        if self.ts.at(NAME) and self.ts.peek(1).type == OP and self.ts.peek(1).value == "=":
            name = self.ts.next().value
            self.ts.next()
            stmt = self.model.add_node(parent, NodeKind.ASSIGNMENT)
            access = self.model.add_node(stmt, NodeKind.VARIABLE_ACCESS)
            self.model.node(access).site_ident = name
            self.pend_vars.append((access, name))
            self._expression(stmt)
            self.ts.expect(OP, ";")
            return
        stmt = self.model.add_node(parent, NodeKind.EXPRESSION_STATEMENT)
        self._expression(stmt)
        self.ts.expect(OP, ";")

    def _if(self, parent: int) -> None:
        self.ts.expect(NAME, "if")
        node_id = self.model.add_node(parent, NodeKind.IF_STATEMENT)
        self.ts.expect(OP, "(")
        self._expression(node_id)
        self.ts.expect(OP, ")")
        then_len = self._block(node_id)
        elseif_lens = []
        has_else = False
        while self.ts.at(NAME, "else"):
            self.ts.next()
            if self.ts.at(NAME, "if"):
                # unbraced chain folds into the elseif list of this statement
                self.ts.next()
                self.ts.expect(OP, "(")
                self._expression(node_id)
                self.ts.expect(OP, ")")
                elseif_lens.append(self._block(node_id))
                continue
            has_else = True
            self._block(node_id)
            break
        self.model.node(node_id).payload.update(
            {"then_len": then_len, "elseif_lens": elseif_lens, "has_else": has_else}
        )

    # -- expressions --------------------------------------------------------------

    _LEVELS = [("==", "<", ">"), ("+", "-"), ("*", "/")]

    def _expression(self, parent: int, level: int = 0) -> int:
        if level >= len(self._LEVELS):
            return self._factor(parent)
        node_id = self._expression(parent, level + 1)
        while self.ts.at(OP) and self.ts.peek().value in self._LEVELS[level]:
            operator = self.ts.next().value
            op_node = self.model.add_node(parent, NodeKind.BINARY_OPERATION, payload={"operator": operator})
            self.model.detach(node_id)
            self.model.attach(op_node, 0, node_id)
            self._expression(op_node, level + 1)
            node_id = op_node
        return node_id

    def _factor(self, parent: int) -> int:
        token = self.ts.peek()
        if token.type == NUMBER:
            self.ts.next()
            return self.model.add_node(parent, NodeKind.NUMBER_LITERAL, payload={"value": token.value})
        if token.type == STRING:
            self.ts.next()
            return self.model.add_node(parent, NodeKind.STRING_LITERAL, payload={"value": token.value})
        if token.type == NAME:
            self.ts.next()
            if self.ts.at(OP, "."):
                self.ts.next()
                method = self.ts.expect(NAME).value
                node_id = self.model.add_node(
                    parent, NodeKind.METHOD_INVOCATION, payload={"receiver": "pending"}
                )
                self.model.node(node_id).site_ident = f"{token.value}.{method}"
                self.pend_methods.append((node_id, token.value, method))
                self._arguments(node_id)
                return node_id
            if self.ts.at(OP, "("):
                node_id = self.model.add_node(parent, NodeKind.FUNCTION_INVOCATION)
                self.model.node(node_id).site_ident = token.value
                self.pend_calls.append((node_id, token.value))
                self._arguments(node_id)
                return node_id
            access = self.model.add_node(parent, NodeKind.VARIABLE_ACCESS)
            self.model.node(access).site_ident = token.value
            self.pend_vars.append((access, token.value))
            return access
        if token.type == OP and token.value == "(":
            self.ts.next()
            node_id = self._expression(parent)
            self.ts.expect(OP, ")")
            return node_id
        raise ParseError(f"unexpected {token.value!r} in expression", token.line, token.col)

    def _arguments(self, invocation: int) -> None:
        self.ts.expect(OP, "(")
        while not self.ts.at(OP, ")"):
            self._expression(invocation)
            if self.ts.at(OP, ","):
                self.ts.next()
        self.ts.expect(OP, ")")

    # -- name binding -----------------------------------------------------------

    def _bind(self) -> None:
        model = self.model
        classes: dict[str, int] = {}
        for node_id in model.walk():
            node = model.node(node_id)
            if node.kind is NodeKind.CLASS:
                classes.setdefault(node.name, node_id)
        for lib_id in sorted(model.library):
            node = model.node(lib_id)
            if node.kind is NodeKind.CLASS:
                classes.setdefault(node.name, lib_id)

        def members(class_id: int, kind: NodeKind) -> dict[str, int]:
            return {
                child.name: child.id
                for child in model.children_of(class_id)
                if child.kind is kind and child.name is not None
            }

        def enclosing(node_id: int, kind: NodeKind) -> Optional[int]:
            current = model.node(node_id).parent
            while current is not None:
                if model.node(current).kind is kind:
                    return current
                current = model.node(current).parent
            return None

        def resolve_variable(node_id: int, name: str) -> Optional[int]:
            method = enclosing(node_id, NodeKind.METHOD)
            if method is not None:
                for candidate in model.walk(method):
                    cand = model.node(candidate)
                    if cand.kind in (NodeKind.PARAMETER, NodeKind.VARIABLE_DECLARATION) and cand.name == name:
                        return candidate
            cls = enclosing(node_id, NodeKind.CLASS)
            if cls is not None:
                attr = members(cls, NodeKind.ATTRIBUTE_DECLARATION).get(name)
                if attr is not None:
                    return attr
            lib = model.find_library(name)
            if lib is not None and model.node(lib).kind is NodeKind.VARIABLE_DECLARATION:
                return lib
            return None

        for node_id, type_name in self.pend_types:
            model.node(node_id).type_ref = find_type(model, type_name)
        for node_id, name in self.pend_vars:
            model.node(node_id).referee = resolve_variable(node_id, name)
        for node_id, name in self.pend_calls:
            cls = enclosing(node_id, NodeKind.CLASS)
            target = members(cls, NodeKind.METHOD).get(name) if cls is not None else None
            model.node(node_id).referee = target
        for node_id, receiver, method_name in self.pend_methods:
            node = model.node(node_id)
            if receiver == "this":
                node.payload["receiver"] = "this"
                cls = enclosing(node_id, NodeKind.CLASS)
                node.referee = members(cls, NodeKind.METHOD).get(method_name) if cls is not None else None
                continue
            if receiver in classes:
                node.payload["receiver"] = "static"
                node.referee = members(classes[receiver], NodeKind.METHOD).get(method_name)
                continue
            node.payload["receiver"] = "expr"
            access = model.add_node(node_id, NodeKind.VARIABLE_ACCESS, index=0)
            model.node(access).site_ident = receiver
            var = resolve_variable(access, receiver)
            model.node(access).referee = var
            if var is not None:
                type_ref = model.node(var).type_ref
                if type_ref is not None and model.node(type_ref).kind is NodeKind.CLASS:
                    node.referee = members(type_ref, NodeKind.METHOD).get(method_name)
