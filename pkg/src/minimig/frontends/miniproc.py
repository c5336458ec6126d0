"""Parser for MiniProc, the procedural source dialect.

Line-oriented, case-insensitive keywords. Output is a bound model: every
identifier use carries a referee where one can be resolved; unresolvable
uses stay empty and surface through validation, never as parse failures.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError
from ..meta_model import Model, NodeKind
from . import lexing
from .dialect import MINIPROC, install_catalog
from .lexing import EOF, NAME, NEWLINE, NUMBER, OP, STRING, TokenStream

_KEYWORDS = {
    "module", "end", "dim", "as", "public", "private", "sub",
    "function", "call", "return", "if", "then", "elseif", "else",
}


def parse_source(text: str, model_id: str = "src", project_name: Optional[str] = None) -> Model:
    tokens = lexing.tokenize(text, newlines=True, comment="'", double_quote_escape=True)
    parser = _Parser(TokenStream(tokens), model_id, project_name)
    model = parser.parse()
    _bind(model)
    return model


class _Parser:
    def __init__(self, stream: TokenStream, model_id: str, project_name: Optional[str]):
        self.ts = stream
        self.model = Model(model_id, MINIPROC, project_name)
        install_catalog(self.model)

    def parse(self) -> Model:
        self.ts.skip_newlines()
        while not self.ts.at(EOF):
            self._module()
            self.ts.skip_newlines()
        return self.model

    # -- declarations ---------------------------------------------------------

    def _module(self) -> None:
        self.ts.expect(NAME, "module", ci=True)
        name = self.ts.expect(NAME).value
        module_id = self.model.add_node(self.model.root, NodeKind.MODULE, name=name)
        self._end_of_line()
        while not self._at_end("module"):
            self.ts.skip_newlines()
            if self._at_end("module"):
                break
            if self.ts.at(NAME, "dim", ci=True):
                self._dim(module_id)
            else:
                self._routine(module_id)
        self._expect_end("module")

    def _dim(self, parent: int) -> int:
        self.ts.expect(NAME, "dim", ci=True)
        name = self.ts.expect(NAME).value
        self.ts.expect(NAME, "as", ci=True)
        node_id = self.model.add_node(parent, NodeKind.VARIABLE_DECLARATION, name=name)
        self.model.node(node_id).site_ident = self.ts.expect(NAME).value
        self._end_of_line()
        return node_id

    def _routine(self, module_id: int) -> None:
        visibility = None
        if self.ts.at(NAME, "public", ci=True) or self.ts.at(NAME, "private", ci=True):
            visibility = self.ts.next().value.capitalize()
        if self.ts.at(NAME, "sub", ci=True):
            self.ts.next()
            kind = NodeKind.SUB_PROCEDURE
        elif self.ts.at(NAME, "function", ci=True):
            self.ts.next()
            kind = NodeKind.FUNCTION
        else:
            token = self.ts.peek()
            raise ParseError(f"expected Sub or Function, found {token.value!r}", token.line, token.col)
        name = self.ts.expect(NAME).value
        routine_id = self.model.add_node(module_id, kind, name=name, payload={"visibility": visibility})
        self.ts.expect(OP, "(")
        while not self.ts.at(OP, ")"):
            param_name = self.ts.expect(NAME).value
            self.ts.expect(NAME, "as", ci=True)
            param_id = self.model.add_node(routine_id, NodeKind.PARAMETER, name=param_name)
            self.model.node(param_id).site_ident = self.ts.expect(NAME).value
            if self.ts.at(OP, ","):
                self.ts.next()
        self.ts.expect(OP, ")")
        if kind is NodeKind.FUNCTION:
            self.ts.expect(NAME, "as", ci=True)
            self.model.node(routine_id).site_ident = self.ts.expect(NAME).value
        self._end_of_line()
        closer = "sub" if kind is NodeKind.SUB_PROCEDURE else "function"
        self._statements(routine_id, stop=lambda: self._at_end(closer))
        self._expect_end(closer)

    # -- statements -------------------------------------------------------------

    def _statements(self, parent: int, stop) -> int:
        count = 0
        while True:
            self.ts.skip_newlines()
            if stop() or self.ts.at(EOF):
                return count
            self._statement(parent)
            count += 1

    def _statement(self, parent: int) -> None:
        if self.ts.at(NAME, "dim", ci=True):
            self._dim(parent)
        elif self.ts.at(NAME, "call", ci=True):
            self.ts.next()
            stmt = self.model.add_node(parent, NodeKind.EXPRESSION_STATEMENT)
            name = self.ts.expect(NAME)
            self._invocation(stmt, name.value)
            self._end_of_line()
        elif self.ts.at(NAME, "return", ci=True):
            self.ts.next()
            stmt = self.model.add_node(parent, NodeKind.RETURN)
            if not self.ts.at(NEWLINE) and not self.ts.at(EOF):
                self._expression(stmt)
            self._end_of_line()
        elif self.ts.at(NAME, "if", ci=True):
            self._if(parent)
        else:
            name = self.ts.expect(NAME)
            if name.value.lower() in _KEYWORDS:
                raise ParseError(f"unexpected keyword {name.value!r}", name.line, name.col)
            self.ts.expect(OP, "=")
            stmt = self.model.add_node(parent, NodeKind.ASSIGNMENT)
            access = self.model.add_node(stmt, NodeKind.VARIABLE_ACCESS)
            self.model.node(access).site_ident = name.value
            self._expression(stmt)
            self._end_of_line()

    def _if(self, parent: int) -> None:
        self.ts.expect(NAME, "if", ci=True)
        node_id = self.model.add_node(parent, NodeKind.IF_STATEMENT)
        self._expression(node_id)
        self.ts.expect(NAME, "then", ci=True)
        self._end_of_line()

        def at_branch_end():
            return (
                self.ts.at(NAME, "elseif", ci=True)
                or self.ts.at(NAME, "else", ci=True)
                or self._at_end("if")
            )

        then_len = self._statements(node_id, stop=at_branch_end)
        elseif_lens = []
        while self.ts.at(NAME, "elseif", ci=True):
            self.ts.next()
            self._expression(node_id)
            self.ts.expect(NAME, "then", ci=True)
            self._end_of_line()
            elseif_lens.append(self._statements(node_id, stop=at_branch_end))
        has_else = False
        if self.ts.at(NAME, "else", ci=True):
            self.ts.next()
            self._end_of_line()
            has_else = True
            self._statements(node_id, stop=lambda: self._at_end("if"))
        self._expect_end("if")
        self.model.node(node_id).payload.update(
            {"then_len": then_len, "elseif_lens": elseif_lens, "has_else": has_else}
        )

    # -- expressions --------------------------------------------------------------

    _LEVELS = [("=", "<", ">"), ("&",), ("+", "-"), ("*", "/")]

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
            if token.value.lower() in _KEYWORDS:
                raise ParseError(f"unexpected keyword {token.value!r}", token.line, token.col)
            self.ts.next()
            if self.ts.at(OP, "("):
                return self._invocation(parent, token.value)
            access = self.model.add_node(parent, NodeKind.VARIABLE_ACCESS)
            self.model.node(access).site_ident = token.value
            return access
        if token.type == OP and token.value == "(":
            self.ts.next()
            node_id = self._expression(parent)
            self.ts.expect(OP, ")")
            return node_id
        raise ParseError(f"unexpected {token.value!r} in expression", token.line, token.col)

    def _invocation(self, parent: int, name: str) -> int:
        node_id = self.model.add_node(parent, NodeKind.FUNCTION_INVOCATION)
        self.model.node(node_id).site_ident = name
        self.ts.expect(OP, "(")
        while not self.ts.at(OP, ")"):
            self._expression(node_id)
            if self.ts.at(OP, ","):
                self.ts.next()
        self.ts.expect(OP, ")")
        return node_id

    # -- small helpers -----------------------------------------------------------

    def _at_end(self, which: str) -> bool:
        return self.ts.at(NAME, "end", ci=True) and self.ts.peek(1).value.lower() == which

    def _expect_end(self, which: str) -> None:
        self.ts.expect(NAME, "end", ci=True)
        self.ts.expect(NAME, which, ci=True)
        self._end_of_line()

    def _end_of_line(self) -> None:
        if self.ts.at(EOF):
            return
        self.ts.expect(NEWLINE)


# -- name binding ------------------------------------------------------------


def _bind(model: Model) -> None:
    modules = [n for n in model.children_of(model.root) if n.kind is NodeKind.MODULE]
    routines: dict[str, int] = {}
    globals_: dict[str, int] = {}
    for module in modules:
        for member in model.children_of(module.id):
            if member.kind in (NodeKind.SUB_PROCEDURE, NodeKind.FUNCTION):
                routines.setdefault(member.name, member.id)
            elif member.kind is NodeKind.VARIABLE_DECLARATION:
                globals_.setdefault(member.name, member.id)

    def enclosing_routine(node_id: int) -> Optional[int]:
        current = model.node(node_id).parent
        while current is not None:
            node = model.node(current)
            if node.kind in (NodeKind.SUB_PROCEDURE, NodeKind.FUNCTION):
                return current
            current = node.parent
        return None

    def routine_locals(routine_id: int) -> dict[str, int]:
        found: dict[str, int] = {}
        for node_id in model.walk(routine_id):
            node = model.node(node_id)
            if node.kind in (NodeKind.PARAMETER, NodeKind.VARIABLE_DECLARATION):
                found.setdefault(node.name, node_id)
        return found

    for node_id in list(model.walk()):
        node = model.node(node_id)
        if node.site_ident is None:
            continue
        ident = node.site_ident
        if node.kind is NodeKind.VARIABLE_ACCESS:
            routine = enclosing_routine(node_id)
            target = routine_locals(routine).get(ident) if routine is not None else None
            if target is None:
                target = globals_.get(ident)
            if target is None:
                lib = model.find_library(ident)
                if lib is not None and model.node(lib).kind is NodeKind.VARIABLE_DECLARATION:
                    target = lib
            node.referee = target
        elif node.kind is NodeKind.FUNCTION_INVOCATION:
            target = routines.get(ident)
            if target is None:
                lib = model.find_library(ident)
                if lib is not None and model.node(lib).kind is NodeKind.LIBRARY_ROUTINE_DECLARATION:
                    target = lib
            node.referee = target
        else:
            # declared-type slots: MiniProc types all come from the library
            lib = model.find_library(ident)
            if lib is not None and model.node(lib).kind is NodeKind.PRIMITIVE_TYPE_DECLARATION:
                node.type_ref = lib
