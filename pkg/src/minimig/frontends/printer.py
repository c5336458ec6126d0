"""Deterministic pretty printers for the three dialects.

Exporting demands a violation-free model: every reference must point at a
real same-model declaration, so names are printed from referees (a rebound
reference prints its new name). ``render_fragment`` is the permissive
variant used for display, falling back to the written identifier text when
a reference is still unresolved or bridged by a stub.
"""

from __future__ import annotations

from typing import Optional

from ..errors import NotExportable
from ..meta_model import Model, NodeKind
from .dialect import MINIPROC, MINISCRIPT, validate

_PRECEDENCE = {"=": 1, "==": 1, "<": 1, ">": 1, "&": 2, "+": 3, "-": 3, "*": 4, "/": 4}


def print_model(model: Model) -> str:
    violations = validate(model)
    if violations:
        raise NotExportable(violations)
    return _Printer(model, permissive=False).program()


def render_fragment(model: Model, node_id: int) -> str:
    """Best-effort single-node source text for display panels."""
    return _Printer(model, permissive=True).fragment(node_id)


def _escape(value: str, dialect: str) -> str:
    if dialect == MINIPROC:
        return value.replace('"', '""')
    return value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _if_parts(model: Model, node_id: int):
    node = model.node(node_id)
    children = list(node.children)
    then_len = node.payload.get("then_len", len(children) - 1)
    elseif_lens = node.payload.get("elseif_lens", [])
    has_else = node.payload.get("has_else", False)
    condition = children[0]
    i = 1
    then_branch = children[i : i + then_len]
    i += then_len
    elseifs = []
    for length in elseif_lens:
        elseifs.append((children[i], children[i + 1 : i + 1 + length]))
        i += 1 + length
    else_branch = children[i:] if has_else else []
    return condition, then_branch, elseifs, else_branch


class _Printer:
    def __init__(self, model: Model, permissive: bool):
        self.model = model
        self.dialect = model.dialect
        self.permissive = permissive
        self.lines: list[str] = []

    # -- entry points ---------------------------------------------------------

    def program(self) -> str:
        for child in self.model.children_of(self.model.root):
            self.declaration(child.id, 0)
        return "\n".join(self.lines) + "\n"

    def fragment(self, node_id: int) -> str:
        node = self.model.node(node_id)
        if node.kind is NodeKind.PROJECT:
            self.lines.append(node.name or "")
        elif node.is_declaration():
            self.declaration(node_id, 0)
        else:
            self.statement(node_id, 0)
        return "\n".join(self.lines)

    # -- declarations -----------------------------------------------------------

    def declaration(self, node_id: int, depth: int) -> None:
        node = self.model.node(node_id)
        pad = "  " * depth
        if node.kind is NodeKind.MODULE:
            self.lines.append(f"{pad}Module {node.name}")
            for child in node.children:
                self.declaration(child, depth + 1)
            self.lines.append(f"{pad}End Module")
        elif node.kind is NodeKind.PACKAGE:
            keyword = "namespace" if self.dialect == MINISCRIPT else "package"
            self.lines.append(f"{pad}{keyword} {node.name} {{")
            for child in node.children:
                self.declaration(child, depth + 1)
            self.lines.append(f"{pad}}}")
        elif node.kind is NodeKind.CLASS:
            prefix = "export " if node.payload.get("export") else ""
            if node.payload.get("visibility"):
                prefix = f"{node.payload['visibility']} " + prefix
            self.lines.append(f"{pad}{prefix}class {node.name} {{")
            for child in node.children:
                self.declaration(child, depth + 1)
            self.lines.append(f"{pad}}}")
        elif node.kind in (NodeKind.SUB_PROCEDURE, NodeKind.FUNCTION):
            keyword = "Sub" if node.kind is NodeKind.SUB_PROCEDURE else "Function"
            visibility = node.payload.get("visibility")
            head = f"{visibility} " if visibility else ""
            params = ", ".join(self.parameter(c.id) for c in self.model.children_of(node_id)
                               if c.kind is NodeKind.PARAMETER)
            suffix = f" As {self.type_name(node.type_ref)}" if node.kind is NodeKind.FUNCTION else ""
            self.lines.append(f"{pad}{head}{keyword} {node.name}({params}){suffix}")
            for child in self.model.children_of(node_id):
                if child.kind is not NodeKind.PARAMETER:
                    self.statement(child.id, depth + 1)
            self.lines.append(f"{pad}End {keyword}")
        elif node.kind is NodeKind.METHOD:
            self.method(node_id, depth)
        elif node.kind is NodeKind.ATTRIBUTE_DECLARATION:
            self.lines.append(f"{pad}{self.attribute(node_id)}")
        elif node.kind is NodeKind.VARIABLE_DECLARATION:
            self.lines.append(f"{pad}{self.var_decl(node_id)}")
        else:
            self.statement(node_id, depth)

    def method(self, node_id: int, depth: int) -> None:
        node = self.model.node(node_id)
        pad = "  " * depth
        modifiers = ""
        if node.payload.get("visibility"):
            modifiers += f"{node.payload['visibility']} "
        if node.payload.get("static"):
            modifiers += "static "
        params = ", ".join(self.parameter(c.id) for c in self.model.children_of(node_id)
                           if c.kind is NodeKind.PARAMETER)
        if self.dialect == MINISCRIPT:
            head = f"{pad}{modifiers}{node.name}({params}): {self.type_name(node.type_ref)} {{"
        else:
            head = f"{pad}{modifiers}{self.type_name(node.type_ref)} {node.name}({params}) {{"
        self.lines.append(head)
        for child in self.model.children_of(node_id):
            if child.kind is not NodeKind.PARAMETER:
                self.statement(child.id, depth + 1)
        self.lines.append(f"{pad}}}")

    def parameter(self, node_id: int) -> str:
        node = self.model.node(node_id)
        type_name = self.type_name(node.type_ref)
        if self.dialect == MINIPROC:
            return f"{node.name} As {type_name}"
        if self.dialect == MINISCRIPT:
            name = node.name or f"arg{self.model.node(node.parent).children.index(node_id)}"
            return f"{name}: {type_name}"
        return f"{type_name} {node.name}" if node.name else type_name

    def attribute(self, node_id: int) -> str:
        node = self.model.node(node_id)
        modifiers = ""
        if node.payload.get("visibility"):
            modifiers += f"{node.payload['visibility']} "
        if node.payload.get("static"):
            modifiers += "static "
        if self.dialect == MINISCRIPT:
            return f"{modifiers}{node.name}: {self.type_name(node.type_ref)};"
        return f"{modifiers}{self.type_name(node.type_ref)} {node.name};"

    def var_decl(self, node_id: int) -> str:
        node = self.model.node(node_id)
        type_name = self.type_name(node.type_ref)
        if self.dialect == MINIPROC:
            return f"Dim {node.name} As {type_name}"
        if self.dialect == MINISCRIPT:
            return f"let {node.name}: {type_name};"
        return f"{type_name} {node.name};"

    def type_name(self, type_ref: Optional[int]) -> str:
        if type_ref is None:
            return "?"
        node = self.model.node(type_ref)
        if node.kind is NodeKind.STUB_DECLARATION:
            return f"{node.name}?" if self.permissive else "?"
        return node.name or "?"

    # -- statements ----------------------------------------------------------------

    def statement(self, node_id: int, depth: int) -> None:
        node = self.model.node(node_id)
        pad = "  " * depth
        terminator = "" if self.dialect == MINIPROC else ";"
        if node.kind is NodeKind.VARIABLE_DECLARATION:
            self.lines.append(f"{pad}{self.var_decl(node_id)}")
        elif node.kind is NodeKind.EXPRESSION_STATEMENT:
            inner = self.expr(node.children[0]) if node.children else ""
            if self.dialect == MINIPROC:
                child_kind = self.model.node(node.children[0]).kind if node.children else None
                prefix = "Call " if child_kind in (NodeKind.FUNCTION_INVOCATION, NodeKind.METHOD_INVOCATION) else ""
                self.lines.append(f"{pad}{prefix}{inner}")
            else:
                self.lines.append(f"{pad}{inner};")
        elif node.kind is NodeKind.ASSIGNMENT:
            lhs = self.expr(node.children[0])
            rhs = self.expr(node.children[1]) if len(node.children) > 1 else "?"
            self.lines.append(f"{pad}{lhs} = {rhs}{terminator}")
        elif node.kind is NodeKind.RETURN:
            value = f" {self.expr(node.children[0])}" if node.children else ""
            keyword = "Return" if self.dialect == MINIPROC else "return"
            self.lines.append(f"{pad}{keyword}{value}{terminator}")
        elif node.kind is NodeKind.IF_STATEMENT:
            self.if_statement(node_id, depth)
        elif node.is_declaration():
            self.declaration(node_id, depth)
        else:
            self.lines.append(f"{pad}{self.expr(node_id)}{terminator}")

    def if_statement(self, node_id: int, depth: int) -> None:
        pad = "  " * depth
        condition, then_branch, elseifs, else_branch = _if_parts(self.model, node_id)
        has_else = self.model.node(node_id).payload.get("has_else", False)
        if self.dialect == MINIPROC:
            self.lines.append(f"{pad}If {self.expr(condition)} Then")
            for stmt in then_branch:
                self.statement(stmt, depth + 1)
            for cond, body in elseifs:
                self.lines.append(f"{pad}ElseIf {self.expr(cond)} Then")
                for stmt in body:
                    self.statement(stmt, depth + 1)
            if has_else:
                self.lines.append(f"{pad}Else")
                for stmt in else_branch:
                    self.statement(stmt, depth + 1)
            self.lines.append(f"{pad}End If")
            return
        self.lines.append(f"{pad}if ({self.expr(condition)}) {{")
        for stmt in then_branch:
            self.statement(stmt, depth + 1)
        for cond, body in elseifs:
            self.lines.append(f"{pad}}} else if ({self.expr(cond)}) {{")
            for stmt in body:
                self.statement(stmt, depth + 1)
        if has_else:
            self.lines.append(f"{pad}}} else {{")
            for stmt in else_branch:
                self.statement(stmt, depth + 1)
        self.lines.append(f"{pad}}}")

    # -- expressions ------------------------------------------------------------------

    def expr(self, node_id: int, parent_level: int = 0, right: bool = False) -> str:
        node = self.model.node(node_id)
        if node.kind is NodeKind.STRING_LITERAL:
            return f'"{_escape(node.payload.get("value", ""), self.dialect)}"'
        if node.kind is NodeKind.NUMBER_LITERAL:
            return node.payload.get("value", "0")
        if node.kind is NodeKind.BINARY_OPERATION:
            operator = node.payload.get("operator", "?")
            level = _PRECEDENCE.get(operator, 1)
            left_text = self.expr(node.children[0], level, False)
            right_text = self.expr(node.children[1], level, True)
            text = f"{left_text} {operator} {right_text}"
            if level < parent_level or (level == parent_level and right):
                return f"({text})"
            return text
        if node.kind is NodeKind.VARIABLE_ACCESS:
            return self.ref_name(node_id)
        if node.kind is NodeKind.FUNCTION_INVOCATION:
            args = ", ".join(self.expr(c) for c in node.children)
            return f"{self.ref_name(node_id)}({args})"
        if node.kind is NodeKind.METHOD_INVOCATION:
            receiver = node.payload.get("receiver", "static")
            children = list(node.children)
            if receiver == "expr" and children:
                receiver_text = self.expr(children[0])
                children = children[1:]
            elif receiver in ("this", "super"):
                receiver_text = receiver
            else:
                receiver_text = self.receiver_class(node_id)
            args = ", ".join(self.expr(c) for c in children)
            return f"{receiver_text}.{self.method_name(node_id)}({args})"
        return f"?{node.kind.value}?"

    def ref_name(self, node_id: int) -> str:
        node = self.model.node(node_id)
        if node.referee is not None:
            target = self.model.node(node.referee)
            if target.kind is NodeKind.STUB_DECLARATION:
                return f"{target.name}?" if self.permissive else "?"
            return target.name or "?"
        return f"{node.site_ident}?" if self.permissive and node.site_ident else "?"

    def method_name(self, node_id: int) -> str:
        node = self.model.node(node_id)
        if node.referee is not None:
            target = self.model.node(node.referee)
            if target.kind is not NodeKind.STUB_DECLARATION:
                return target.name or "?"
            if self.permissive:
                return f"{target.name}?"
        if self.permissive and node.site_ident:
            return node.site_ident.rsplit(".", 1)[-1] + "?"
        return "?"

    def receiver_class(self, node_id: int) -> str:
        node = self.model.node(node_id)
        if node.referee is not None:
            target = self.model.node(node.referee)
            if target.kind is not NodeKind.STUB_DECLARATION and target.parent is not None:
                return self.model.node(target.parent).name or "?"
        if self.permissive and node.site_ident and "." in node.site_ident:
            return node.site_ident.split(".", 1)[0] + "?"
        return "?"
