"""Rule catalog behavior, exercised through real directives."""

import pytest

from minimig.errors import ChooserRequired, DuplicateMember
from minimig.meta_model import NodeKind, NodeRef
from minimig.session import Session

from conftest import node_signature


def basic_session(src_text, oo_text="class Sink {\n}\n", rules=(), fixtures=()):
    session = Session()
    session.load_model("src", "MiniProc", "source", src_text)
    session.load_model("oo", "MiniOO", "target", oo_text)
    session.install("AnyCopy", context="global")
    for name, params in rules:
        session.install(name, params, "oo")
    for source, target in fixtures:
        session.register_fixture_mapping(source, target)
    return session


def find_kind(model, kind, name=None):
    for node_id in model.walk():
        node = model.node(node_id)
        if node.kind is kind and (name is None or node.name == name):
            return node_id
    raise AssertionError(f"no {kind} {name}")


TYPE_FIXTURES = [
    ("src:String", "oo:String"),
    ("src:Integer", "oo:int"),
    ("src:Single", "oo:Float"),
    ("src:Long", "oo:BigInteger"),
    ("src:Variant", "oo:Object"),
    ("src:dbInt", "oo:int"),
]


# -- AnyCopy ---------------------------------------------------------------------


def test_anycopy_copies_statement_subtree():
    session = basic_session(
        "Module M\n  Public Sub go()\n    Call MsgBox(\"x\")\n  End Sub\nEnd Module\n"
    )
    ws = session.workspace
    session.install("CopyAsStaticMethod", None, "oo")
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    stmt = find_kind(oo, NodeKind.EXPRESSION_STATEMENT)
    assert oo.node(stmt).kind is NodeKind.EXPRESSION_STATEMENT
    # the copied call keeps its source kind: invalid in the target, by design
    invocation = find_kind(oo, NodeKind.FUNCTION_INVOCATION)
    assert oo.node(invocation).origin is not None


def test_anycopy_string_literal_identical():
    session = basic_session(
        "Module M\n  Public Sub go()\n    Call MsgBox(\"Ms \")\n  End Sub\nEnd Module\n"
    )
    ws = session.workspace
    src = ws.model("src")
    literal = find_kind(src, NodeKind.STRING_LITERAL)
    sink = ws.resolve_path("oo:Sink")
    result = session.engine.produce(NodeRef("src", literal), sink)
    oo = ws.model("oo")
    copied = result.created_nodes[0]
    assert node_signature(src, literal) == node_signature(oo, copied.node_id)
    assert result.stubs_created == [] and result.mappings == []


# -- CopyAsStaticMethod ------------------------------------------------------------


def test_copy_as_static_method_sets_static_and_void():
    session = basic_session(
        "Module M\n  Public Sub show()\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.show"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    method = find_kind(oo, NodeKind.METHOD, "show")
    assert oo.node(method).payload["static"] is True
    assert oo.node(oo.node(method).type_ref).name == "void"


def test_copy_as_static_method_condition_rejects_function():
    session = basic_session(
        "Module M\n  Public Function f() As Integer\n    Return 1\n  End Function\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.f"), ws.resolve_path("oo:Sink"))
    # fell through to AnyCopy: still a Function node, not a Method
    oo = ws.model("oo")
    assert find_kind(oo, NodeKind.FUNCTION, "f")


def test_sub_with_two_params_yields_two_parameters():
    # oracle: count Parameter children
    session = basic_session(
        "Module M\n  Public Sub f(a As Integer, b As String)\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None)],
        fixtures=TYPE_FIXTURES,
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.f"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    method = find_kind(oo, NodeKind.METHOD, "f")
    params = [c for c in oo.children_of(method) if c.kind is NodeKind.PARAMETER]
    assert len(params) == 2
    assert [oo.node(p.type_ref).name for p in params] == ["int", "String"]


def test_duplicate_member_is_error_and_rolls_back():
    session = basic_session(
        "Module M\n  Public Sub show()\n  End Sub\nEnd Module\n",
        oo_text="class Sink {\n  static void show() {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None)],
    )
    ws = session.workspace
    before = session.snapshot_state()
    with pytest.raises(DuplicateMember):
        session.engine.produce(ws.resolve_path("src:M.show"), ws.resolve_path("oo:Sink"))
    assert session.snapshot_state() == before


def test_duplicate_member_overwrite_flag():
    session = basic_session(
        "Module M\n  Public Sub show()\n  End Sub\nEnd Module\n",
        oo_text="class Sink {\n  static void show() {\n  }\n}\n",
    )
    session.install("CopyAsStaticMethod", {"overwrite": True}, "oo")
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.show"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    methods = [c for c in oo.children_of(ws.resolve_path("oo:Sink").node_id)
               if c.kind is NodeKind.METHOD and c.name == "show"]
    assert len(methods) == 1


# -- CopyReplaceOperator --------------------------------------------------------------


def test_copy_replace_operator_swaps_detected_operator():
    session = basic_session(
        'Module M\n  Public Sub go()\n    Call MsgBox("a" & "b")\n  End Sub\nEnd Module\n',
        rules=[("CopyAsStaticMethod", None), ("CopyReplaceOperator", {"OtD": "&", "OtR": "+"})],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    op = find_kind(oo, NodeKind.BINARY_OPERATION)
    assert oo.node(op).payload["operator"] == "+"


def test_copy_replace_operator_ignores_other_operators():
    session = basic_session(
        "Module M\n  Public Sub go()\n    x = 3 - 1\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("CopyReplaceOperator", {"OtD": "&", "OtR": "+"})],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    op = find_kind(oo, NodeKind.BINARY_OPERATION)
    assert oo.node(op).payload["operator"] == "-"


def test_copy_replace_operator_reentrant_on_nested_operations():
    # oracle: zero '&' operators anywhere in the produced subtree
    session = basic_session(
        'Module M\n  Public Sub go()\n    Call MsgBox("a" & ("b" & "c"))\n  End Sub\nEnd Module\n',
        rules=[("CopyAsStaticMethod", None), ("CopyReplaceOperator", {"OtD": "&", "OtR": "+"})],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    operators = [oo.node(n).payload.get("operator") for n in oo.walk()
                 if oo.node(n).kind is NodeKind.BINARY_OPERATION]
    assert operators.count("&") == 0
    assert operators.count("+") == 2


# -- ModuleToClass / FunctionToMethod / GlobalToAttribute ---------------------------------


def test_module_to_class():
    session = basic_session(
        "Module Main\n  Dim g As Integer\n  Public Sub s()\n  End Sub\nEnd Module\n",
        oo_text="package P {\n}\n",
        rules=[("ModuleToClass", None), ("CopyAsStaticMethod", None),
               ("GlobalToAttribute", None), ("SimpleRename", None)],
        fixtures=TYPE_FIXTURES,
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:Main"), ws.resolve_path("oo:P"))
    oo = ws.model("oo")
    cls = find_kind(oo, NodeKind.CLASS, "Main")
    kinds = [c.kind for c in oo.children_of(cls)]
    assert kinds == [NodeKind.ATTRIBUTE_DECLARATION, NodeKind.METHOD]


def test_global_to_attribute_maps_type():
    session = basic_session(
        "Module Main\n  Dim name As String\nEnd Module\n",
        rules=[("GlobalToAttribute", None), ("SimpleRename", None)],
        fixtures=TYPE_FIXTURES,
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:Main.name"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    attr = find_kind(oo, NodeKind.ATTRIBUTE_DECLARATION, "name")
    assert oo.node(attr).payload["static"] is True
    assert oo.node(oo.node(attr).type_ref).name == "String"


def test_function_to_method_maps_return_type():
    session = basic_session(
        "Module M\n  Public Function half(x As Single) As Single\n    Return x\n  End Function\nEnd Module\n",
        rules=[("FunctionToMethod", None), ("SimpleRename", None)],
        fixtures=TYPE_FIXTURES,
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.half"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    method = find_kind(oo, NodeKind.METHOD, "half")
    assert oo.node(method).payload["static"] is True
    assert oo.node(oo.node(method).type_ref).name == "Float"


# -- SimpleRename ----------------------------------------------------------------------


def test_simple_rename_rebinds_type_reference():
    session = basic_session(
        "Module M\n  Public Sub go()\n    Dim n As dbInt\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None)],
        fixtures=TYPE_FIXTURES,
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    decl = find_kind(oo, NodeKind.VARIABLE_DECLARATION, "n")
    assert oo.node(oo.node(decl).type_ref).name == "int"


def test_simple_rename_skips_callable_stubs():
    session = basic_session(
        "Module M\n  Public Sub go()\n    Call MsgBox(\"x\")\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    # map MsgBox to the library Console.log; only SimpleRename installed, so nothing adapts
    result = session.engine.map(ws.resolve_path("src:MsgBox"), ws.resolve_path("oo:Console.log"),
                                ws.resolve_path("oo:"))
    assert result.adapted == []
    assert len(result.unadapted) == 1


# -- receiver rules ------------------------------------------------------------------------


CALLER_SRC = """Module M
  Public Sub caller()
    Call work("x", "y")
  End Sub
  Public Function work(a As String, b As String) As String
    Return a
  End Function
End Module
"""


def test_rename_adapt_to_static_receiver_keeps_arguments():
    # oracle: argument subtree signatures, captured before adaptation
    session = basic_session(
        CALLER_SRC,
        oo_text="class Sink {\n  static void log(String a, String b) {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None), ("RenameAdaptToStaticReceiver", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.caller"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    invocation = find_kind(oo, NodeKind.FUNCTION_INVOCATION)
    args_before = [node_signature(oo, c) for c in oo.node(invocation).children]
    session.engine.map(ws.resolve_path("src:M.work"), ws.resolve_path("oo:Sink.log"),
                       ws.resolve_path("oo:"))
    replacement = find_kind(oo, NodeKind.METHOD_INVOCATION)
    node = oo.node(replacement)
    assert node.payload["receiver"] == "static"
    assert oo.node(node.referee).name == "log"
    assert [node_signature(oo, c) for c in node.children] == args_before


def test_static_receiver_condition_rejects_instance_method():
    session = basic_session(
        CALLER_SRC,
        oo_text="class Sink {\n  void log(String a, String b) {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None), ("RenameAdaptToStaticReceiver", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.caller"), ws.resolve_path("oo:Sink"))
    result = session.engine.map(ws.resolve_path("src:M.work"), ws.resolve_path("oo:Sink.log"),
                                ws.resolve_path("oo:"))
    assert result.adapted == []


def test_rename_adapt_to_same_class_receiver_uses_this():
    session = basic_session(
        CALLER_SRC,
        oo_text="class Sink {\n  void helper(String a, String b) {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None), ("RenameAdaptToSameClassReceiver", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.caller"), ws.resolve_path("oo:Sink"))
    session.engine.map(ws.resolve_path("src:M.work"), ws.resolve_path("oo:Sink.helper"),
                       ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    invocation = find_kind(oo, NodeKind.METHOD_INVOCATION)
    assert oo.node(invocation).payload["receiver"] == "this"


def test_rename_adapt_to_argument_receiver_extracts_chosen_argument():
    # oracle: receiver equals old first argument; remaining args keep order
    session = basic_session(
        CALLER_SRC,
        oo_text="class Sink {\n}\nclass Other {\n  void work(String rest) {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None), ("RenameAdaptToArgumentReceiver", None)],
    )
    ws = session.workspace
    session.set_chooser(lambda prompt: 0)
    session.engine.produce(ws.resolve_path("src:M.caller"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    invocation = find_kind(oo, NodeKind.FUNCTION_INVOCATION)
    old_args = [node_signature(oo, c) for c in oo.node(invocation).children]
    session.engine.map(ws.resolve_path("src:M.work"), ws.resolve_path("oo:Other.work"),
                       ws.resolve_path("oo:"))
    replacement = find_kind(oo, NodeKind.METHOD_INVOCATION)
    node = oo.node(replacement)
    assert node.payload["receiver"] == "expr"
    receiver, *rest = [node_signature(oo, c) for c in node.children]
    assert receiver == old_args[0]
    assert rest == old_args[1:]


def test_argument_receiver_headless_raises_chooser_required():
    session = basic_session(
        CALLER_SRC,
        oo_text="class Sink {\n}\nclass Other {\n  void work(String rest) {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None), ("RenameAdaptToArgumentReceiver", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.caller"), ws.resolve_path("oo:Sink"))
    before = session.snapshot_state()
    with pytest.raises(ChooserRequired):
        session.engine.map(ws.resolve_path("src:M.work"), ws.resolve_path("oo:Other.work"),
                           ws.resolve_path("oo:"))
    assert session.snapshot_state() == before


# -- Autowrap ------------------------------------------------------------------------------


def test_autowrap_generates_callable_skeleton():
    # oracle: post-state has zero stubs for Beep
    session = basic_session(
        "Module M\n  Public Sub go()\n    Call Beep(1, 2)\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None),
               ("RenameAdaptToStaticReceiver", None), ("Autowrap", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    shims = find_kind(oo, NodeKind.CLASS, "LibraryShims")
    beep = oo.find_child(shims, "Beep")
    assert oo.node(beep).kind is NodeKind.METHOD
    assert len([c for c in oo.children_of(beep) if c.kind is NodeKind.PARAMETER]) == 2
    foreign = NodeRef("src", ws.model("src").find_library("Beep"))
    assert oo.stub_for(foreign) is None
    invocation = find_kind(oo, NodeKind.METHOD_INVOCATION)
    assert oo.node(oo.node(invocation).referee).name == "Beep"


def test_autowrap_not_used_when_mapping_exists():
    session = basic_session(
        "Module M\n  Public Sub go()\n    Call MsgBox(\"x\")\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None),
               ("RenameAdaptToStaticReceiver", None), ("Autowrap", None)],
        fixtures=[("src:MsgBox", "oo:Console.log")],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    assert oo.find_child(oo.root, "LibraryShims") is None
    invocation = find_kind(oo, NodeKind.METHOD_INVOCATION)
    assert oo.node(oo.node(invocation).referee).name == "log"


def test_autowrap_unmapped_type_becomes_empty_class():
    # oracle: zero stubs afterwards, type site bound to a class skeleton
    session = basic_session(
        "Module M\n  Public Sub go()\n    Dim d As dbDate\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None), ("Autowrap", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")
    assert len(oo.stubs) == 0
    decl = find_kind(oo, NodeKind.VARIABLE_DECLARATION, "d")
    bound = oo.node(oo.node(decl).type_ref)
    assert bound.kind is NodeKind.CLASS and bound.name == "dbDate"
    assert bound.children == []


# -- catalog invariants -------------------------------------------------------------------


def test_declaration_applies_register_exactly_one_auto_mapping():
    session = basic_session(
        "Module M\n  Public Sub f(a As Integer)\n    Dim n As Integer\n  End Sub\nEnd Module\n",
        rules=[("CopyAsStaticMethod", None), ("SimpleRename", None)],
        fixtures=TYPE_FIXTURES,
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.f"), ws.resolve_path("oo:Sink"))
    auto = [r for r in session.mapbook.all_records() if r.mapping.origin == "ProduceAuto"]
    # one per declaration produced: the sub itself, one parameter, one local
    assert len(auto) == 3
    sources = {ws.node(r.mapping.source).kind for r in auto}
    assert sources == {NodeKind.SUB_PROCEDURE, NodeKind.PARAMETER, NodeKind.VARIABLE_DECLARATION}


def test_adaptive_apply_decreases_stub_reference_count():
    session = basic_session(
        "Module M\n  Public Sub go()\n    Call MsgBox(\"a\")\n    Call MsgBox(\"b\")\n  End Sub\nEnd Module\n",
        oo_text="class Sink {\n  static void log(String m) {\n  }\n}\n",
        rules=[("CopyAsStaticMethod", None), ("RenameAdaptToStaticReceiver", None)],
    )
    ws = session.workspace
    session.engine.produce(ws.resolve_path("src:M.go"), ws.resolve_path("oo:Sink"))
    oo = ws.model("oo")

    def stub_ref_census():
        count = 0
        for site in oo.iter_sites():
            target = oo.get_site(site)
            if target is not None and oo.node(target).stub is not None:
                count += 1
        return count

    before = stub_ref_census()
    assert before == 2
    session.engine.map(ws.resolve_path("src:MsgBox"), ws.resolve_path("oo:Sink.log"),
                       ws.resolve_path("oo:"))
    assert stub_ref_census() == 0
