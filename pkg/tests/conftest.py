"""Shared fixtures: the worked showName migration scenario and helpers."""

from __future__ import annotations

import pytest

from minimig.session import Session

SHOWNAME_SRC = """Module Main
  Dim name As String
  Public Sub showName()
    Call MsgBox("Ms " & name)
  End Sub
End Module
"""

OO_SKELETON = """package MyPackage {
  class MyDestination {
    public static void log(String message) {
    }
  }
}
"""

TS_SKELETON = """namespace App {
  class Greeter {
  }
}
"""

SHOWNAME_RULES = [
    ("AnyCopy", None, "global"),
    ("CopyAsStaticMethod", None, "oo"),
    ("CopyReplaceOperator", {"OtD": "&", "OtR": "+"}, "oo"),
    ("RenameAdaptToStaticReceiver", None, "oo"),
    ("GlobalToAttribute", None, "oo"),
    ("SimpleRename", None, "oo"),
]


def make_showname_session(rules=SHOWNAME_RULES, type_fixture=True) -> Session:
    session = Session()
    session.load_model("src", "MiniProc", "source", SHOWNAME_SRC)
    session.load_model("oo", "MiniOO", "target", OO_SKELETON)
    for name, params, context in rules:
        session.install(name, params, context)
    if type_fixture:
        session.register_fixture_mapping("src:String", "oo:String")
    return session


@pytest.fixture
def showname_session() -> Session:
    return make_showname_session()


def node_signature(model, node_id, with_ref_targets=False):
    """Independent structural shape: (kind, name, scalar payload, children).

    Deliberately reimplements comparison rather than reusing the snapshot
    serializer; referee and type edges are excluded because copies leave
    them empty by design.
    """

    def freeze(value):
        if isinstance(value, list):
            return tuple(freeze(v) for v in value)
        return value

    node = model.node(node_id)
    payload = tuple(sorted((k, freeze(v)) for k, v in node.payload.items()))
    children = tuple(node_signature(model, c, with_ref_targets) for c in node.children)
    return (node.kind.value, node.name, payload, children)
