"""HTTP session service: endpoints, tree purity, pending-choice protocol."""

import pytest
from fastapi.testclient import TestClient

from minimig.service import build_app

from conftest import make_showname_session

SHOWNAME = "src:Main.showName"
DESTINATION = "oo:MyPackage.MyDestination"


@pytest.fixture
def client():
    return TestClient(build_app(make_showname_session()))


def test_list_models(client):
    models = {m["id"]: m for m in client.get("/models").json()}
    assert models["src"]["dialect"] == "MiniProc"
    assert models["src"]["role"] == "source"
    assert models["oo"]["role"] == "target"


def test_tree_endpoint_is_pure(client):
    first = client.get("/models/src/tree").json()
    second = client.get("/models/src/tree").json()
    assert first == second
    assert first["kind"] == "Project"
    names = [child["name"] for child in first["children"]]
    assert names == ["Main"]


def test_node_source_fragment(client):
    tree = client.get("/models/src/tree").json()
    module = tree["children"][0]
    sub = next(c for c in module["children"] if c["name"] == "showName")
    text = client.get(f"/nodes/src/{sub['id']}/source").json()["text"]
    assert 'Call MsgBox("Ms " & name)' in text


def test_applicable_rules_differ_by_target_context(client):
    # same source, two target contexts: candidate lists differ
    for_class = client.get("/rules/applicable",
                           params={"source": SHOWNAME, "target": DESTINATION}).json()
    for_package = client.get("/rules/applicable",
                             params={"source": SHOWNAME, "target": "oo:MyPackage"}).json()
    class_rules = [c["rule"] for c in for_class["candidates"]]
    package_rules = [c["rule"] for c in for_package["candidates"]]
    assert class_rules == ["CopyAsStaticMethod", "AnyCopy"]
    assert package_rules == ["AnyCopy"]


def test_produce_and_feedback_round_trip(client):
    result = client.post("/directives/produce",
                         json={"source": SHOWNAME, "target": DESTINATION, "mode": "auto"})
    assert result.status_code == 200
    body = result.json()
    assert body["status"] == "applied"
    assert len(body["stubsCreated"]) == 2

    # badges reflect the two unresolved references under the new method
    tree = client.get("/models/oo/tree").json()
    cls = tree["children"][0]["children"][0]
    method = next(c for c in cls["children"] if c["name"] == "showName")
    assert method["badges"]["unresolved"] == 2

    info_target = client.get(f"/contexts/oo/{cls['id']}/info").json()
    assert len(info_target["unresolved"]) == 2
    assert any(m["origin"] == "ProduceAuto" for m in info_target["mappings"])

    log = client.get("/log", params={"since": 0}).json()
    assert any("produce" in line for line in log["lines"])


def test_map_endpoint_adapts(client):
    client.post("/directives/produce", json={"source": SHOWNAME, "target": DESTINATION})
    result = client.post("/directives/map", json={
        "source": "src:MsgBox",
        "target": f"{DESTINATION}.log",
        "scope": DESTINATION,
    }).json()
    assert len(result["adapted"]) == 1
    assert len(result["stubsRemoved"]) == 1


def test_rollback_endpoint(client):
    before = client.get("/models/oo/tree").json()
    produced = client.post("/directives/produce",
                           json={"source": SHOWNAME, "target": DESTINATION}).json()
    client.post("/rollback", json={"txn": produced["txn"]})
    assert client.get("/models/oo/tree").json() == before
    assert client.get("/transactions").json()["stack"] == []


def test_rollback_empty_stack_409(client):
    assert client.post("/rollback", json={}).status_code == 409


def test_export_conflict_then_success(client, tmp_path):
    client.post("/directives/produce", json={"source": SHOWNAME, "target": DESTINATION})
    blocked = client.post("/export", json={"model": "oo"})
    assert blocked.status_code == 409
    detail = blocked.json()["detail"]
    assert detail["error"] == "NotExportable"

    client.post("/directives/map", json={
        "source": "src:MsgBox", "target": f"{DESTINATION}.log", "scope": DESTINATION,
    })
    client.post("/directives/produce", json={"source": "src:Main.name", "target": DESTINATION})
    exported = client.post("/export", json={"model": "oo"})
    assert exported.status_code == 200
    assert "static void showName()" in exported.json()["text"]


def test_pending_choice_flow(client):
    pending = client.post("/directives/produce", json={
        "source": SHOWNAME, "target": DESTINATION, "mode": "choice",
    }).json()
    assert pending["status"] == "pendingChoice"
    assert pending["prompt"]["options"] == ["CopyAsStaticMethod", "AnyCopy"]

    done = client.post("/directives/answer",
                       json={"token": pending["token"], "choice": 0}).json()
    assert done["status"] == "applied"
    tree = client.get("/models/oo/tree").json()
    cls = tree["children"][0]["children"][0]
    assert any(c["name"] == "showName" and c["kind"] == "Method" for c in cls["children"])


def test_stale_choice_token_409(client):
    pending = client.post("/directives/produce", json={
        "source": SHOWNAME, "target": DESTINATION, "mode": "choice",
    }).json()
    stale = client.post("/directives/answer", json={"token": "bogus", "choice": 0})
    assert stale.status_code == 409
    # clean up the real pending directive
    client.post("/directives/answer", json={"token": pending["token"], "choice": 0})


def test_abandoned_choice_leaves_state_unchanged(client):
    before = client.get("/models/oo/tree").json()
    pending = client.post("/directives/produce", json={
        "source": SHOWNAME, "target": DESTINATION, "mode": "choice",
    }).json()
    outcome = client.post("/directives/answer",
                          json={"token": pending["token"], "cancel": True}).json()
    assert outcome["status"] == "abandoned"
    assert client.get("/models/oo/tree").json() == before
    assert client.get("/transactions").json()["stack"] == []


def test_directive_runs_normally_after_abandon(client):
    pending = client.post("/directives/produce", json={
        "source": SHOWNAME, "target": DESTINATION, "mode": "choice",
    }).json()
    client.post("/directives/answer", json={"token": pending["token"], "cancel": True})
    done = client.post("/directives/produce",
                       json={"source": SHOWNAME, "target": DESTINATION, "mode": "auto"})
    assert done.status_code == 200
    assert done.json()["status"] == "applied"


def test_debug_mode_prompts_for_every_rule_application(client):
    pending = client.post("/directives/produce", json={
        "source": SHOWNAME, "target": DESTINATION, "mode": "debug",
    }).json()
    prompts = 0
    while pending["status"] == "pendingChoice":
        prompts += 1
        pending = client.post("/directives/answer",
                              json={"token": pending["token"], "choice": 0}).json()
    assert pending["status"] == "applied"
    assert prompts == 6  # method, statement, call, operation, literal, access
