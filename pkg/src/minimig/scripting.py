"""Directive scripts: the replayable text form of a migration session.

One command per line; declarations are addressed by dotted paths from the
model root, library entities by bare name:

    install CopyReplaceOperator(OtD=&, OtR=+) at oo
    produce src:Main.showName -> oo:MyPackage.MyDestination mode=auto
    map src:MsgBox => oo:MyPackage.MyDestination.log scope=oo:MyPackage.MyDestination
    rollback
    export oo -> exported

Choice-mode commands may carry pre-supplied answers (``choose=0,1``) so that
scripted runs stay headless.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import MigrationError
from .rule_system import ChoicePrompt, LookupMode
from .session import Session


class ScriptError(MigrationError):
    def __init__(self, line_no: int, line: str, message: str):
        super().__init__(f"line {line_no}: {message} (in: {line.strip()!r})")
        self.line_no = line_no


@dataclass
class ScriptReport:
    ok: bool = True
    lines: list[str] = field(default_factory=list)

    def emit(self, text: str) -> None:
        self.lines.append(text)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


_INSTALL = re.compile(r"^install\s+(?P<rule>\w+)(?:\((?P<params>[^)]*)\))?\s+at\s+(?P<ctx>\S+)$")
_PRODUCE = re.compile(r"^produce\s+(?P<src>\S+)\s+->\s+(?P<tgt>\S+)(?P<opts>(?:\s+\w+=\S+)*)$")
_MAP = re.compile(r"^map\s+(?P<src>\S+)\s+=>\s+(?P<tgt>\S+)\s+scope=(?P<scope>\S+)$")
_EXPORT = re.compile(r"^export\s+(?P<model>\w+)\s+->\s+(?P<dir>\S+)$")


def _parse_params(raw: Optional[str]) -> dict:
    params: dict = {}
    if not raw:
        return params
    for chunk in raw.split(","):
        if not chunk.strip():
            continue
        key, _, value = chunk.partition("=")
        value = value.strip()
        if value.lower() in ("true", "false"):
            params[key.strip()] = value.lower() == "true"
        else:
            params[key.strip()] = value
    return params


def _parse_opts(raw: str) -> dict:
    opts = {}
    for chunk in raw.split():
        key, _, value = chunk.partition("=")
        opts[key] = value
    return opts


class _ScriptedChooser:
    """Answers choice prompts from a pre-supplied list of indices."""

    def __init__(self, answers: list[int]):
        self.answers = list(answers)
        self.prompts: list[ChoicePrompt] = []

    def __call__(self, prompt: ChoicePrompt) -> int:
        self.prompts.append(prompt)
        if not self.answers:
            return 0
        return self.answers.pop(0)


def run_script(session: Session, text: str, default_mode: str = "auto",
               export_dir: Optional[Path] = None, report: Optional[ScriptReport] = None) -> ScriptReport:
    report = report or ScriptReport()
    export_dir = Path(export_dir) if export_dir else Path.cwd()
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            _run_command(session, line, default_mode, export_dir, report)
        except MigrationError as exc:
            report.ok = False
            report.emit(f"FAIL line {line_no}: {exc}")
            raise ScriptError(line_no, raw_line, str(exc)) from exc
    return report


def _run_command(session: Session, line: str, default_mode: str,
                 export_dir: Path, report: ScriptReport) -> None:
    if line == "rollback":
        if not session.engine.applied:
            raise MigrationError("nothing to roll back")
        txn = session.engine.applied[-1]
        session.engine.rollback(txn.id)
        report.emit(f"ok rollback txn {txn.id}")
        return

    match = _INSTALL.match(line)
    if match:
        installation = session.install(match["rule"], _parse_params(match["params"]), match["ctx"])
        report.emit(f"ok install {installation.rule.describe()} at {match['ctx']} (seq {installation.seq})")
        return

    match = _PRODUCE.match(line)
    if match:
        opts = _parse_opts(match["opts"])
        mode = LookupMode(opts.get("mode", default_mode))
        chooser = None
        if "choose" in opts:
            chooser = _ScriptedChooser([int(x) for x in opts["choose"].split(",") if x != ""])
            session.set_chooser(chooser)
        try:
            result = session.engine.produce(
                session.workspace.resolve_path(match["src"]),
                session.workspace.resolve_path(match["tgt"]),
                mode,
            )
        finally:
            if chooser is not None:
                session.set_chooser(None)
        report.emit(
            f"ok produce txn {result.txn_id}: +{len(result.created_nodes)} nodes, "
            f"{len(result.stubs_created)} stubs, {len(result.mappings)} mappings"
        )
        return

    match = _MAP.match(line)
    if match:
        result = session.engine.map(
            session.workspace.resolve_path(match["src"]),
            session.workspace.resolve_path(match["tgt"]),
            session.workspace.resolve_path(match["scope"]),
        )
        report.emit(
            f"ok map txn {result.txn_id}: {len(result.adapted)} adapted, "
            f"{len(result.stubs_removed)} stubs swept"
        )
        return

    match = _EXPORT.match(line)
    if match:
        out = export_dir / match["dir"]
        files = session.engine.export(match["model"], out)
        report.emit(f"ok export {match['model']} -> {', '.join(str(f) for f in files)}")
        return

    raise MigrationError(f"unrecognized command {line!r}")


def final_summary(session: Session, report: ScriptReport) -> None:
    """Append the unresolved census and validation summary per model."""
    from .frontends.dialect import validate
    from .meta_model import NodeRef

    for model_id in sorted(session.workspace.models):
        model = session.workspace.model(model_id)
        rows = session.engine.unresolved_report(NodeRef(model_id, model.root))
        violations = validate(model)
        report.emit(f"model {model_id}: {len(rows)} unresolved, {len(violations)} violations")
