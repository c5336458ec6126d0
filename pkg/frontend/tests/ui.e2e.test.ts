// Scripted browser-session tests: the showName drag-drop flow against the
// real service, in automatic, multiple-choice and debug lookup modes. The
// final API-reported model must equal the CLI-produced golden file.

import { readFileSync } from "node:fs";
import path from "node:path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { App } from "../src/app";
import { RunningServer, repoRoot, startServer, waitFor } from "./server";

const golden = readFileSync(
    path.join(repoRoot, "tests", "fixtures", "showname", "golden.moo"),
    "utf-8",
);

let server: RunningServer;
let api: ApiClient;
let app: App;

beforeEach(async () => {
    server = await startServer();
    document.body.innerHTML = '<div id="app"></div>';
    api = new ApiClient(server.base);
    app = new App(document.getElementById("app")!, api);
    await app.init();
});

afterEach(() => {
    server.stop();
    document.body.innerHTML = "";
});

function row(model: string, path: string): HTMLElement {
    const found = document.querySelector<HTMLElement>(
        `.tree-node[data-model="${model}"][data-path="${path}"]`,
    );
    if (!found) throw new Error(`no tree row for ${model} ${path}`);
    return found;
}

function dragAndDrop(sourcePath: string, targetPath: string): void {
    row("src", sourcePath).dispatchEvent(new Event("dragstart"));
    row("oo", targetPath).dispatchEvent(new Event("drop"));
}

function directiveDialog(): HTMLElement {
    const dialog = document.querySelector<HTMLElement>('[data-dialog="directive"]');
    if (!dialog) throw new Error("directive dialog not shown");
    return dialog;
}

function submitDirective(directive: "produce" | "map", mode = "auto", scope?: string): void {
    const dialog = directiveDialog();
    dialog.querySelector<HTMLInputElement>(`input[value="${directive}"]`)!.checked = true;
    dialog.querySelector<HTMLSelectElement>("select[name=mode]")!.value = mode;
    if (scope) {
        dialog.querySelector<HTMLSelectElement>("select[name=scope]")!.value = scope;
    }
    dialog.querySelector<HTMLButtonElement>("[data-action=ok]")!.click();
}

async function settled(): Promise<void> {
    await waitFor(
        () =>
            !document.querySelector(".overlay") &&
            !document.querySelector('[data-dialog="choice"]'),
        "directive to settle",
    );
    // refresh() runs after the overlay closes; wait for the audit to quiesce
    let size = -1;
    await waitFor(() => {
        const now = api.audit.length;
        const stable = now === size;
        size = now;
        return stable;
    }, "refresh to finish", 15000);
}

async function answerChoices(picker: (options: string[]) => number): Promise<number> {
    let prompts = 0;
    await waitFor(
        () => app.isBusy() || document.querySelector('[data-dialog="choice"]') !== null,
        "directive to start",
    );
    for (;;) {
        await waitFor(
            () => document.querySelector('[data-dialog="choice"]') !== null || !app.isBusy(),
            "choice dialog or completion",
        );
        const dialog = document.querySelector<HTMLElement>('[data-dialog="choice"]');
        if (!dialog) return prompts;
        prompts += 1;
        const options = Array.from(
            dialog.querySelectorAll<HTMLButtonElement>(".choice-option"),
        ).map((button) => button.textContent ?? "");
        const index = picker(options);
        dialog.querySelectorAll<HTMLButtonElement>(".choice-option")[index]!.click();
        await new Promise((resolve) => setTimeout(resolve, 50));
    }
}

const DESTINATION = "oo:MyPackage.MyDestination";

describe("showName drag-drop flow", () => {
    it("renders both models straight from the tree payload", async () => {
        const srcTree = await api.tree("src");
        const payloadIds = new Set<number>();
        const declarationIds = new Set<number>();
        const collect = (node: any) => {
            payloadIds.add(node.id);
            if (node.declaration) declarationIds.add(node.id);
            node.children.forEach(collect);
        };
        collect(srcTree);
        (srcTree.library ?? []).forEach(collect);

        const rendered = Array.from(
            document.querySelectorAll<HTMLElement>('.tree-node[data-model="src"]'),
        ).map((element) => Number(element.dataset.node));
        // nothing fabricated client-side, and every declaration is on screen
        for (const id of rendered) expect(payloadIds.has(id)).toBe(true);
        for (const id of declarationIds) expect(rendered).toContain(id);

        expect(row("src", "src:Main.showName").textContent).toContain("showName");
        expect(row("src", "src:MsgBox").textContent).toContain("MsgBox");
        expect(row("oo", `${DESTINATION}.log`).textContent).toContain("log");
    });

    it("migrates showName in automatic mode and matches the golden export", async () => {
        dragAndDrop("src:Main.showName", DESTINATION);
        submitDirective("produce", "auto");
        await settled();

        // badge: the produced method reports its two unresolved references
        const produced = row("oo", `${DESTINATION}.showName`);
        expect(produced.textContent).toContain("2 unresolved");
        expect(app.panels.length).toBe(2);

        dragAndDrop("src:MsgBox", `${DESTINATION}.log`);
        submitDirective("map", "auto", DESTINATION);
        await settled();

        dragAndDrop("src:Main.name", DESTINATION);
        submitDirective("produce", "auto");
        await settled();

        const exported = await api.exportModel("oo");
        expect(exported.text).toBe(golden);

        // every model mutation went through a directive endpoint
        const mutations = api.audit.filter((entry) => entry.startsWith("POST"));
        expect(mutations).toEqual([
            "POST /directives/produce",
            "POST /directives/map",
            "POST /directives/produce",
            "POST /export",
        ]);
    });

    it("migrates in multiple-choice mode with one prompt per directive", async () => {
        dragAndDrop("src:Main.showName", DESTINATION);
        submitDirective("produce", "choice");
        const prompts = await answerChoices((options) => {
            expect(options).toEqual(["CopyAsStaticMethod", "AnyCopy"]);
            return 0;
        });
        expect(prompts).toBe(1);
        await settled();

        dragAndDrop("src:MsgBox", `${DESTINATION}.log`);
        submitDirective("map", "auto", DESTINATION);
        await settled();

        dragAndDrop("src:Main.name", DESTINATION);
        submitDirective("produce", "choice");
        await answerChoices(() => 0);
        await settled();

        const exported = await api.exportModel("oo");
        expect(exported.text).toBe(golden);
    });

    it("prompts exactly six times for the produce in debug mode", async () => {
        dragAndDrop("src:Main.showName", DESTINATION);
        submitDirective("produce", "debug");
        const prompts = await answerChoices(() => 0);
        expect(prompts).toBe(6);
        await settled();
        expect(row("oo", `${DESTINATION}.showName`).textContent).toContain("showName");
    });

    it("cancelling the gesture issues no directive", async () => {
        const before = api.audit.filter((entry) => entry.startsWith("POST")).length;
        dragAndDrop("src:Main.showName", DESTINATION);
        directiveDialog().querySelector<HTMLButtonElement>("[data-action=cancel]")!.click();
        await waitFor(() => !document.querySelector(".overlay"), "dialog to close");
        expect(api.audit.filter((entry) => entry.startsWith("POST")).length).toBe(before);
    });

    it("abandoning a pending choice leaves the model unchanged", async () => {
        const before = JSON.stringify(await api.tree("oo"));
        dragAndDrop("src:Main.showName", DESTINATION);
        submitDirective("produce", "choice");
        await waitFor(() => document.querySelector('[data-dialog="choice"]') !== null, "choice dialog");
        document
            .querySelector<HTMLElement>('[data-dialog="choice"]')!
            .querySelector<HTMLButtonElement>("[data-action=cancel]")!
            .click();
        await settled();
        expect(JSON.stringify(await api.tree("oo"))).toBe(before);
        const { stack } = await api.transactions();
        expect(stack.length).toBe(0);
    });

    it("enables the rollback button only when the stack is non-empty", async () => {
        const button = document.querySelector<HTMLButtonElement>("[data-action=rollback]")!;
        expect(button.disabled).toBe(true);
        dragAndDrop("src:Main.showName", DESTINATION);
        submitDirective("produce", "auto");
        await settled();
        expect(button.disabled).toBe(false);
        button.click();
        await waitFor(() => button.disabled, "rollback to disable the button");
        const { stack } = await api.transactions();
        expect(stack.length).toBe(0);
    });

    it("shows feedback tabs for the selected context", async () => {
        dragAndDrop("src:Main.showName", DESTINATION);
        submitDirective("produce", "auto");
        await settled();

        row("oo", DESTINATION).click();
        await waitFor(
            () => document.querySelectorAll(".stub-row").length === 2,
            "stub rows for the selection",
        );
        const mappingRows = Array.from(document.querySelectorAll(".mapping-row"));
        expect(mappingRows.some((line) => line.textContent?.includes("ProduceAuto"))).toBe(true);
        const ruleRows = Array.from(document.querySelectorAll(".rule-row"));
        expect(ruleRows.some((line) => line.textContent?.includes("CopyAsStaticMethod"))).toBe(true);
        const logLines = Array.from(document.querySelectorAll(".log-line"));
        expect(logLines.some((line) => line.textContent?.includes("produce"))).toBe(true);
    });
});
