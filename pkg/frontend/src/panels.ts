// Feedback area: Log, Rules and Stubs & Mappings tabs, plus the source
// fragment of the last selected node. Tab contents follow the selection.

import { ApiClient, ContextInfo } from "./api";
import { NodeAddress } from "./tree";

const TABS = ["Log", "Rules", "Stubs & Mappings"] as const;
type TabName = (typeof TABS)[number];

export class FeedbackPanels {
    private logCursor = 0;
    private active: TabName = "Log";
    private bodies = new Map<TabName, HTMLElement>();
    private sourceView: HTMLElement;

    constructor(private container: HTMLElement, private api: ApiClient) {
        const bar = document.createElement("div");
        bar.className = "tab-bar";
        for (const name of TABS) {
            const button = document.createElement("button");
            button.className = "tab-button";
            button.dataset.tab = name;
            button.textContent = name;
            button.onclick = () => this.activate(name);
            bar.appendChild(button);
        }
        container.appendChild(bar);
        for (const name of TABS) {
            const body = document.createElement("div");
            body.className = "tab-body";
            body.dataset.tabBody = name;
            container.appendChild(body);
            this.bodies.set(name, body);
        }
        this.sourceView = document.createElement("pre");
        this.sourceView.className = "source-view";
        container.appendChild(this.sourceView);
        this.activate("Log");
    }

    private activate(name: TabName): void {
        this.active = name;
        for (const [tab, body] of this.bodies) {
            body.style.display = tab === name ? "block" : "none";
        }
        this.container.querySelectorAll<HTMLButtonElement>(".tab-button").forEach((button) => {
            button.classList.toggle("active", button.dataset.tab === name);
        });
    }

    async refreshLog(): Promise<void> {
        const { lines, next } = await this.api.log(this.logCursor);
        this.logCursor = next;
        const body = this.bodies.get("Log")!;
        for (const line of lines) {
            const row = document.createElement("div");
            row.className = line.startsWith("failed") ? "log-line failed" : "log-line";
            row.textContent = line;
            body.appendChild(row);
        }
    }

    async showSelection(address: NodeAddress): Promise<void> {
        const { text } = await this.api.nodeSource(address.model, address.node);
        this.sourceView.textContent = text;
        const info = await this.api.contextInfo(address.model, address.node);
        this.renderRules(info);
        this.renderStubsAndMappings(info);
    }

    private renderRules(info: ContextInfo): void {
        const body = this.bodies.get("Rules")!;
        body.innerHTML = "";
        const left = document.createElement("div");
        left.className = "rules-productive";
        left.innerHTML = "<h4>Productive</h4>";
        for (const entry of info.rules.productive) {
            const row = document.createElement("div");
            row.className = "rule-row";
            row.textContent = `${entry.rule} @ ${entry.context}`;
            left.appendChild(row);
        }
        const right = document.createElement("div");
        right.className = "rules-adaptive";
        right.innerHTML = "<h4>Adaptive</h4>";
        for (const entry of info.rules.adaptive) {
            const row = document.createElement("div");
            row.className = "rule-row";
            row.textContent = `${entry.rule} @ ${entry.context}`;
            right.appendChild(row);
        }
        body.appendChild(left);
        body.appendChild(right);
    }

    private renderStubsAndMappings(info: ContextInfo): void {
        const body = this.bodies.get("Stubs & Mappings")!;
        body.innerHTML = "";
        const stubs = document.createElement("div");
        stubs.className = "stub-list";
        stubs.innerHTML = "<h4>Unresolved references</h4>";
        for (const row of info.unresolved) {
            const line = document.createElement("div");
            line.className = "stub-row";
            line.dataset.node = String(row.node);
            line.textContent = `#${row.node} waits for ${row.foreign}`;
            stubs.appendChild(line);
        }
        const mappings = document.createElement("div");
        mappings.className = "mapping-list";
        mappings.innerHTML = "<h4>Mappings</h4>";
        for (const row of info.mappings) {
            const line = document.createElement("div");
            line.className = "mapping-row";
            line.textContent = `${row.source} => ${row.target} @ ${row.scope} [${row.origin}]`;
            mappings.appendChild(line);
        }
        body.appendChild(stubs);
        body.appendChild(mappings);
    }
}
