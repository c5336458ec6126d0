// Application wiring: one tree panel per model, the feedback area, the
// toolbar. Every mutation round-trips through the API; after a directive
// completes the trees and panels are re-fetched (poll-on-change, no
// streaming). While a directive is in flight, gestures are ignored.

import { ApiClient, ApiNode, DirectiveOutcome, ModelInfo } from "./api";
import { ChoiceDialog, DirectiveDialog } from "./dialog";
import { NodeAddress, TreePanel } from "./tree";
import { FeedbackPanels } from "./panels";

export class App {
    panels: TreePanel[] = [];
    feedback!: FeedbackPanels;
    private drag: NodeAddress | null = null;
    private busy = false;
    private models: ModelInfo[] = [];
    private trees = new Map<string, ApiNode>();
    private rollbackButton!: HTMLButtonElement;
    private banner!: HTMLElement;

    constructor(private root: HTMLElement, private api: ApiClient) {}

    async init(): Promise<void> {
        this.root.innerHTML = `
          <div class="toolbar">
            <span class="app-title">minimig</span>
            <button data-action="rollback" disabled>Rollback</button>
            <span class="banner" style="display:none"></span>
          </div>
          <div class="panels">
            <div class="source-column"></div>
            <div class="target-column"></div>
          </div>
          <div class="feedback"></div>`;
        this.rollbackButton = this.root.querySelector<HTMLButtonElement>("[data-action=rollback]")!;
        this.rollbackButton.onclick = () => void this.rollback();
        this.banner = this.root.querySelector<HTMLElement>(".banner")!;
        this.feedback = new FeedbackPanels(this.root.querySelector<HTMLElement>(".feedback")!, this.api);
        try {
            this.models = await this.api.listModels();
        } catch (error) {
            this.banner.textContent = "cannot reach the migration service";
            this.banner.style.display = "inline";
            throw error;
        }
        const callbacks = {
            onSelect: (address: NodeAddress) => void this.feedback.showSelection(address),
            onDrop: (source: NodeAddress, target: NodeAddress) => void this.handleDrop(source, target),
            dragSource: () => this.drag,
            setDragSource: (address: NodeAddress | null) => {
                this.drag = address;
            },
        };
        for (const model of this.models) {
            const column = this.root.querySelector<HTMLElement>(
                model.role === "source" ? ".source-column" : ".target-column",
            )!;
            const holder = document.createElement("div");
            holder.className = "tree-panel";
            holder.dataset.model = model.id;
            column.appendChild(holder);
            this.panels.push(new TreePanel(holder, model, callbacks));
        }
        await this.refresh();
    }

    async refresh(): Promise<void> {
        for (const panel of this.panels) {
            const tree = await this.api.tree(panel.model.id);
            this.trees.set(panel.model.id, tree);
            panel.show(tree);
        }
        const { stack } = await this.api.transactions();
        this.rollbackButton.disabled = stack.length === 0;
        await this.feedback.refreshLog();
    }

    scopeOptionsFor(target: NodeAddress): string[] {
        // the drop target's declaration chain, innermost first, from the tree
        const tree = this.trees.get(target.model);
        const options: string[] = [];
        if (tree) {
            const trail: { node: ApiNode; path: string }[] = [];
            const walk = (node: ApiNode, path: string, isRoot: boolean): boolean => {
                const here = isRoot
                    ? `${target.model}:`
                    : path.endsWith(":")
                      ? path + (node.name ?? `#${node.id}`)
                      : `${path}.${node.name ?? `#${node.id}`}`;
                trail.push({ node, path: here });
                if (node.id === target.node) return true;
                for (const child of node.children) {
                    if (walk(child, here, false)) return true;
                }
                trail.pop();
                return false;
            };
            if (walk(tree, `${target.model}:`, true)) {
                for (let i = trail.length - 1; i >= 0; i--) {
                    if (trail[i].node.declaration) options.push(trail[i].path);
                }
            }
        }
        if (!options.length) options.push(`${target.model}:`);
        return options;
    }

    async handleDrop(source: NodeAddress, target: NodeAddress): Promise<void> {
        if (this.busy) return;
        const decision = await new DirectiveDialog().show(source, target, this.scopeOptionsFor(target));
        if (!decision) return;
        this.busy = true;
        try {
            let outcome: DirectiveOutcome =
                decision.directive === "produce"
                    ? await this.api.produce(source.path, target.path, decision.mode)
                    : await this.api.map(source.path, target.path, decision.scope);
            while (outcome.status === "pendingChoice") {
                const picked = await new ChoiceDialog().show(outcome.prompt!);
                outcome =
                    picked === null
                        ? await this.api.cancelChoice(outcome.token!)
                        : await this.api.answer(outcome.token!, picked);
            }
        } finally {
            this.busy = false;
            await this.refresh();
        }
    }

    async rollback(): Promise<void> {
        if (this.busy) return;
        this.busy = true;
        try {
            await this.api.rollback();
        } finally {
            this.busy = false;
            await this.refresh();
        }
    }

    isBusy(): boolean {
        return this.busy;
    }
}

export function mount(root: HTMLElement, baseUrl: string): App {
    const app = new App(root, new ApiClient(baseUrl));
    void app.init();
    return app;
}
