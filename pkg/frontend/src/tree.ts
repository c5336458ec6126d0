// Model tree panel: expandable nodes, badges, drag-and-drop of declarations.
// The rendered tree is exactly the /models/{id}/tree payload; no client-side
// filtering or recomputation.

import { ApiNode, ModelInfo } from "./api";

export interface NodeAddress {
    model: string;
    node: number;
    path: string;
    label: string;
}

export interface TreeCallbacks {
    onSelect(address: NodeAddress): void;
    onDrop(source: NodeAddress, target: NodeAddress): void;
    dragSource(): NodeAddress | null;
    setDragSource(address: NodeAddress | null): void;
}

export class TreePanel {
    private expanded = new Set<number>();
    private tree: ApiNode | null = null;

    constructor(
        private container: HTMLElement,
        readonly model: ModelInfo,
        private callbacks: TreeCallbacks,
    ) {}

    show(tree: ApiNode): void {
        const firstTime = this.tree === null;
        this.tree = tree;
        this.expanded.add(tree.id);
        if (firstTime) {
            const expandDeclarations = (node: ApiNode) => {
                if (node.declaration && node.children.length) {
                    this.expanded.add(node.id);
                }
                node.children.forEach(expandDeclarations);
            };
            expandDeclarations(tree);
        }
        this.render();
    }

    private renderLibrary(library: ApiNode[]): void {
        const header = document.createElement("div");
        header.className = "library-header";
        header.textContent = "library";
        this.container.appendChild(header);
        for (const entry of library) {
            this.renderNode(entry, `${this.model.id}:`, 1, false);
        }
    }

    private render(): void {
        if (!this.tree) return;
        this.container.innerHTML = "";
        const title = document.createElement("div");
        title.className = "panel-title";
        title.textContent = `${this.model.id} (${this.model.dialect}, ${this.model.role})`;
        this.container.appendChild(title);
        this.renderNode(this.tree, `${this.model.id}:`, 0, true);
        if (this.tree.library?.length) {
            this.renderLibrary(this.tree.library);
        }
    }

    private renderNode(node: ApiNode, parentPath: string, depth: number, isRoot: boolean): void {
        const path = isRoot ? parentPath : this.joinPath(parentPath, node);
        const row = document.createElement("div");
        row.className = "tree-node";
        row.dataset.model = this.model.id;
        row.dataset.node = String(node.id);
        row.dataset.path = path;
        row.style.paddingLeft = `${depth * 14}px`;

        const toggle = document.createElement("span");
        toggle.className = "toggle";
        toggle.textContent = node.children.length ? (this.expanded.has(node.id) ? "▾" : "▸") : "·";
        toggle.onclick = (event) => {
            event.stopPropagation();
            if (!this.expanded.delete(node.id)) {
                this.expanded.add(node.id);
            }
            this.render();
        };
        row.appendChild(toggle);

        const label = document.createElement("span");
        label.className = `label kind-${node.kind}`;
        label.textContent = node.name ? `${node.name} : ${node.kind}` : node.kind;
        row.appendChild(label);

        if (node.declaration && node.badges.unresolved > 0) {
            const badge = document.createElement("span");
            badge.className = "badge unresolved";
            badge.textContent = `${node.badges.unresolved} unresolved`;
            row.appendChild(badge);
        }
        if (node.badges.stubRef) {
            row.classList.add("stub-ref");
        }
        if (node.badges.violation) {
            const badge = document.createElement("span");
            badge.className = "badge violation";
            badge.textContent = "!";
            row.appendChild(badge);
        }

        const address: NodeAddress = {
            model: this.model.id,
            node: node.id,
            path,
            label: node.name ?? node.kind,
        };

        row.onclick = () => this.callbacks.onSelect(address);

        if (node.declaration && node.name !== null && this.model.role === "source") {
            row.draggable = true;
            row.addEventListener("dragstart", (event: DragEvent) => {
                this.callbacks.setDragSource(address);
                event.dataTransfer?.setData("text/plain", path);
            });
        }
        if (node.declaration && this.model.role === "target") {
            row.addEventListener("dragover", (event) => event.preventDefault());
            row.addEventListener("drop", (event: DragEvent) => {
                event.preventDefault();
                const source = this.callbacks.dragSource();
                if (source && source.model !== this.model.id) {
                    this.callbacks.onDrop(source, address);
                }
                this.callbacks.setDragSource(null);
            });
        }

        this.container.appendChild(row);
        if (this.expanded.has(node.id)) {
            for (const child of node.children) {
                this.renderNode(child, path, depth + 1, false);
            }
        }
    }

    private joinPath(parentPath: string, node: ApiNode): string {
        const segment = node.name ?? `#${node.id}`;
        return parentPath.endsWith(":") ? parentPath + segment : `${parentPath}.${segment}`;
    }

    nodeCount(): number {
        return this.container.querySelectorAll(".tree-node").length;
    }
}
