// REST client for the migration session service. Every mutation the UI
// performs goes through here; `audit` records each call so tests can prove
// the client never edits models locally.

export interface Badges {
    stubRef: boolean;
    violation: boolean;
    unresolved: number;
}

export interface ApiNode {
    id: number;
    kind: string;
    name: string | null;
    declaration: boolean;
    badges: Badges;
    children: ApiNode[];
    library?: ApiNode[]; // root node only: the model's library declarations
}

export interface ModelInfo {
    id: string;
    dialect: string;
    role: "source" | "target";
    root: number;
    violations: number;
    unresolved: number;
}

export interface ChoicePromptInfo {
    kind: "rule" | "argument";
    subject: string;
    options: string[];
}

export interface DirectiveOutcome {
    status: "applied" | "pendingChoice" | "abandoned";
    token?: string;
    prompt?: ChoicePromptInfo;
    txn?: number;
    directive?: string;
    log?: string[];
    stubsCreated?: { model: string; node: number }[];
    adapted?: { model: string; node: number }[];
}

export interface ContextInfo {
    context: string;
    mappings: { source: string; target: string; scope: string; origin: string }[];
    unresolved: { node: number; stub: number; foreign: string }[];
    rules: {
        productive: { rule: string; context: string }[];
        adaptive: { rule: string; context: string }[];
    };
}

export interface TxnInfo {
    txn: number;
    label: string;
    status: string;
}

export class ApiError extends Error {
    constructor(public status: number, public body: unknown) {
        super(`API error ${status}`);
    }
}

export class ApiClient {
    audit: string[] = [];

    constructor(private base: string, private fetchImpl: typeof fetch = globalThis.fetch.bind(globalThis)) {}

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        this.audit.push(`${method} ${path}`);
        const response = await this.fetchImpl(this.base + path, {
            method,
            headers: body === undefined ? undefined : { "Content-Type": "application/json" },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        const text = await response.text();
        const parsed = text ? JSON.parse(text) : null;
        if (!response.ok) {
            throw new ApiError(response.status, parsed);
        }
        return parsed as T;
    }

    listModels(): Promise<ModelInfo[]> {
        return this.request("GET", "/models");
    }

    tree(modelId: string): Promise<ApiNode> {
        return this.request("GET", `/models/${modelId}/tree`);
    }

    nodeSource(modelId: string, nodeId: number): Promise<{ text: string }> {
        return this.request("GET", `/nodes/${modelId}/${nodeId}/source`);
    }

    contextInfo(modelId: string, nodeId: number): Promise<ContextInfo> {
        return this.request("GET", `/contexts/${modelId}/${nodeId}/info`);
    }

    applicableRules(source: string, target: string) {
        const query = `source=${encodeURIComponent(source)}&target=${encodeURIComponent(target)}`;
        return this.request<{ candidates: { rule: string }[] }>("GET", `/rules/applicable?${query}`);
    }

    produce(source: string, target: string, mode: string): Promise<DirectiveOutcome> {
        return this.request("POST", "/directives/produce", { source, target, mode });
    }

    map(source: string, target: string, scope: string): Promise<DirectiveOutcome> {
        return this.request("POST", "/directives/map", { source, target, scope });
    }

    answer(token: string, choice: number): Promise<DirectiveOutcome> {
        return this.request("POST", "/directives/answer", { token, choice });
    }

    cancelChoice(token: string): Promise<DirectiveOutcome> {
        return this.request("POST", "/directives/answer", { token, cancel: true });
    }

    rollback(): Promise<{ status: string; txn: number }> {
        return this.request("POST", "/rollback", {});
    }

    exportModel(modelId: string): Promise<{ model: string; text: string }> {
        return this.request("POST", "/export", { model: modelId });
    }

    transactions(): Promise<{ stack: TxnInfo[] }> {
        return this.request("GET", "/transactions");
    }

    log(since: number): Promise<{ lines: string[]; next: number }> {
        return this.request("GET", `/log?since=${since}`);
    }
}
