// Spawns the real migration service for end-to-end tests.

import { ChildProcess, spawn } from "node:child_process";
import { fileURLToPath } from "node:url";
import path from "node:path";

const here = path.dirname(fileURLToPath(import.meta.url));
export const repoRoot = path.resolve(here, "..", "..");

export interface RunningServer {
    base: string;
    stop(): void;
}

let nextPort = 8791;

export async function startServer(): Promise<RunningServer> {
    const port = nextPort++;
    const manifest = path.join(repoRoot, "tests", "fixtures", "showname", "manifest.json");
    const child: ChildProcess = spawn(
        "python3",
        ["-m", "minimig.cli", "--manifest", manifest, "--serve", String(port)],
        {
            cwd: repoRoot,
            stdio: ["ignore", "inherit", "inherit"],
            env: { ...process.env, PYTHONPATH: path.join(repoRoot, "src") },
        },
    );
    const base = `http://127.0.0.1:${port}`;
    for (let attempt = 0; attempt < 100; attempt++) {
        try {
            const response = await fetch(`${base}/models`);
            if (response.ok) {
                return { base, stop: () => child.kill("SIGTERM") };
            }
        } catch {
            // not up yet
        }
        await new Promise((resolve) => setTimeout(resolve, 150));
    }
    child.kill("SIGTERM");
    throw new Error("migration service did not come up");
}

export async function waitFor(check: () => boolean, label: string, timeoutMs = 15000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
        if (check()) return;
        await new Promise((resolve) => setTimeout(resolve, 25));
    }
    throw new Error(`timed out waiting for ${label}`);
}
