// Spawns the Python fixture service and hands back its URL and tokens.
// The first stdout line is a JSON handshake; everything after is uvicorn.

import { spawn, type ChildProcess } from "node:child_process";
import path from "node:path";
import { fileURLToPath } from "node:url";

const __dirname = path.dirname(fileURLToPath(import.meta.url));

export interface Fixture {
    url: string;
    tokens: { za: string; zb: string; admin: string };
    stop: () => void;
}

export async function startFixture(): Promise<Fixture> {
    const proc: ChildProcess = spawn("python3", [path.join(__dirname, "fixture_server.py")], {
        stdio: ["ignore", "pipe", "inherit"],
    });
    const handshake = await new Promise<string>((resolve, reject) => {
        let buffer = "";
        const timer = setTimeout(() => reject(new Error("fixture server did not start")), 20000);
        proc.stdout!.on("data", (chunk: Buffer) => {
            buffer += chunk.toString();
            const newline = buffer.indexOf("\n");
            if (newline >= 0) {
                clearTimeout(timer);
                resolve(buffer.slice(0, newline));
            }
        });
        proc.on("exit", (code) => {
            clearTimeout(timer);
            reject(new Error(`fixture server exited early with code ${code}`));
        });
    });
    const parsed = JSON.parse(handshake);
    await waitReady(parsed.url, parsed.tokens.za);
    return { url: parsed.url, tokens: parsed.tokens, stop: () => proc.kill() };
}

async function waitReady(url: string, token: string): Promise<void> {
    for (let attempt = 0; attempt < 100; attempt++) {
        try {
            const response = await fetch(`${url}/cases`, {
                headers: { Authorization: `Bearer ${token}` },
            });
            if (response.ok) return;
        } catch {
            // still booting
        }
        await new Promise((resolve) => setTimeout(resolve, 100));
    }
    throw new Error("fixture server never became ready");
}

/** Polls until the condition stops throwing; for UI updates driven by
 *  async handlers the test cannot await directly. */
export async function waitFor(check: () => void, timeoutMs = 5000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    let lastError: unknown;
    while (Date.now() < deadline) {
        try {
            check();
            return;
        } catch (error) {
            lastError = error;
        }
        await new Promise((resolve) => setTimeout(resolve, 25));
    }
    throw lastError;
}
