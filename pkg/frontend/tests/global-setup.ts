// Builds a 1,000-entry archive through the CLI and serves it for the
// live-server contract tests. Everything else runs fine without it, so a
// missing Python toolchain only fails the live suite, loudly.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { TestProject } from "vitest/node";

const PYTHON = process.env.HASHCUBE_PYTHON ?? "python3";

function run(args: string[]): Promise<void> {
  return new Promise((resolve, reject) => {
    const child = spawn(PYTHON, ["-m", "hashcube.cli", ...args], { stdio: "inherit" });
    child.on("exit", (code) =>
      code === 0 ? resolve() : reject(new Error(`hashcube ${args[0]} exited ${code}`)),
    );
    child.on("error", reject);
  });
}

async function waitForServer(baseUrl: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 60_000;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early with code ${child.exitCode}`);
    }
    try {
      const response = await fetch(`${baseUrl}/api/hierarchy`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("server did not become ready within 60s");
}

export default async function setup(project: TestProject): Promise<() => void> {
  const storeDir = join(mkdtempSync(join(tmpdir(), "hashcube-ui-")), "store");
  // seed 79 gives the synthetic clusters forest label bundles, so the
  // forest Some-query used by the live tests has real matches
  await run([
    "ingest",
    "--synthetic", "1000",
    "--clusters", "4",
    "--dim", "16",
    "--with-bands",
    "--seed", "79",
    "--out", storeDir,
  ]);

  const port = 8400 + Math.floor(Math.random() * 400);
  const baseUrl = `http://127.0.0.1:${port}`;
  const server = spawn(
    PYTHON,
    ["-m", "hashcube.cli", "serve", "--store", storeDir, "--port", String(port)],
    { stdio: "inherit" },
  );
  await waitForServer(baseUrl, server);

  project.provide("baseUrl", baseUrl);
  return () => {
    server.kill();
  };
}

declare module "vitest" {
  export interface ProvidedContext {
    baseUrl: string;
  }
}
