// Scripted end-to-end session against the real annotation service: one user
// tags an item, a second votes on the first's annotation, toggles the vote,
// and posts a comment; the service export must then contain exactly those
// contributions with the toggled tallies.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession } from "../src/session.js";

const PORT = 8948;
const BASE = `http://127.0.0.1:${PORT}`;

let dataDir: string;
let server: ChildProcess | undefined;

function run(command: string, args: string[]): void {
  const result = spawnSync(command, args, { encoding: "utf-8" });
  if (result.status !== 0) {
    throw new Error(`${command} ${args.join(" ")} failed:\n${result.stdout}\n${result.stderr}`);
  }
}

const MAKE_STORE = `
import sys
from datetime import datetime, timedelta, timezone
from musekb.campaign import CampaignStore
from musekb.catalog import load_dataset

data_dir = sys.argv[1]
records = load_dataset(data_dir + "/records.csv").records
store = CampaignStore()
now = datetime.now(timezone.utc)
store.create_campaign(
    "e2e",
    title="E2E campaign",
    instructions="scripted",
    item_ids=[r.europeana_id for r in records],
    start=now - timedelta(hours=1),
    days=365,
    batch_count=2,
)
store.save(data_dir + "/store.json")
`;

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/campaigns`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("service never came up");
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "musekb-e2e-"));
  const raw = join(dataDir, "raw.csv");
  run("musekb", ["synth", "--tracks", "12", "--seed", "5", "--output", raw]);
  run("musekb", ["--data-dir", dataDir, "ingest", "--input", raw]);
  run("python3", ["-c", MAKE_STORE, dataDir]);
  server = spawn("musekb", ["--data-dir", dataDir, "serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForService();
}, 40_000);

afterAll(() => {
  server?.kill("SIGTERM");
  rmSync(dataDir, { recursive: true, force: true });
});

describe("scripted annotator session", () => {
  it("produces an export containing exactly the scripted contributions", async () => {
    const bobApi = new ApiClient(BASE, "bob");
    const bob = new AnnotationSession(bobApi, "bob");
    await bob.start("e2e", 1);
    expect(bob.progress.total).toBeGreaterThan(0);

    // bob tags the second item of the batch
    bob.next();
    const bobItem = bob.currentItem.item_id;
    await bob.submitTag("rock", "genre");
    expect(bob.notice).toBeNull();
    const bobAnnotation = bob.currentItem.annotations[0]!;
    expect(bobAnnotation.id).toMatch(/^ann-/);

    // alice tags the first item, votes on bob's annotation, toggles, comments
    const aliceApi = new ApiClient(BASE, "alice");
    const alice = new AnnotationSession(aliceApi, "alice");
    await alice.start("e2e", 1);
    const aliceItem = alice.currentItem.item_id;
    expect(aliceItem).not.toBe(bobItem);
    await alice.submitTag("jazz", "genre");
    expect(alice.notice).toBeNull();

    alice.next();
    const theirRow = alice.currentItem.annotations.find((a) => a.creator === "bob")!;
    expect(alice.canVote(theirRow)).toBe(true);
    await alice.toggleVote(theirRow.id, "up");
    expect([theirRow.upvotes, theirRow.downvotes, theirRow.my_vote]).toEqual([1, 0, "up"]);
    await alice.toggleVote(theirRow.id, "down");
    expect([theirRow.upvotes, theirRow.downvotes, theirRow.my_vote]).toEqual([0, 1, "down"]);

    alice.previous();
    alice.draftComment = "scripted session says hello";
    await alice.submitComment();
    expect(alice.draftComment).toBe("");

    // the export holds exactly these contributions with the final tallies
    const snapshot = await aliceApi.exportCampaign("e2e");
    expect(snapshot.annotations).toHaveLength(2);
    const byCreator = new Map(snapshot.annotations.map((a) => [a.creator, a]));
    expect(byCreator.get("bob")).toEqual({
      item_id: bobItem,
      category: "genre",
      term_id: "rock",
      upvotes: 0,
      downvotes: 1,
      creator: "bob",
    });
    expect(byCreator.get("alice")).toEqual({
      item_id: aliceItem,
      category: "genre",
      term_id: "jazz",
      upvotes: 0,
      downvotes: 0,
      creator: "alice",
    });
    expect(snapshot.comments).toHaveLength(1);
    expect(snapshot.comments[0]).toMatchObject({
      item_id: aliceItem,
      author: "alice",
      text: "scripted session says hello",
    });

    // UI-visible tallies mirror the service tallies after every ack
    const refreshed = new AnnotationSession(new ApiClient(BASE, "alice"), "alice");
    await refreshed.start("e2e", 1);
    refreshed.next();
    const mirrored = refreshed.currentItem.annotations.find((a) => a.creator === "bob")!;
    expect([mirrored.upvotes, mirrored.downvotes, mirrored.my_vote]).toEqual([0, 1, "down"]);
  }, 30_000);

  it("keeps self-votes unreachable end to end", async () => {
    const bobApi = new ApiClient(BASE, "bob");
    const bob = new AnnotationSession(bobApi, "bob");
    await bob.start("e2e", 1);
    bob.next();
    const own = bob.currentItem.annotations.find((a) => a.creator === "bob")!;
    expect(bob.canVote(own)).toBe(false); // the button is disabled on this row
    const before = [own.upvotes, own.downvotes];
    await bob.toggleVote(own.id, "up"); // controller guard: no request, no change
    expect([own.upvotes, own.downvotes]).toEqual(before);
  }, 30_000);

  it("reports the leaderboard through the service", async () => {
    const api = new ApiClient(BASE, "alice");
    const rows = await api.leaderboard("e2e");
    const points = new Map(rows.map((r) => [r.user, r.points]));
    // alice: 1 annotation; bob: 1 annotation - 1 received downvote
    expect(points.get("alice")).toBe(1);
    expect(points.get("bob")).toBe(0);
  }, 30_000);
});
