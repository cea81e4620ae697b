import { ApiClient } from "./api.js";
import { AnnotationSession } from "./session.js";
import { TaskViewRenderer } from "./view.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8080";
  const user = params.get("user") ?? `guest-${Math.random().toString(36).slice(2, 8)}`;
  const batch = Number(params.get("batch") ?? "1");

  const api = new ApiClient(base, user);
  const session = new AnnotationSession(api, user);
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const campaigns = await api.listCampaigns();
  const campaign = campaigns.find((c) => c.open) ?? campaigns[0];
  if (!campaign) {
    root.textContent = "No campaigns on this server.";
    return;
  }
  document.title = `${campaign.title} — musekb`;
  await session.start(campaign.id, Math.min(Math.max(batch, 1), campaign.batch_count));
  new TaskViewRenderer(root, session, api).render();
}

boot().catch((err) => {
  const root = document.getElementById("app");
  if (root) root.textContent = `Could not reach the annotation service: ${err}`;
});
