import type { AnnotationSession } from "./session.js";
import type { Api } from "./api.js";
import type { AnnotationView, Category, LeaderboardRow } from "./types.js";
import { CATEGORIES } from "./types.js";

const CATEGORY_KEYS: Record<string, Category> = { g: "genre", e: "emotion", i: "instrument" };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class TaskViewRenderer {
  private root: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly session: AnnotationSession,
    private readonly api: Api,
  ) {
    this.root = root;
    document.addEventListener("keydown", (event) => {
      const target = event.target as HTMLElement | null;
      if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
      const category = CATEGORY_KEYS[event.key];
      if (category) {
        const picker = this.root.querySelector<HTMLSelectElement>(`#picker-${category}`);
        picker?.focus();
        event.preventDefault();
      }
      if (event.key === "ArrowRight") this.act(() => Promise.resolve(this.session.next()));
      if (event.key === "ArrowLeft") this.act(() => Promise.resolve(this.session.previous()));
    });
  }

  private act(fn: () => Promise<void>): void {
    fn()
      .catch((err) => {
        this.session.notice = String(err);
      })
      .finally(() => this.render());
  }

  render(): void {
    this.root.replaceChildren();
    if (this.session.offline) {
      const banner = el("div", "banner offline", "Connection lost. Your draft is safe.");
      const retry = el("button", "", "Retry");
      retry.onclick = () => this.act(() => this.session.retry());
      banner.append(retry);
      this.root.append(banner);
    }
    if (this.session.notice) {
      this.root.append(el("div", "banner notice", this.session.notice));
    }
    if (!this.session.items.length) {
      this.root.append(el("p", "empty", "No items in this batch."));
      return;
    }
    const item = this.session.currentItem;
    const progress = this.session.progress;

    const header = el("header");
    header.append(
      el("h2", "", item.title ?? item.item_id),
      el(
        "p",
        "meta",
        [item.composer, item.year?.toString()].filter(Boolean).join(" — ") || "unknown origin",
      ),
      el("p", "progress", `Track ${progress.index + 1} of ${progress.total} in batch ${this.session.batch}`),
    );
    this.root.append(header);

    if (item.audio_url) {
      const audio = el("audio");
      audio.controls = true;
      audio.src = item.audio_url;
      this.root.append(audio);
    }

    const nav = el("nav");
    const prev = el("button", "", "← previous");
    prev.disabled = progress.index === 0;
    prev.onclick = () => this.act(() => Promise.resolve(this.session.previous()));
    const next = el("button", "", "next →");
    next.disabled = progress.index >= progress.total - 1;
    next.onclick = () => this.act(() => Promise.resolve(this.session.next()));
    nav.append(prev, next);
    this.root.append(nav);

    const pickers = el("section", "pickers");
    for (const category of CATEGORIES) {
      pickers.append(this.renderPicker(category));
    }
    this.root.append(pickers);

    const list = el("section", "annotations");
    list.append(el("h3", "", "Tags from the crowd"));
    if (!item.annotations.length) {
      list.append(el("p", "empty", "No tags yet — add the first one."));
    }
    for (const annotation of item.annotations) {
      list.append(this.renderAnnotation(annotation));
    }
    this.root.append(list);

    this.root.append(this.renderComments());
    void this.renderLeaderboard();
  }

  private renderPicker(category: Category): HTMLElement {
    const wrap = el("div", "picker");
    const label = el("label", "", `${category} (${category[0]})`);
    const select = el("select");
    select.id = `picker-${category}`;
    // options come verbatim from the service vocabularies: nothing else is
    // submittable through this UI
    for (const term of this.session.termsFor(category)) {
      const option = el("option", "", term.label);
      option.value = term.id;
      select.append(option);
    }
    const add = el("button", "", "tag");
    add.onclick = () => this.act(() => this.session.submitTag(select.value, category));
    label.htmlFor = select.id;
    wrap.append(label, select, add);
    return wrap;
  }

  private renderAnnotation(annotation: AnnotationView): HTMLElement {
    const row = el("div", "annotation");
    row.append(
      el("span", "term", this.session.labelFor(annotation.term_id, annotation.category)),
      el("span", "category", annotation.category),
      el("span", "creator", annotation.creator === this.session.user ? "you" : annotation.creator),
    );
    const tallies = el("span", "tallies", `▲${annotation.upvotes} ▼${annotation.downvotes}`);
    const up = el("button", annotation.my_vote === "up" ? "vote active" : "vote", "▲");
    const down = el("button", annotation.my_vote === "down" ? "vote active" : "vote", "▼");
    const mine = !this.session.canVote(annotation);
    up.disabled = mine; // self-votes are unreachable from the UI
    down.disabled = mine;
    up.onclick = () => this.act(() => this.session.toggleVote(annotation.id, "up"));
    down.onclick = () => this.act(() => this.session.toggleVote(annotation.id, "down"));
    row.append(up, down, tallies);
    return row;
  }

  private renderComments(): HTMLElement {
    const item = this.session.currentItem;
    const section = el("section", "comments");
    section.append(el("h3", "", "Comments"));
    for (const comment of item.comments) {
      const row = el("p", "comment");
      row.append(el("strong", "", comment.author + ": "), document.createTextNode(comment.text));
      section.append(row);
    }
    const box = el("textarea");
    box.placeholder = "Anything else about this track? (free text)";
    box.value = this.session.draftComment;
    box.oninput = () => {
      this.session.draftComment = box.value;
    };
    const post = el("button", "", "post comment");
    post.onclick = () => this.act(() => this.session.submitComment());
    section.append(box, post);
    return section;
  }

  private async renderLeaderboard(): Promise<void> {
    let rows: LeaderboardRow[];
    try {
      rows = await this.api.leaderboard(this.session.campaignId);
    } catch {
      return; // the board is decoration; never block the task on it
    }
    const section = el("aside", "leaderboard");
    section.append(el("h3", "", "Leaderboard"));
    const list = el("ol");
    for (const row of rows.slice(0, 10)) {
      list.append(el("li", row.user === this.session.user ? "me" : "", `${row.user} — ${row.points}`));
    }
    section.append(list);
    this.root.append(section);
  }
}
