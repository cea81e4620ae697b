import { Api, ApiError, NETWORK_ERROR } from "./api.js";
import type {
  AnnotationView,
  Category,
  ItemView,
  VoteDirection,
  Vocabularies,
} from "./types.js";

export interface Progress {
  index: number;
  total: number;
}

/**
 * One annotator's pass through a batch: holds the task view state and
 * applies optimistic updates that are reconciled with (or rolled back to)
 * the server's acknowledged state.
 *
 * Tags can only be submitted by term id out of the vocabularies fetched
 * from the service, so free-typed tags are impossible by construction;
 * free text goes through comments alone.
 */
export class AnnotationSession {
  campaignId = "";
  batch = 0;
  totalBatches = 0;
  index = 0;
  items: ItemView[] = [];
  vocabularies: Vocabularies = { emotion: [], genre: [], instrument: [] };
  notice: string | null = null;
  offline = false;
  draftComment = "";

  constructor(
    private readonly api: Api,
    readonly user: string,
  ) {}

  async start(campaignId: string, batch: number): Promise<void> {
    this.campaignId = campaignId;
    this.batch = batch;
    this.vocabularies = await this.api.getVocabularies();
    await this.refresh();
  }

  /** Re-fetch the batch from the service, dropping any unacknowledged state. */
  async refresh(): Promise<void> {
    try {
      const page = await this.api.getBatchItems(this.campaignId, this.batch);
      this.items = page.items;
      this.totalBatches = page.total_batches;
      if (this.index >= this.items.length) {
        this.index = Math.max(0, this.items.length - 1);
      }
      this.offline = false;
    } catch (err) {
      if (err instanceof ApiError && err.code === NETWORK_ERROR) {
        this.offline = true; // banner with retry; drafted comment stays intact
        return;
      }
      throw err;
    }
  }

  get currentItem(): ItemView {
    const item = this.items[this.index];
    if (!item) {
      throw new Error("no items loaded");
    }
    return item;
  }

  get progress(): Progress {
    return { index: this.index, total: this.items.length };
  }

  next(): void {
    if (this.index < this.items.length - 1) {
      this.index += 1;
      this.notice = null;
    }
  }

  previous(): void {
    if (this.index > 0) {
      this.index -= 1;
      this.notice = null;
    }
  }

  /** Vote buttons are disabled on the annotator's own rows. */
  canVote(annotation: AnnotationView): boolean {
    return annotation.creator !== this.user;
  }

  termsFor(category: Category) {
    return this.vocabularies[category];
  }

  labelFor(termId: string, category: Category): string {
    return this.findTerm(termId, category)?.label ?? termId;
  }

  private findTerm(termId: string, category: Category) {
    return this.vocabularies[category].find((t) => t.id === termId);
  }

  async submitTag(termId: string, category: Category): Promise<void> {
    const term = this.findTerm(termId, category);
    if (!term) {
      throw new Error(`term ${termId} is not offered by the ${category} picker`);
    }
    const item = this.currentItem;
    const pending: AnnotationView = {
      id: `pending-${Date.now()}-${termId}`,
      term_id: termId,
      category,
      creator: this.user,
      upvotes: 0,
      downvotes: 0,
      score: 0,
      my_vote: null,
    };
    item.annotations.push(pending); // optimistic insert
    this.notice = null;
    try {
      const created = await this.api.submitAnnotation(item.item_id, termId, category);
      pending.id = created.id; // reconcile with the acknowledged row
      pending.upvotes = created.upvotes;
      pending.downvotes = created.downvotes;
      pending.score = created.upvotes - created.downvotes;
    } catch (err) {
      item.annotations.splice(item.annotations.indexOf(pending), 1);
      if (err instanceof ApiError) {
        if (err.code === "DuplicateAnnotation") {
          this.notice = `You already tagged this track with ${term.label}.`;
          return;
        }
        if (err.code === "UnknownTerm") {
          // stale vocabulary: refresh the pickers
          this.vocabularies = await this.api.getVocabularies();
          this.notice = "The tag lists changed; pick again.";
          return;
        }
        if (err.code === NETWORK_ERROR) {
          this.offline = true;
          return;
        }
      }
      throw err;
    }
  }

  async toggleVote(annotationId: string, direction: VoteDirection): Promise<void> {
    const item = this.currentItem;
    const annotation = item.annotations.find((a) => a.id === annotationId);
    if (!annotation || !this.canVote(annotation) || annotation.my_vote === direction) {
      return;
    }
    const snapshot = { ...annotation };
    // replacement semantics: switching up->down moves both tallies at once
    if (annotation.my_vote === "up") annotation.upvotes -= 1;
    if (annotation.my_vote === "down") annotation.downvotes -= 1;
    if (direction === "up") annotation.upvotes += 1;
    else annotation.downvotes += 1;
    annotation.my_vote = direction;
    annotation.score = annotation.upvotes - annotation.downvotes;
    try {
      const result = await this.api.castVote(annotationId, direction);
      annotation.upvotes = result.upvotes; // server tallies win
      annotation.downvotes = result.downvotes;
      annotation.my_vote = result.my_vote;
      annotation.score = result.upvotes - result.downvotes;
    } catch (err) {
      Object.assign(annotation, snapshot);
      if (err instanceof ApiError && err.code === NETWORK_ERROR) {
        this.offline = true;
        return;
      }
      throw err;
    }
  }

  async submitComment(): Promise<void> {
    const text = this.draftComment.trim();
    if (!text) {
      this.notice = "Write something before posting a comment.";
      return;
    }
    const item = this.currentItem;
    try {
      const created = await this.api.addComment(item.item_id, text);
      item.comments.push({
        author: created.author,
        text: created.text,
        created_at: created.created_at,
      });
      this.draftComment = ""; // only cleared once the server acknowledged
      this.notice = null;
    } catch (err) {
      if (err instanceof ApiError) {
        if (err.code === NETWORK_ERROR) {
          this.offline = true; // draft survives for the retry
          return;
        }
        this.notice = err.message;
        return;
      }
      throw err;
    }
  }

  async retry(): Promise<void> {
    await this.refresh();
  }
}
