import type {
  AnnotationCreated,
  BatchItems,
  CampaignInfo,
  Category,
  CommentCreated,
  ExportSnapshot,
  LeaderboardRow,
  VoteDirection,
  VoteResult,
  Vocabularies,
} from "./types.js";

/** Error carrying the service's stable machine-readable code. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export const NETWORK_ERROR = "NetworkError";

export interface Api {
  listCampaigns(): Promise<CampaignInfo[]>;
  getVocabularies(): Promise<Vocabularies>;
  getBatchItems(campaignId: string, batch: number): Promise<BatchItems>;
  submitAnnotation(itemId: string, termId: string, category: Category): Promise<AnnotationCreated>;
  castVote(annotationId: string, direction: VoteDirection): Promise<VoteResult>;
  addComment(itemId: string, text: string): Promise<CommentCreated>;
  leaderboard(campaignId: string): Promise<LeaderboardRow[]>;
  exportCampaign(campaignId: string): Promise<ExportSnapshot>;
}

export class ApiClient implements Api {
  constructor(
    private readonly baseUrl: string,
    readonly user: string,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: {
          "Content-Type": "application/json",
          "X-User-Id": this.user,
        },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(NETWORK_ERROR, String(err), 0);
    }
    interface Envelope {
      data?: T;
      error?: { code: string; message: string };
    }
    let payload: Envelope;
    try {
      payload = (await response.json()) as Envelope;
    } catch {
      payload = {};
    }
    if (!response.ok || payload.error) {
      const code = payload.error?.code ?? `Http${response.status}`;
      const message = payload.error?.message ?? response.statusText;
      throw new ApiError(code, message, response.status);
    }
    return payload.data as T;
  }

  listCampaigns(): Promise<CampaignInfo[]> {
    return this.request("GET", "/campaigns");
  }

  getVocabularies(): Promise<Vocabularies> {
    return this.request("GET", "/vocabularies");
  }

  getBatchItems(campaignId: string, batch: number): Promise<BatchItems> {
    return this.request("GET", `/campaigns/${encodeURIComponent(campaignId)}/batches/${batch}/items`);
  }

  submitAnnotation(itemId: string, termId: string, category: Category): Promise<AnnotationCreated> {
    return this.request("POST", `/items/${encodeURIComponent(itemId)}/annotations`, {
      term_id: termId,
      category,
      user: this.user,
    });
  }

  castVote(annotationId: string, direction: VoteDirection): Promise<VoteResult> {
    return this.request("POST", `/annotations/${encodeURIComponent(annotationId)}/votes`, {
      user: this.user,
      direction,
    });
  }

  addComment(itemId: string, text: string): Promise<CommentCreated> {
    return this.request("POST", `/items/${encodeURIComponent(itemId)}/comments`, {
      user: this.user,
      text,
    });
  }

  leaderboard(campaignId: string): Promise<LeaderboardRow[]> {
    return this.request("GET", `/campaigns/${encodeURIComponent(campaignId)}/leaderboard`);
  }

  exportCampaign(campaignId: string): Promise<ExportSnapshot> {
    return this.request("GET", `/campaigns/${encodeURIComponent(campaignId)}/export`);
  }
}
