// Wire types for the musekb JSON API. Field names mirror the service
// payloads exactly (snake_case).

export type Category = "emotion" | "genre" | "instrument";

export const CATEGORIES: Category[] = ["genre", "emotion", "instrument"];

export type VoteDirection = "up" | "down";

export interface TermInfo {
  id: string;
  label: string;
  category: Category;
  uri: string;
  valence?: number;
  arousal?: number;
}

export type Vocabularies = Record<Category, TermInfo[]>;

export interface AnnotationView {
  id: string;
  term_id: string;
  category: Category;
  creator: string;
  upvotes: number;
  downvotes: number;
  score: number;
  my_vote: VoteDirection | null;
}

export interface CommentView {
  author: string;
  text: string;
  created_at: string;
}

export interface ItemView {
  item_id: string;
  title: string | null;
  composer: string | null;
  year: number | null;
  audio_url: string | null;
  annotations: AnnotationView[];
  comments: CommentView[];
}

export interface BatchItems {
  campaign_id: string;
  batch: number;
  total_batches: number;
  items: ItemView[];
}

export interface CampaignInfo {
  id: string;
  title: string;
  instructions: string;
  item_count: number;
  batch_count: number;
  start: string;
  end: string;
  open: boolean;
}

export interface AnnotationCreated {
  id: string;
  item_id: string;
  term_id: string;
  category: Category;
  creator: string;
  upvotes: number;
  downvotes: number;
  created_at: string;
}

export interface VoteResult {
  annotation_id: string;
  upvotes: number;
  downvotes: number;
  my_vote: VoteDirection;
}

export interface CommentCreated {
  id: string;
  item_id: string;
  author: string;
  text: string;
  created_at: string;
}

export interface LeaderboardRow {
  user: string;
  points: number;
}

export interface ExportedAnnotation {
  item_id: string;
  category: Category;
  term_id: string;
  upvotes: number;
  downvotes: number;
  creator: string;
}

export interface ExportedComment {
  item_id: string;
  author: string;
  text: string;
  created_at: string;
}

export interface ExportSnapshot {
  annotations: ExportedAnnotation[];
  comments: ExportedComment[];
}
