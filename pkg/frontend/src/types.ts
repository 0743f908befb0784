// Wire types mirroring the annotation service's JSON responses.

export const CATEGORIES = [
  'Orthographic',
  'Morphological',
  'Lexical',
  'Collocation',
  'Tokenisation',
  'Regional',
  'Other',
] as const;

export type Category = (typeof CATEGORIES)[number];

export const MAX_CATEGORIES = 3;

export interface FamilySummary {
  family_id: string;
  mode: string;
  size: number;
  members: string[];
  mean_cosine: number;
  mean_jaccard: number;
  cohesion: number;
  annotated: boolean;
  categories: string[];
}

export interface FamilyPage {
  items: FamilySummary[];
  page: number;
  page_size: number;
  total: number;
  families_total: number;
  annotated_total: number;
}

export interface PairScore {
  w: string;
  v: string;
  cosine: number;
  jaccard: number;
  is_edge: boolean;
}

export interface DimensionStats {
  coverage: number;
  top_dimension: string;
  top_share: number;
  total_frequency: number;
}

export interface Annotation {
  family_id: string;
  categories: string[];
  note: string;
  annotator: string;
  timestamp: string;
}

export interface FamilyDetail {
  family_id: string;
  mode: string;
  seed: string | null;
  members: string[];
  frequencies: Record<string, number>;
  dimension_stats: Record<string, DimensionStats> | null;
  pairs: PairScore[];
  score: {
    size: number;
    mean_cosine: number;
    mean_jaccard: number;
    cohesion: number;
  };
  annotation: Annotation | null;
}

export type CategoryCounts = Record<Category, number>;

export interface ListQuery {
  page: number;
  pageSize: number;
  sort: 'cohesion' | 'size' | 'mean_cosine' | 'family_id';
  order: 'asc' | 'desc';
  filter: 'all' | 'annotated' | 'unannotated';
  category?: Category;
}
