import type { CategoryCounts, FamilyDetail, FamilyPage } from '../src/types.js';

export const DETAIL: FamilyDetail = {
  family_id: '03070d93a622c2f7',
  mode: 'strict',
  seed: null,
  members: ['moar', 'muar', 'muer'],
  frequencies: { moar: 338, muar: 604, muer: 6577 },
  dimension_stats: {
    moar: { coverage: 8, top_dimension: 'u1', top_share: 0.6, total_frequency: 338 },
    muar: { coverage: 12, top_dimension: 'u7', top_share: 0.5, total_frequency: 604 },
    muer: { coverage: 40, top_dimension: 'u3', top_share: 0.2, total_frequency: 6577 },
  },
  pairs: [
    { w: 'moar', v: 'muar', cosine: 0.86, jaccard: 0.45, is_edge: true },
    { w: 'moar', v: 'muer', cosine: 0.88, jaccard: 0.35, is_edge: true },
    { w: 'muar', v: 'muer', cosine: 0.91, jaccard: 0.4, is_edge: true },
  ],
  score: { size: 3, mean_cosine: 0.883333, mean_jaccard: 0.4, cohesion: 0.550649 },
  annotation: null,
};

export const PAGE: FamilyPage = {
  items: [
    {
      family_id: '03070d93a622c2f7',
      mode: 'strict',
      size: 3,
      members: ['moar', 'muar', 'muer'],
      mean_cosine: 0.883333,
      mean_jaccard: 0.4,
      cohesion: 0.550649,
      annotated: false,
      categories: [],
    },
    {
      family_id: 'fed8bced53392c7d',
      mode: 'strict',
      size: 3,
      members: ['maat', 'mat', 'matt'],
      mean_cosine: 0.766667,
      mean_jaccard: 0.366667,
      cohesion: 0.496078,
      annotated: true,
      categories: ['Orthographic'],
    },
  ],
  page: 1,
  page_size: 50,
  total: 2,
  families_total: 2,
  annotated_total: 1,
};

export const COUNTS: CategoryCounts = {
  Orthographic: 2,
  Morphological: 0,
  Lexical: 1,
  Collocation: 0,
  Tokenisation: 0,
  Regional: 1,
  Other: 1,
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}
