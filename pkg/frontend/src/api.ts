// Thin fetch client over the annotation service. All persisted state lives
// on the server; the client never caches annotation state as truth.

import type {
  Annotation,
  CategoryCounts,
  FamilyDetail,
  FamilyPage,
  ListQuery,
} from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export function listQueryParams(query: ListQuery): URLSearchParams {
  const params = new URLSearchParams({
    page: String(query.page),
    page_size: String(query.pageSize),
    sort: query.sort,
    order: query.order,
    filter: query.filter,
  });
  if (query.category) {
    params.set('category', query.category);
  }
  return params;
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === 'string') {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(detail, response.status);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  listFamilies(query: ListQuery): Promise<FamilyPage> {
    return this.get<FamilyPage>(`/families?${listQueryParams(query)}`);
  }

  getFamily(familyId: string): Promise<FamilyDetail> {
    return this.get<FamilyDetail>(`/families/${encodeURIComponent(familyId)}`);
  }

  categorySummary(): Promise<CategoryCounts> {
    return this.get<CategoryCounts>('/summary/categories');
  }

  async putAnnotation(
    familyId: string,
    categories: string[],
    note: string,
    annotator: string,
  ): Promise<Annotation> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/families/${encodeURIComponent(familyId)}/annotation`,
      {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ categories, note, annotator }),
      },
    );
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as Annotation;
  }
}
