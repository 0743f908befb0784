import { describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError, listQueryParams } from '../src/api.js';
import type { ListQuery } from '../src/types.js';
import { COUNTS, jsonResponse, PAGE } from './fixtures.js';

describe('listQueryParams', () => {
  it('serializes the full query', () => {
    const query: ListQuery = {
      page: 2,
      pageSize: 25,
      sort: 'size',
      order: 'asc',
      filter: 'unannotated',
      category: 'Regional',
    };
    const params = listQueryParams(query);
    expect(params.get('page')).toBe('2');
    expect(params.get('page_size')).toBe('25');
    expect(params.get('sort')).toBe('size');
    expect(params.get('order')).toBe('asc');
    expect(params.get('filter')).toBe('unannotated');
    expect(params.get('category')).toBe('Regional');
  });

  it('omits category when unset', () => {
    const params = listQueryParams({
      page: 1,
      pageSize: 50,
      sort: 'cohesion',
      order: 'desc',
      filter: 'all',
    });
    expect(params.has('category')).toBe(false);
  });
});

describe('ApiClient', () => {
  it('fetches family pages from /families', async () => {
    const fetchImpl = vi.fn().mockResolvedValue(jsonResponse(PAGE));
    const client = new ApiClient('', fetchImpl as unknown as typeof fetch);
    const page = await client.listFamilies({
      page: 1,
      pageSize: 50,
      sort: 'cohesion',
      order: 'desc',
      filter: 'all',
    });
    expect(page.total).toBe(2);
    const url = fetchImpl.mock.calls[0][0] as string;
    expect(url).toMatch(/^\/families\?page=1/);
  });

  it('returns the summary verbatim', async () => {
    const fetchImpl = vi.fn().mockResolvedValue(jsonResponse(COUNTS));
    const client = new ApiClient('', fetchImpl as unknown as typeof fetch);
    expect(await client.categorySummary()).toEqual(COUNTS);
  });

  it('surfaces server validation errors with detail text', async () => {
    // fresh Response per call: bodies are single-use
    const fetchImpl = vi
      .fn()
      .mockImplementation(() =>
        Promise.resolve(
          jsonResponse({ detail: 'categories must contain at most 3 entries' }, 400),
        ),
      );
    const client = new ApiClient('', fetchImpl as unknown as typeof fetch);
    await expect(
      client.putAnnotation('x', ['a', 'b', 'c', 'd'], '', 'ui'),
    ).rejects.toThrowError(ApiError);
    await expect(
      client.putAnnotation('x', ['a', 'b', 'c', 'd'], '', 'ui'),
    ).rejects.toThrow(/at most 3/);
  });

  it('PUTs annotations as JSON', async () => {
    const fetchImpl = vi.fn().mockResolvedValue(
      jsonResponse({
        family_id: 'x',
        categories: ['Other'],
        note: '',
        annotator: 'ui',
        timestamp: 't',
      }),
    );
    const client = new ApiClient('', fetchImpl as unknown as typeof fetch);
    await client.putAnnotation('x', ['Other'], 'hello', 'ui');
    const [url, init] = fetchImpl.mock.calls[0];
    expect(url).toBe('/families/x/annotation');
    expect(init.method).toBe('PUT');
    expect(JSON.parse(init.body)).toEqual({
      categories: ['Other'],
      note: 'hello',
      annotator: 'ui',
    });
  });
});
