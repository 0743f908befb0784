// Paged, sortable family table with annotation progress.

import type { FamilyPage, FamilySummary } from '../types.js';

export interface BrowserCallbacks {
  onOpen(familyId: string): void;
  onSort(key: 'cohesion' | 'size' | 'mean_cosine'): void;
  onPage(delta: number): void;
}

const SORTABLE: Array<['cohesion' | 'size' | 'mean_cosine', string]> = [
  ['cohesion', 'cohesion'],
  ['size', 'size'],
  ['mean_cosine', 'mean cosine'],
];

export function renderProgress(page: FamilyPage): HTMLElement {
  const wrap = document.createElement('div');
  wrap.className = 'progress';
  const done = page.annotated_total;
  const total = page.families_total;
  const bar = document.createElement('div');
  bar.className = 'progress-bar';
  const fill = document.createElement('div');
  fill.className = 'progress-fill';
  fill.style.width = total ? `${Math.round((100 * done) / total)}%` : '0%';
  bar.appendChild(fill);
  const label = document.createElement('span');
  label.className = 'progress-label';
  label.textContent = `${done} / ${total} annotated`;
  wrap.append(bar, label);
  return wrap;
}

function summaryRow(item: FamilySummary, callbacks: BrowserCallbacks): HTMLTableRowElement {
  const row = document.createElement('tr');
  row.dataset.familyId = item.family_id;
  row.tabIndex = 0;
  if (item.annotated) {
    row.classList.add('annotated');
  }
  const members = document.createElement('td');
  members.className = 'members';
  members.textContent = item.members.join(' · ');
  const size = document.createElement('td');
  size.textContent = String(item.size);
  const cohesion = document.createElement('td');
  cohesion.textContent = item.cohesion.toFixed(3);
  const cosine = document.createElement('td');
  cosine.textContent = item.mean_cosine.toFixed(3);
  const categories = document.createElement('td');
  categories.className = 'categories';
  categories.textContent = item.categories.join(', ');
  row.append(members, size, cohesion, cosine, categories);
  row.addEventListener('click', () => callbacks.onOpen(item.family_id));
  row.addEventListener('keydown', (event) => {
    if ((event as KeyboardEvent).key === 'Enter') {
      callbacks.onOpen(item.family_id);
    }
  });
  return row;
}

export function renderBrowser(page: FamilyPage, callbacks: BrowserCallbacks): HTMLElement {
  const container = document.createElement('section');
  container.className = 'browser';
  container.appendChild(renderProgress(page));

  const table = document.createElement('table');
  table.className = 'families';
  const head = document.createElement('tr');
  const memberHead = document.createElement('th');
  memberHead.textContent = 'members';
  head.appendChild(memberHead);
  for (const [key, label] of SORTABLE) {
    const th = document.createElement('th');
    th.className = 'sortable';
    th.dataset.sortKey = key;
    th.textContent = label;
    th.addEventListener('click', () => callbacks.onSort(key));
    head.appendChild(th);
  }
  const catHead = document.createElement('th');
  catHead.textContent = 'categories';
  head.appendChild(catHead);
  table.appendChild(head);
  for (const item of page.items) {
    table.appendChild(summaryRow(item, callbacks));
  }
  container.appendChild(table);

  const pager = document.createElement('div');
  pager.className = 'pager';
  const prev = document.createElement('button');
  prev.textContent = '← prev';
  prev.disabled = page.page <= 1;
  prev.addEventListener('click', () => callbacks.onPage(-1));
  const next = document.createElement('button');
  next.textContent = 'next →';
  next.disabled = page.page * page.page_size >= page.total;
  next.addEventListener('click', () => callbacks.onPage(1));
  const where = document.createElement('span');
  where.textContent = `page ${page.page} of ${Math.max(1, Math.ceil(page.total / page.page_size))} (${page.total} families)`;
  pager.append(prev, where, next);
  container.appendChild(pager);
  return container;
}

/** The id of the first unannotated family after the given one, if any. */
export function nextUnannotated(page: FamilyPage, after?: string): string | null {
  const items = page.items;
  const start = after ? items.findIndex((item) => item.family_id === after) + 1 : 0;
  for (let i = start; i < items.length; i += 1) {
    if (!items[i].annotated) {
      return items[i].family_id;
    }
  }
  return null;
}
