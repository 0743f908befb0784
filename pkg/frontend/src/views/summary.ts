// Category frequency table fed directly by /summary/categories.
// The counts are rendered verbatim; the client never recounts.

import { CATEGORIES, type CategoryCounts } from '../types.js';

export function renderSummary(counts: CategoryCounts): HTMLElement {
  const section = document.createElement('section');
  section.className = 'summary';
  const title = document.createElement('h2');
  title.textContent = 'Categories and frequency';
  section.appendChild(title);
  const table = document.createElement('table');
  table.className = 'category-counts';
  const head = document.createElement('tr');
  for (const label of ['category', 'frequency']) {
    const th = document.createElement('th');
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const category of CATEGORIES) {
    const row = document.createElement('tr');
    const name = document.createElement('td');
    name.textContent = category;
    const count = document.createElement('td');
    count.className = 'count';
    count.dataset.category = category;
    count.textContent = String(counts[category] ?? 0);
    row.append(name, count);
    table.appendChild(row);
  }
  section.appendChild(table);
  return section;
}
