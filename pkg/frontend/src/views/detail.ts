// Family inspection panel: member evidence, pair matrix, category picker.

import { toggleCategory, isSaveable } from '../categories.js';
import { CATEGORIES, type Category, type FamilyDetail } from '../types.js';

export interface DetailCallbacks {
  onSave(categories: Category[], note: string): Promise<void>;
  onBack(): void;
}

function memberTable(detail: FamilyDetail): HTMLTableElement {
  const table = document.createElement('table');
  table.className = 'member-stats';
  const head = document.createElement('tr');
  for (const label of ['member', 'frequency', 'coverage', 'top dimension', 'top share']) {
    const th = document.createElement('th');
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const member of detail.members) {
    const row = document.createElement('tr');
    const stats = detail.dimension_stats?.[member];
    const cells = [
      member,
      String(detail.frequencies[member] ?? ''),
      stats ? String(stats.coverage) : 'n/a',
      stats ? stats.top_dimension : 'n/a',
      stats ? stats.top_share.toFixed(3) : 'n/a',
    ];
    for (const text of cells) {
      const td = document.createElement('td');
      td.textContent = text;
      row.appendChild(td);
    }
    table.appendChild(row);
  }
  return table;
}

function pairMatrix(detail: FamilyDetail): HTMLTableElement {
  const table = document.createElement('table');
  table.className = 'pair-matrix';
  const index = new Map(detail.members.map((m, i) => [m, i] as const));
  const cells: string[][] = detail.members.map(() => detail.members.map(() => ''));
  for (const pair of detail.pairs) {
    const i = index.get(pair.w);
    const j = index.get(pair.v);
    if (i === undefined || j === undefined) continue;
    cells[i][j] = `${pair.cosine.toFixed(2)} / ${pair.jaccard.toFixed(2)}`;
    cells[j][i] = cells[i][j];
  }
  const head = document.createElement('tr');
  head.appendChild(document.createElement('th'));
  for (const member of detail.members) {
    const th = document.createElement('th');
    th.textContent = member;
    head.appendChild(th);
  }
  table.appendChild(head);
  detail.members.forEach((member, i) => {
    const row = document.createElement('tr');
    const th = document.createElement('th');
    th.textContent = member;
    row.appendChild(th);
    detail.members.forEach((_other, j) => {
      const td = document.createElement('td');
      td.textContent = i === j ? '—' : cells[i][j];
      row.appendChild(td);
    });
    table.appendChild(row);
  });
  return table;
}

export function renderDetail(detail: FamilyDetail, callbacks: DetailCallbacks): HTMLElement {
  const panel = document.createElement('section');
  panel.className = 'detail';

  const back = document.createElement('button');
  back.className = 'back';
  back.textContent = '← families';
  back.addEventListener('click', () => callbacks.onBack());
  panel.appendChild(back);

  const title = document.createElement('h2');
  title.textContent = detail.members.join(' · ');
  panel.appendChild(title);

  const meta = document.createElement('p');
  meta.className = 'meta';
  meta.textContent =
    `${detail.mode} family ${detail.family_id}: cohesion ` +
    `${detail.score.cohesion.toFixed(3)} (cosine ${detail.score.mean_cosine.toFixed(3)}, ` +
    `Jaccard ${detail.score.mean_jaccard.toFixed(3)})`;
  panel.appendChild(meta);

  panel.appendChild(memberTable(detail));
  if (detail.dimension_stats === null) {
    const note = document.createElement('p');
    note.className = 'dim-unavailable';
    note.textContent = 'dimension statistics unavailable for this run';
    panel.appendChild(note);
  }
  panel.appendChild(pairMatrix(detail));

  // category picker
  let selection: Category[] = (detail.annotation?.categories ?? []).filter(
    (c): c is Category => (CATEGORIES as readonly string[]).includes(c),
  );
  let dirty = false;

  const picker = document.createElement('fieldset');
  picker.className = 'category-picker';
  const legend = document.createElement('legend');
  legend.textContent = 'categories (1–3)';
  picker.appendChild(legend);

  const status = document.createElement('p');
  status.className = 'save-status';

  const note = document.createElement('textarea');
  note.className = 'note';
  note.placeholder = 'note';
  note.value = detail.annotation?.note ?? '';

  const save = document.createElement('button');
  save.className = 'save';
  save.textContent = 'save';

  const boxes = new Map<Category, HTMLInputElement>();

  const sync = () => {
    for (const [category, box] of boxes) {
      box.checked = selection.includes(category);
    }
    save.disabled = !isSaveable(selection);
  };

  for (const category of CATEGORIES) {
    const label = document.createElement('label');
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = category;
    boxes.set(category, box);
    box.addEventListener('change', () => {
      const result = toggleCategory(selection, category);
      selection = result.selection;
      sync();
      if (!result.changed) {
        // fourth pick: the checkbox is reverted and the reason surfaced
        status.textContent = result.blockedReason ?? 'selection blocked';
        status.classList.add('dirty');
      } else {
        dirty = true;
        status.textContent = 'unsaved changes';
        status.classList.add('dirty');
      }
    });
    label.append(box, document.createTextNode(category));
    picker.appendChild(label);
  }

  save.addEventListener('click', async () => {
    status.classList.remove('dirty', 'error');
    status.textContent = 'saving…';
    try {
      await callbacks.onSave(selection, note.value);
      dirty = false;
      status.textContent = 'saved';
    } catch (error) {
      // keep the dirty state; the analyst can retry
      dirty = true;
      status.textContent = `save failed: ${(error as Error).message}; retry`;
      status.classList.add('dirty', 'error');
    }
  });

  picker.append(note, save, status);
  panel.appendChild(picker);
  sync();
  return panel;
}
