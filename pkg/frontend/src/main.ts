// App shell: routing between browser, detail, and summary views.

import { ApiClient } from './api.js';
import { nextUnannotated, renderBrowser } from './views/browser.js';
import { renderDetail } from './views/detail.js';
import { renderSummary } from './views/summary.js';
import { CATEGORIES, type Category, type ListQuery } from './types.js';

type ViewName = 'browser' | 'summary';

export class App {
  private query: ListQuery = {
    page: 1,
    pageSize: 50,
    sort: 'cohesion',
    order: 'desc',
    filter: 'all',
  };
  private view: ViewName = 'browser';
  private openFamily: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.bindKeys();
    await this.render();
  }

  private bindKeys(): void {
    document.addEventListener('keydown', (event) => {
      if (event.key === 'n' && this.view === 'browser' && !this.openFamily) {
        void this.jumpToNextUnannotated();
      }
    });
  }

  private async jumpToNextUnannotated(): Promise<void> {
    const page = await this.api.listFamilies(this.query);
    const target = nextUnannotated(page, undefined);
    if (target) {
      await this.showDetail(target);
    }
  }

  private banner(message: string): HTMLElement {
    const div = document.createElement('div');
    div.className = 'error-banner';
    div.textContent = message;
    return div;
  }

  private nav(): HTMLElement {
    const nav = document.createElement('nav');
    for (const [name, label] of [
      ['browser', 'families'],
      ['summary', 'categories'],
    ] as Array<[ViewName, string]>) {
      const button = document.createElement('button');
      button.textContent = label;
      button.className = this.view === name ? 'active' : '';
      button.addEventListener('click', () => {
        this.view = name;
        this.openFamily = null;
        void this.render();
      });
      nav.appendChild(button);
    }
    const filter = document.createElement('select');
    for (const value of ['all', 'annotated', 'unannotated']) {
      const option = document.createElement('option');
      option.value = value;
      option.textContent = value;
      filter.appendChild(option);
    }
    filter.value = this.query.filter;
    filter.addEventListener('change', () => {
      this.query.filter = filter.value as ListQuery['filter'];
      this.query.page = 1;
      void this.render();
    });
    nav.appendChild(filter);

    const byCategory = document.createElement('select');
    byCategory.className = 'category-filter';
    const any = document.createElement('option');
    any.value = '';
    any.textContent = 'any category';
    byCategory.appendChild(any);
    for (const category of CATEGORIES) {
      const option = document.createElement('option');
      option.value = category;
      option.textContent = category;
      byCategory.appendChild(option);
    }
    byCategory.value = this.query.category ?? '';
    byCategory.addEventListener('change', () => {
      this.query.category = (byCategory.value || undefined) as ListQuery['category'];
      this.query.page = 1;
      void this.render();
    });
    nav.appendChild(byCategory);
    return nav;
  }

  private async render(): Promise<void> {
    this.root.replaceChildren(this.nav());
    try {
      if (this.openFamily) {
        await this.showDetail(this.openFamily);
      } else if (this.view === 'summary') {
        this.root.appendChild(renderSummary(await this.api.categorySummary()));
      } else {
        await this.renderBrowserView();
      }
    } catch (error) {
      this.root.appendChild(
        this.banner(`service unreachable: ${(error as Error).message}`),
      );
    }
  }

  private async renderBrowserView(): Promise<void> {
    const page = await this.api.listFamilies(this.query);
    this.root.appendChild(
      renderBrowser(page, {
        onOpen: (familyId) => void this.showDetail(familyId),
        onSort: (key) => {
          if (this.query.sort === key) {
            this.query.order = this.query.order === 'desc' ? 'asc' : 'desc';
          } else {
            this.query.sort = key;
            this.query.order = 'desc';
          }
          void this.render();
        },
        onPage: (delta) => {
          this.query.page = Math.max(1, this.query.page + delta);
          void this.render();
        },
      }),
    );
  }

  private async showDetail(familyId: string): Promise<void> {
    this.openFamily = familyId;
    this.root.replaceChildren(this.nav());
    const detail = await this.api.getFamily(familyId);
    this.root.appendChild(
      renderDetail(detail, {
        onSave: async (categories: Category[], note: string) => {
          await this.api.putAnnotation(familyId, categories, note, 'ui');
          // read-your-writes: re-fetch rather than trusting local state
          await this.showDetail(familyId);
        },
        onBack: () => {
          this.openFamily = null;
          void this.render();
        },
      }),
    );
  }
}

declare global {
  interface Window {
    varfamApp?: App;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const app = new App(new ApiClient(''), document.getElementById('app')!);
  window.varfamApp = app;
  void app.start();
}
