// Result panel: the patches/statistics tab pairs, per-image action buttons,
// the render toggle with its 1000-image cap, the download cart, and the
// feedback form. Every displayed number comes straight from a validated
// API response.

import type {
  LabelStats,
  PatchRecord,
  QueryResponse,
  SimilarResponse,
} from "./api";
import { TabManager } from "./state";

export interface ResultActions {
  onSimilar(name: string): void;
  onNavigate(record: PatchRecord): void;
  onPinpoint(name: string): void;
  onDownloadZip(name: string): void;
  onAddToCart(names: string[]): void;
  onDownloadNames(): void;
  onRenderToggle(enabled: boolean): void;
}

export function renderBarChart(container: HTMLElement, stats: LabelStats): void {
  container.textContent = "";
  const entries = Object.entries(stats).sort((a, b) => b[1].count - a[1].count);
  const svgNs = "http://www.w3.org/2000/svg";
  const rowHeight = 22;
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("class", "bar-chart");
  svg.setAttribute("width", "360");
  svg.setAttribute("height", String(Math.max(1, entries.length) * rowHeight));
  const maxCount = Math.max(1, ...entries.map(([, v]) => v.count));
  entries.forEach(([label, value], row) => {
    const bar = document.createElementNS(svgNs, "rect");
    bar.setAttribute("class", "bar");
    bar.setAttribute("x", "0");
    bar.setAttribute("y", String(row * rowHeight + 3));
    bar.setAttribute("height", String(rowHeight - 6));
    bar.setAttribute("width", String((value.count / maxCount) * 240));
    bar.setAttribute("fill", value.color);
    bar.dataset.label = label;
    bar.dataset.count = String(value.count);
    const text = document.createElementNS(svgNs, "text");
    text.setAttribute("x", "244");
    text.setAttribute("y", String(row * rowHeight + rowHeight / 2 + 4));
    text.setAttribute("class", "bar-label");
    text.textContent = `${value.count} ${label}`;
    svg.append(bar, text);
  });
  container.appendChild(svg);
}

export class ResultPanel {
  readonly root: HTMLElement;
  readonly tabs = new TabManager();
  private tabBar: HTMLDivElement;
  private body: HTMLDivElement;
  private cartLine: HTMLDivElement;
  private views = new Map<string, HTMLElement>();
  private actions: ResultActions;

  constructor(container: HTMLElement, actions: ResultActions) {
    this.actions = actions;
    this.root = document.createElement("div");
    this.root.className = "result-panel";
    container.appendChild(this.root);
    this.tabBar = document.createElement("div");
    this.tabBar.className = "tab-bar";
    this.body = document.createElement("div");
    this.body.className = "tab-body";
    this.cartLine = document.createElement("div");
    this.cartLine.className = "cart-line";
    this.cartLine.textContent = "Cart: 0 images";
    this.root.append(this.tabBar, this.body, this.cartLine);
    this.views.set("primary-patches", this.placeholder("Run a search to see image patches."));
    this.views.set("primary-stats", this.placeholder("Label statistics appear here."));
    this.tabs.onChange = () => this.renderTabs();
    this.renderTabs();
  }

  private placeholder(text: string): HTMLElement {
    const div = document.createElement("div");
    div.className = "placeholder";
    div.textContent = text;
    return div;
  }

  private renderTabs(): void {
    this.tabBar.textContent = "";
    for (const tab of this.tabs.tabs) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "tab-button" + (tab.id === this.tabs.activeId ? " active" : "");
      button.dataset.tabId = tab.id;
      button.dataset.kind = tab.kind;
      button.textContent = tab.title;
      button.addEventListener("click", () => this.tabs.activate(tab.id));
      this.tabBar.appendChild(button);
    }
    this.body.textContent = "";
    const view = this.views.get(this.tabs.activeId);
    if (view) {
      this.body.appendChild(view);
    }
  }

  updateCart(size: number): void {
    this.cartLine.textContent = `Cart: ${size} images`;
  }

  /** Fills the primary pair with a fresh query response. */
  showPrimary(response: QueryResponse): void {
    this.views.set("primary-patches", this.patchesView(response, null));
    const statsView = document.createElement("div");
    renderBarChart(statsView, response.stats);
    this.views.set("primary-stats", statsView);
    this.tabs.activate("primary-patches");
  }

  /** Opens the two-tab pair for a similarity search, query image on top. */
  showSimilarity(ref: string, response: SimilarResponse, queryRecord: PatchRecord | null): void {
    const { patchesId, statsId } = this.tabs.openSimilarityPair(ref);
    const view = document.createElement("div");
    if (queryRecord) {
      const queryCard = this.card(queryRecord, null);
      queryCard.classList.add("query-card");
      const banner = document.createElement("div");
      banner.className = "query-banner";
      banner.textContent = "Query image";
      queryCard.prepend(banner);
      view.appendChild(queryCard);
    } else {
      const banner = document.createElement("div");
      banner.className = "query-banner query-card";
      banner.textContent = "Query: uploaded image";
      view.appendChild(banner);
    }
    const list = document.createElement("div");
    list.className = "card-list";
    for (const neighbor of response.neighbors) {
      list.appendChild(this.card(neighbor.record, neighbor.distance));
    }
    view.appendChild(list);
    this.views.set(patchesId, view);
    const statsView = document.createElement("div");
    renderBarChart(statsView, response.stats);
    this.views.set(statsId, statsView);
    this.tabs.activate(patchesId);
  }

  private patchesView(response: QueryResponse, distances: Map<string, number> | null): HTMLElement {
    const view = document.createElement("div");
    const header = document.createElement("div");
    header.className = "result-header";
    const total = document.createElement("span");
    total.className = "total-count";
    total.dataset.total = String(response.total);
    total.textContent = `${response.total} image patches match`;
    header.appendChild(total);

    const renderLabel = document.createElement("label");
    const renderToggle = document.createElement("input");
    renderToggle.type = "checkbox";
    renderToggle.className = "render-toggle";
    renderToggle.checked = response.render_enabled;
    renderToggle.disabled = response.render_over_cap;
    renderToggle.addEventListener("change", () =>
      this.actions.onRenderToggle(renderToggle.checked),
    );
    renderLabel.append(renderToggle, document.createTextNode("Render on map (up to 1000)"));
    if (response.render_over_cap) {
      const warning = document.createElement("span");
      warning.className = "over-cap";
      warning.textContent = " too many matches to render";
      renderLabel.appendChild(warning);
    }
    header.appendChild(renderLabel);

    const namesButton = document.createElement("button");
    namesButton.type = "button";
    namesButton.className = "download-names";
    namesButton.textContent = "Download names";
    namesButton.addEventListener("click", () => this.actions.onDownloadNames());
    header.appendChild(namesButton);

    const pageToCart = document.createElement("button");
    pageToCart.type = "button";
    pageToCart.className = "page-to-cart";
    pageToCart.textContent = `Add page to cart (${response.page.length})`;
    pageToCart.addEventListener("click", () =>
      this.actions.onAddToCart(response.page.map((r) => r.patch_name)),
    );
    header.appendChild(pageToCart);
    view.appendChild(header);

    const list = document.createElement("div");
    list.className = "card-list";
    for (const record of response.page) {
      list.appendChild(this.card(record, distances?.get(record.patch_name) ?? null));
    }
    view.appendChild(list);
    return view;
  }

  private card(record: PatchRecord, distance: number | null): HTMLElement {
    const card = document.createElement("div");
    card.className = "patch-card";
    card.dataset.name = record.patch_name;
    const title = document.createElement("strong");
    title.textContent = record.patch_name;
    const description = document.createElement("div");
    description.className = "card-meta";
    description.textContent =
      `${record.acquisition_date} · ${record.season} · ${record.satellite} · ${record.country}`;
    const labels = document.createElement("div");
    labels.className = "card-labels";
    labels.textContent = record.labels.join(", ");
    card.append(title, description, labels);
    if (distance !== null) {
      const badge = document.createElement("span");
      badge.className = "distance-badge";
      badge.dataset.distance = String(distance);
      badge.textContent = `d=${distance}`;
      card.appendChild(badge);
    }
    const buttons: [string, () => void][] = [
      ["similar", () => this.actions.onSimilar(record.patch_name)],
      ["map", () => this.actions.onNavigate(record)],
      ["pin", () => this.actions.onPinpoint(record.patch_name)],
      ["zip", () => this.actions.onDownloadZip(record.patch_name)],
      ["cart", () => this.actions.onAddToCart([record.patch_name])],
    ];
    const row = document.createElement("div");
    row.className = "card-buttons";
    for (const [name, handler] of buttons) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = `card-btn ${name}-btn`;
      button.textContent = name;
      button.addEventListener("click", handler);
      row.appendChild(button);
    }
    card.appendChild(row);
    return card;
  }

  /** Scrolls the card for a patch into view and highlights it briefly. */
  locate(name: string): void {
    this.tabs.activate("primary-patches");
    const card = this.body.querySelector<HTMLElement>(`.patch-card[data-name="${name}"]`);
    if (card) {
      card.scrollIntoView?.({ block: "center" });
      card.classList.add("located");
      setTimeout(() => card.classList.remove("located"), 1500);
    }
  }
}

export class FeedbackForm {
  readonly root: HTMLElement;
  onSubmit: ((text: string) => Promise<void>) | null = null;

  constructor(container: HTMLElement) {
    this.root = document.createElement("form");
    this.root.className = "feedback-form";
    const area = document.createElement("textarea");
    area.placeholder = "Anonymous feedback…";
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "Send feedback";
    const status = document.createElement("span");
    status.className = "feedback-status";
    this.root.append(area, send, status);
    this.root.addEventListener("submit", async (ev) => {
      ev.preventDefault();
      if (!area.value.trim()) {
        status.textContent = "Feedback must not be empty.";
        return;
      }
      try {
        await this.onSubmit?.(area.value);
        area.value = "";
        status.textContent = "Thanks!";
      } catch {
        status.textContent = "Could not send feedback.";
      }
    });
    container.appendChild(this.root);
  }
}
