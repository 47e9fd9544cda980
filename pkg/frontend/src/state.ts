// Tab and cart view state. The primary query always owns the first
// patches/statistics pair; every similarity search opens its own pair.

export type TabKind = "patches" | "stats";

export interface TabSpec {
  id: string;
  kind: TabKind;
  title: string;
  similarityRef: string | null; // patch name or "upload" for similarity pairs
}

export class TabManager {
  readonly tabs: TabSpec[] = [];
  activeId: string;
  onChange: (() => void) | null = null;
  private counter = 0;

  constructor() {
    this.tabs.push(
      { id: "primary-patches", kind: "patches", title: "Image patches", similarityRef: null },
      { id: "primary-stats", kind: "stats", title: "Label statistics", similarityRef: null },
    );
    this.activeId = "primary-patches";
  }

  /** Opens the patches/statistics pair for one similarity search. */
  openSimilarityPair(ref: string): { patchesId: string; statsId: string } {
    this.counter += 1;
    const patchesId = `sim-${this.counter}-patches`;
    const statsId = `sim-${this.counter}-stats`;
    this.tabs.push(
      { id: patchesId, kind: "patches", title: `Similar: ${ref}`, similarityRef: ref },
      { id: statsId, kind: "stats", title: `Stats: ${ref}`, similarityRef: ref },
    );
    this.activeId = patchesId;
    this.onChange?.();
    return { patchesId, statsId };
  }

  activate(id: string): void {
    if (this.tabs.some((tab) => tab.id === id)) {
      this.activeId = id;
      this.onChange?.();
    }
  }

  close(id: string): void {
    const index = this.tabs.findIndex((tab) => tab.id === id);
    if (index < 0 || this.tabs[index].similarityRef === null) {
      return; // the primary pair stays
    }
    this.tabs.splice(index, 1);
    if (this.activeId === id) {
      this.activeId = this.tabs[Math.max(0, index - 1)].id;
    }
    this.onChange?.();
  }
}

export class CartMirror {
  private names = new Set<string>();
  onChange: (() => void) | null = null;

  update(names: string[]): void {
    this.names = new Set(names);
    this.onChange?.();
  }

  get size(): number {
    return this.names.size;
  }

  list(): string[] {
    return [...this.names].sort();
  }
}
