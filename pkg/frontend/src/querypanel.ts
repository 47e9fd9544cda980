// Query panel: geospatial shape (typed coordinates or drawn on the map),
// date range, satellites, seasons, and the label hierarchy with its
// filtering operators behind the label switch.

import type { HierarchyData, OperatorWire, QueryRequest, ShapeWire } from "./api";

const SEASONS = ["winter", "spring", "summer", "autumn"];
const SATELLITES = ["S1", "S2"];

export class QueryPanel {
  readonly root: HTMLElement;
  onSubmit: ((request: QueryRequest) => void) | null = null;
  onDrawRequest: ((mode: "rectangle" | "circle" | "polygon") => void) | null = null;

  private drawnShape: ShapeWire | null = null;
  private shapeSource: "typed" | "drawn" | "none" = "none";

  private shapeType!: HTMLSelectElement;
  private coordInputs: Record<string, HTMLInputElement> = {};
  private dateStart!: HTMLInputElement;
  private dateEnd!: HTMLInputElement;
  private seasonBoxes: Record<string, HTMLInputElement> = {};
  private satelliteBoxes: Record<string, HTMLInputElement> = {};
  private labelSwitch!: HTMLInputElement;
  private operatorSelect!: HTMLSelectElement;
  private leafBoxes = new Map<string, HTMLInputElement>();
  private groupBoxes = new Map<string, { box: HTMLInputElement; leaves: string[] }>();
  private renderToggleBox!: HTMLInputElement;

  constructor(container: HTMLElement, hierarchy: HierarchyData) {
    this.root = document.createElement("div");
    this.root.className = "query-panel";
    container.appendChild(this.root);
    this.buildCoordinates();
    this.buildFilters();
    this.buildLabels(hierarchy);
    this.buildSubmit();
  }

  private section(title: string): HTMLElement {
    const section = document.createElement("section");
    const heading = document.createElement("h3");
    heading.textContent = title;
    section.appendChild(heading);
    this.root.appendChild(section);
    return section;
  }

  private buildCoordinates(): void {
    const section = this.section("Coordinates");
    this.shapeType = document.createElement("select");
    this.shapeType.className = "shape-type";
    for (const kind of ["none", "rectangle", "circle"]) {
      const option = document.createElement("option");
      option.value = kind;
      option.textContent = kind;
      this.shapeType.appendChild(option);
    }
    this.shapeType.addEventListener("change", () => {
      this.shapeSource = this.shapeType.value === "none" ? "none" : "typed";
      this.drawnShape = null;
    });
    section.appendChild(this.shapeType);

    const grid = document.createElement("div");
    grid.className = "coord-grid";
    for (const field of ["min_lon", "min_lat", "max_lon", "max_lat",
                         "center_lon", "center_lat", "radius_m"]) {
      const input = document.createElement("input");
      input.type = "number";
      input.step = "any";
      input.placeholder = field;
      input.className = `coord-${field}`;
      input.addEventListener("input", () => {
        if (this.shapeType.value !== "none") {
          this.shapeSource = "typed";
          this.drawnShape = null;
        }
      });
      this.coordInputs[field] = input;
      grid.appendChild(input);
    }
    section.appendChild(grid);

    const drawRow = document.createElement("div");
    drawRow.className = "draw-row";
    for (const mode of ["rectangle", "circle", "polygon"] as const) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = `draw-${mode}`;
      button.textContent = `Draw ${mode}`;
      button.addEventListener("click", () => this.onDrawRequest?.(mode));
      drawRow.appendChild(button);
    }
    section.appendChild(drawRow);
  }

  private buildFilters(): void {
    const section = this.section("Filters");
    this.dateStart = document.createElement("input");
    this.dateStart.type = "date";
    this.dateStart.className = "date-start";
    this.dateEnd = document.createElement("input");
    this.dateEnd.type = "date";
    this.dateEnd.className = "date-end";
    section.append(this.dateStart, this.dateEnd);

    const seasonRow = document.createElement("div");
    seasonRow.className = "seasons";
    for (const season of SEASONS) {
      seasonRow.appendChild(this.checkbox(this.seasonBoxes, season, season));
    }
    section.appendChild(seasonRow);

    const satRow = document.createElement("div");
    satRow.className = "satellites";
    for (const satellite of SATELLITES) {
      satRow.appendChild(this.checkbox(this.satelliteBoxes, satellite, satellite));
    }
    section.appendChild(satRow);
  }

  private checkbox(
    registry: Record<string, HTMLInputElement>,
    value: string,
    text: string,
  ): HTMLElement {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = value;
    registry[value] = box;
    label.append(box, document.createTextNode(text));
    return label;
  }

  private buildLabels(hierarchy: HierarchyData): void {
    const section = this.section("Labels");

    const switchLabel = document.createElement("label");
    switchLabel.className = "label-switch";
    this.labelSwitch = document.createElement("input");
    this.labelSwitch.type = "checkbox";
    this.labelSwitch.checked = true; // on = no label filtering
    switchLabel.append(this.labelSwitch, document.createTextNode("All labels"));
    section.appendChild(switchLabel);

    this.operatorSelect = document.createElement("select");
    this.operatorSelect.className = "operator";
    for (const op of ["some", "exactly", "at_least_and_more"]) {
      const option = document.createElement("option");
      option.value = op;
      option.textContent = op.replace(/_/g, " ");
      this.operatorSelect.appendChild(option);
    }
    section.appendChild(this.operatorSelect);

    const tree = document.createElement("ul");
    tree.className = "label-tree";
    for (const level1 of hierarchy.levels) {
      const l1Item = document.createElement("li");
      const l1Leaves = level1.children.flatMap((c) => c.leaves);
      l1Item.appendChild(this.groupCheckbox(level1.name, l1Leaves, 1));
      const l2List = document.createElement("ul");
      for (const level2 of level1.children) {
        const l2Item = document.createElement("li");
        l2Item.appendChild(this.groupCheckbox(level2.name, level2.leaves, 2));
        const leafList = document.createElement("ul");
        for (const leaf of level2.leaves) {
          const leafItem = document.createElement("li");
          const label = document.createElement("label");
          const box = document.createElement("input");
          box.type = "checkbox";
          box.dataset.leaf = leaf;
          this.leafBoxes.set(leaf, box);
          label.append(box, document.createTextNode(leaf));
          leafItem.appendChild(label);
          leafList.appendChild(leafItem);
        }
        l2Item.appendChild(leafList);
        l2List.appendChild(l2Item);
      }
      l1Item.appendChild(l2List);
      tree.appendChild(l1Item);
    }
    section.appendChild(tree);
  }

  private groupCheckbox(name: string, leaves: string[], level: number): HTMLElement {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.dataset.group = name;
    box.dataset.level = String(level);
    this.groupBoxes.set(`${level}:${name}`, { box, leaves });
    label.append(box, document.createTextNode(name));
    label.className = `group-l${level}`;
    return label;
  }

  private buildSubmit(): void {
    const section = this.section("Search");
    const renderLabel = document.createElement("label");
    this.renderToggleBox = document.createElement("input");
    this.renderToggleBox.type = "checkbox";
    this.renderToggleBox.className = "render-request";
    renderLabel.append(this.renderToggleBox, document.createTextNode("Render on map"));
    section.appendChild(renderLabel);

    const button = document.createElement("button");
    button.type = "button";
    button.className = "submit-query";
    button.textContent = "Search";
    button.addEventListener("click", () => this.onSubmit?.(this.buildQuery()));
    section.appendChild(button);
  }

  // --- state accessors ----------------------------------------------------

  setDrawnShape(shape: ShapeWire): void {
    this.drawnShape = shape;
    this.shapeSource = "drawn";
    if (shape.type !== "polygon") {
      this.shapeType.value = shape.type;
      for (const [field, input] of Object.entries(this.coordInputs)) {
        const value = (shape as unknown as Record<string, number>)[field];
        input.value = value !== undefined ? String(value) : "";
      }
    }
  }

  setLabelFiltering(enabled: boolean): void {
    this.labelSwitch.checked = !enabled;
  }

  setOperator(op: OperatorWire): void {
    if (op !== "none") {
      this.operatorSelect.value = op;
    }
  }

  checkNode(name: string, level: 1 | 2 | 3): void {
    if (level === 3) {
      const box = this.leafBoxes.get(name);
      if (!box) throw new Error(`unknown leaf ${name}`);
      box.checked = true;
    } else {
      const entry = this.groupBoxes.get(`${level}:${name}`);
      if (!entry) throw new Error(`unknown level-${level} group ${name}`);
      entry.box.checked = true;
    }
  }

  /** Checked hierarchy nodes expanded to their level-3 leaves. */
  selectedLeaves(): string[] {
    const leaves = new Set<string>();
    for (const [leaf, box] of this.leafBoxes) {
      if (box.checked) {
        leaves.add(leaf);
      }
    }
    for (const { box, leaves: groupLeaves } of this.groupBoxes.values()) {
      if (box.checked) {
        for (const leaf of groupLeaves) {
          leaves.add(leaf);
        }
      }
    }
    return [...leaves].sort();
  }

  private typedShape(): ShapeWire | null {
    const value = (field: string) => Number(this.coordInputs[field].value);
    if (this.shapeType.value === "rectangle") {
      return {
        type: "rectangle",
        min_lon: value("min_lon"),
        min_lat: value("min_lat"),
        max_lon: value("max_lon"),
        max_lat: value("max_lat"),
      };
    }
    if (this.shapeType.value === "circle") {
      return {
        type: "circle",
        center_lon: value("center_lon"),
        center_lat: value("center_lat"),
        radius_m: value("radius_m"),
      };
    }
    return null;
  }

  buildQuery(page: number = 0, pageSize: number = 50): QueryRequest {
    const request: QueryRequest = { page, page_size: pageSize };
    const shape = this.shapeSource === "drawn" ? this.drawnShape : this.typedShape();
    if (shape) {
      request.shape = shape;
    }
    if (this.dateStart.value && this.dateEnd.value) {
      request.date_range = { start: this.dateStart.value, end: this.dateEnd.value };
    }
    const seasons = SEASONS.filter((s) => this.seasonBoxes[s].checked);
    if (seasons.length > 0) {
      request.seasons = seasons;
    }
    const satellites = SATELLITES.filter((s) => this.satelliteBoxes[s].checked);
    if (satellites.length > 0) {
      request.satellites = satellites;
    }
    if (this.labelSwitch.checked) {
      request.label_predicate = { operator: "none", selected: [] };
    } else {
      request.label_predicate = {
        operator: this.operatorSelect.value as OperatorWire,
        selected: this.selectedLeaves(),
      };
    }
    if (this.renderToggleBox.checked) {
      request.render = true;
    }
    return request;
  }
}
