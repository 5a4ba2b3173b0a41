/** Instance result diff list: rows grouped by status with added/removed
 * badges, mirroring the canvas palette. */

import { PALETTES, type Palette } from "./styling.js";
import type { InstanceDiffDoc } from "./types.js";

const GROUPS: { key: keyof InstanceDiffDoc; label: string; badge: string }[] = [
  { key: "added", label: "Added", badge: "+" },
  { key: "removed", label: "Removed", badge: "−" },
  { key: "shared", label: "Shared", badge: "" },
];

export function renderInstanceDiff(
  container: HTMLElement,
  diff: InstanceDiffDoc,
  palette: Palette = "default",
): void {
  container.replaceChildren();
  const list = document.createElement("div");
  list.className = "pq-instances";
  for (const group of GROUPS) {
    const keys = diff[group.key];
    const section = document.createElement("section");
    section.className = `pq-instance-group pq-instance-${group.key}`;
    section.dataset.status = group.key;

    const heading = document.createElement("h4");
    const paletteKey = group.key === "removed" ? "deleted" : group.key;
    heading.style.color = PALETTES[palette][paletteKey as "added" | "deleted" | "shared"];
    heading.textContent = `${group.label} (${keys.length})`;
    section.appendChild(heading);

    for (const key of keys) {
      const row = document.createElement("div");
      row.className = "pq-instance-row";
      if (group.badge) {
        const badge = document.createElement("span");
        badge.className = "pq-instance-badge";
        badge.textContent = group.badge;
        row.appendChild(badge);
      }
      const text = document.createElement("span");
      text.textContent = key.join("  ·  ");
      row.appendChild(text);
      section.appendChild(row);
    }
    list.appendChild(section);
  }
  container.appendChild(list);
}
