// SVG rendering of the case network. Colors come from one fixed legend
// shared with the server's DOT export; changing a hex here would desync
// the two renderings.

import type { NetworkDoc, NetworkNode } from "./api.js";
import { computeLayout, DEFAULT_LAYOUT, type LayoutOptions } from "./layout.js";
import { escapeHtml } from "./views.js";

export const NODE_FILLCOLORS: Record<string, string> = {
    case: "#ccffcc",
    address: "#ffe6cc",
    entity: "#ccccff",
    collector_entity: "#ffcccc",
};

const NODE_RADIUS: Record<string, number> = {
    case: 14,
    address: 9,
    entity: 11,
    collector_entity: 13,
};

const EDGE_DASH: Record<string, string> = {
    annotation: "",
    membership: "4 3",
    flow: "",
};

function nodeColor(node: NetworkNode): string {
    return NODE_FILLCOLORS[node.type] ?? "#dddddd";
}

export function renderNetworkSvg(doc: NetworkDoc, options: LayoutOptions = DEFAULT_LAYOUT): string {
    if (doc.nodes.length === 0) {
        return `<p class="empty">Nothing to draw: no annotated cases are visible to your zone.</p>`;
    }
    const positions = computeLayout(
        doc.nodes.map((n) => n.id),
        doc.edges,
        options,
    );

    const edges = doc.edges
        .map((edge) => {
            const a = positions.get(edge.src);
            const b = positions.get(edge.dst);
            if (!a || !b) return "";
            const dash = EDGE_DASH[edge.kind] ?? "";
            return `<line x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" class="edge-${escapeHtml(edge.kind)}"${dash ? ` stroke-dasharray="${dash}"` : ""}/>`;
        })
        .join("\n    ");

    const nodes = doc.nodes
        .map((node) => {
            const p = positions.get(node.id)!;
            const radius = NODE_RADIUS[node.type] ?? 10;
            // case nodes navigate to the case detail view on click
            const caseAttr =
                node.type === "case" ? ` data-case-node="${escapeHtml(node.label)}"` : "";
            return `<g class="node node-${escapeHtml(node.type)}"${caseAttr}>
      <circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${radius}" fill="${nodeColor(node)}" stroke="#555"/>
      <text x="${p.x.toFixed(1)}" y="${(p.y + radius + 11).toFixed(1)}" text-anchor="middle">${escapeHtml(node.label)}</text>
    </g>`;
        })
        .join("\n    ");

    return `<svg viewBox="0 0 ${options.width} ${options.height}" class="network" role="img">
    ${edges}
    ${nodes}
  </svg>`;
}

export function renderLegend(): string {
    const items = Object.entries(NODE_FILLCOLORS)
        .map(
            ([type, color]) =>
                `<li><span class="swatch" style="background:${color}"></span>${escapeHtml(type.replace("_", " "))}</li>`,
        )
        .join("");
    return `<ul class="legend">${items}</ul>`;
}
