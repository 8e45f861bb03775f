import { describe, expect, it } from "vitest";

import type { NetworkDoc } from "../src/api.js";
import { NODE_FILLCOLORS, renderLegend, renderNetworkSvg } from "../src/network.js";

function mount(html: string): HTMLElement {
    const host = document.createElement("div");
    host.innerHTML = html;
    return host;
}

const THREE_NODES: NetworkDoc = {
    nodes: [
        { id: "case:BY1001-000001-21/1", type: "case", label: "BY1001-000001-21/1" },
        { id: "addr:P1", type: "address", label: "P1" },
        { id: "ent:P1", type: "entity", label: "P1" },
    ],
    edges: [
        { src: "case:BY1001-000001-21/1", dst: "addr:P1", kind: "annotation" },
        { src: "addr:P1", dst: "ent:P1", kind: "membership" },
    ],
};

describe("color legend", () => {
    it("pins the exact hex per node type", () => {
        expect(NODE_FILLCOLORS).toEqual({
            case: "#ccffcc",
            address: "#ffe6cc",
            entity: "#ccccff",
            collector_entity: "#ffcccc",
        });
    });

    it("renders one swatch per type", () => {
        const host = mount(renderLegend());
        const swatches = [...host.querySelectorAll(".legend .swatch")] as HTMLElement[];
        expect(swatches).toHaveLength(4);
        const colors = swatches.map((s) => s.style.background);
        expect(colors).toEqual(["rgb(204, 255, 204)", "rgb(255, 230, 204)", "rgb(204, 204, 255)", "rgb(255, 204, 204)"]);
    });
});

describe("network svg", () => {
    it("draws the three-node fixture with legend colors", () => {
        const host = mount(renderNetworkSvg(THREE_NODES));
        const circles = [...host.querySelectorAll("circle")];
        expect(circles).toHaveLength(3);
        const fillOf = (selector: string) =>
            host.querySelector(`${selector} circle`)!.getAttribute("fill");
        expect(fillOf(".node-case")).toBe("#ccffcc");
        expect(fillOf(".node-address")).toBe("#ffe6cc");
        expect(fillOf(".node-entity")).toBe("#ccccff");
    });

    it("renders exactly as many nodes as the payload carries", () => {
        const nodes = Array.from({ length: 40 }, (_, i) => ({
            id: `addr:a${i}`,
            type: "address",
            label: `a${i}`,
        }));
        const edges = nodes.slice(1).map((node, i) => ({
            src: nodes[i].id,
            dst: node.id,
            kind: "membership",
        }));
        const host = mount(renderNetworkSvg({ nodes, edges }));
        expect(host.querySelectorAll("circle")).toHaveLength(nodes.length);
        expect(host.querySelectorAll("line")).toHaveLength(edges.length);
    });

    it("marks only case nodes as navigation targets", () => {
        const host = mount(renderNetworkSvg(THREE_NODES));
        const targets = [...host.querySelectorAll("[data-case-node]")] as HTMLElement[];
        expect(targets).toHaveLength(1);
        expect(targets[0].dataset.caseNode).toBe("BY1001-000001-21/1");
    });

    it("dashes membership edges and keeps annotation edges solid", () => {
        const host = mount(renderNetworkSvg(THREE_NODES));
        expect(host.querySelector("line.edge-membership")!.getAttribute("stroke-dasharray")).toBe("4 3");
        expect(host.querySelector("line.edge-annotation")!.getAttribute("stroke-dasharray")).toBeNull();
    });

    it("is byte-stable across renders", () => {
        expect(renderNetworkSvg(THREE_NODES)).toBe(renderNetworkSvg(THREE_NODES));
    });

    it("shows an empty state instead of a blank canvas", () => {
        const host = mount(renderNetworkSvg({ nodes: [], edges: [] }));
        expect(host.querySelector("svg")).toBeNull();
        expect(host.querySelector(".empty")).not.toBeNull();
    });
});
