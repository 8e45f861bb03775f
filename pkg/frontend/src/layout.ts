/**
 * Deterministic force-directed layout.
 *
 * Both the initial placement (seeded PRNG) and the iteration order (array
 * order) are fixed, so the same document always lands on the same pixel
 * positions. Tests and documentation screenshots depend on that; nothing
 * here may call Math.random.
 */

export interface LayoutPoint {
    x: number;
    y: number;
}

export interface LayoutEdge {
    src: string;
    dst: string;
}

// mulberry32: small, fast, good enough for scatter placement.
export function seededRandom(seed: number): () => number {
    let state = seed >>> 0;
    return () => {
        state = (state + 0x6d2b79f5) >>> 0;
        let t = state;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

export interface LayoutOptions {
    width: number;
    height: number;
    seed: number;
    iterations: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = {
    width: 800,
    height: 600,
    seed: 42,
    iterations: 150,
};

export function computeLayout(
    nodeIds: string[],
    edges: LayoutEdge[],
    options: LayoutOptions = DEFAULT_LAYOUT,
): Map<string, LayoutPoint> {
    const { width, height, seed, iterations } = options;
    const positions = new Map<string, LayoutPoint>();
    if (nodeIds.length === 0) return positions;

    const rand = seededRandom(seed);
    const margin = 40;
    for (const id of nodeIds) {
        positions.set(id, {
            x: margin + rand() * (width - 2 * margin),
            y: margin + rand() * (height - 2 * margin),
        });
    }
    if (nodeIds.length === 1) {
        positions.set(nodeIds[0], { x: width / 2, y: height / 2 });
        return positions;
    }

    const k = Math.sqrt((width * height) / nodeIds.length);
    const index = new Map(nodeIds.map((id, i) => [id, i]));
    const pts = nodeIds.map((id) => positions.get(id)!);
    const adjacency: Array<[number, number]> = [];
    for (const edge of edges) {
        const a = index.get(edge.src);
        const b = index.get(edge.dst);
        if (a !== undefined && b !== undefined && a !== b) adjacency.push([a, b]);
    }

    for (let step = 0; step < iterations; step++) {
        const temperature = (k / 2) * (1 - step / iterations);
        const dx = new Float64Array(pts.length);
        const dy = new Float64Array(pts.length);

        for (let i = 0; i < pts.length; i++) {
            for (let j = i + 1; j < pts.length; j++) {
                let vx = pts[i].x - pts[j].x;
                let vy = pts[i].y - pts[j].y;
                // coincident points would divide by zero; nudge apart
                // deterministically by index order
                if (vx === 0 && vy === 0) vx = 0.01 * (i - j);
                const distSq = vx * vx + vy * vy;
                const force = (k * k) / distSq;
                dx[i] += vx * force;
                dy[i] += vy * force;
                dx[j] -= vx * force;
                dy[j] -= vy * force;
            }
        }

        for (const [a, b] of adjacency) {
            const vx = pts[a].x - pts[b].x;
            const vy = pts[a].y - pts[b].y;
            const dist = Math.sqrt(vx * vx + vy * vy) || 0.01;
            const force = dist / k;
            dx[a] -= vx * force;
            dy[a] -= vy * force;
            dx[b] += vx * force;
            dy[b] += vy * force;
        }

        for (let i = 0; i < pts.length; i++) {
            const len = Math.sqrt(dx[i] * dx[i] + dy[i] * dy[i]) || 1;
            const scale = Math.min(len, temperature) / len;
            pts[i].x += dx[i] * scale;
            pts[i].y += dy[i] * scale;
            pts[i].x = Math.min(width - margin, Math.max(margin, pts[i].x));
            pts[i].y = Math.min(height - margin, Math.max(margin, pts[i].y));
        }
    }

    nodeIds.forEach((id, i) => positions.set(id, { x: pts[i].x, y: pts[i].y }));
    return positions;
}
