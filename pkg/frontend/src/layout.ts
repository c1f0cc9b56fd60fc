import type { GraphSnapshot } from "./types.js";

export interface NodePosition {
    id: string;
    x: number;
    y: number;
}

// deterministic pseudorandom jitter so layouts are reproducible
function mulberry32(seed: number): () => number {
    let a = seed >>> 0;
    return () => {
        a = (a + 0x6d2b79f5) >>> 0;
        let t = Math.imul(a ^ (a >>> 15), 1 | a);
        t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

/**
 * Small force layout: spring attraction along edges, pairwise repulsion,
 * centering pull. Pure presentation geometry; domain values are untouched.
 */
export function forceLayout(
    graph: GraphSnapshot,
    width: number,
    height: number,
    iterations = 120,
): NodePosition[] {
    const n = graph.users.length;
    if (n === 0) return [];
    const rand = mulberry32(n * 2654435761);
    const xs = new Float64Array(n);
    const ys = new Float64Array(n);
    const index = new Map<string, number>();
    graph.users.forEach((user, i) => {
        index.set(user.user_id, i);
        const angle = (2 * Math.PI * i) / n;
        const radius = Math.min(width, height) * 0.35 * (0.8 + 0.4 * rand());
        xs[i] = width / 2 + radius * Math.cos(angle);
        ys[i] = height / 2 + radius * Math.sin(angle);
    });
    const springLength = Math.min(width, height) / Math.max(2, Math.sqrt(n));
    const edges = graph.edges
        .map((e) => [index.get(e.u), index.get(e.v)] as const)
        .filter((pair): pair is readonly [number, number] =>
            pair[0] !== undefined && pair[1] !== undefined);

    for (let step = 0; step < iterations; step++) {
        const cool = 1 - step / iterations;
        const fx = new Float64Array(n);
        const fy = new Float64Array(n);
        for (let i = 0; i < n; i++) {
            for (let j = i + 1; j < n; j++) {
                const dx = xs[i] - xs[j];
                const dy = ys[i] - ys[j];
                const d2 = dx * dx + dy * dy + 1e-6;
                const push = (springLength * springLength) / d2;
                fx[i] += dx * push;
                fy[i] += dy * push;
                fx[j] -= dx * push;
                fy[j] -= dy * push;
            }
        }
        for (const [a, b] of edges) {
            const dx = xs[b] - xs[a];
            const dy = ys[b] - ys[a];
            const dist = Math.sqrt(dx * dx + dy * dy) + 1e-6;
            const pull = (dist - springLength) / dist * 0.1;
            fx[a] += dx * pull;
            fy[a] += dy * pull;
            fx[b] -= dx * pull;
            fy[b] -= dy * pull;
        }
        for (let i = 0; i < n; i++) {
            fx[i] += (width / 2 - xs[i]) * 0.01;
            fy[i] += (height / 2 - ys[i]) * 0.01;
            xs[i] = Math.max(8, Math.min(width - 8, xs[i] + fx[i] * cool));
            ys[i] = Math.max(8, Math.min(height - 8, ys[i] + fy[i] * cool));
        }
    }
    return graph.users.map((user, i) => ({ id: user.user_id, x: xs[i], y: ys[i] }));
}

/** Edge stroke width proportional to the server-computed weight. */
export function edgeStrokeWidth(weight: number, maxWeight: number, maxPx = 6): number {
    if (maxWeight <= 0) return 1;
    return Math.max(0.5, (weight / maxWeight) * maxPx);
}
