import { edgeStrokeWidth, forceLayout } from "./layout.js";
import type { ConsoleViewModel } from "./viewmodel.js";
import { EMOTIONS } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CHANNELS = ["S1", "S2", "S3", "S4"] as const;
const CHANNEL_COLORS: Record<string, string> = {
    S1: "#2a9d8f", S2: "#e76f51", S3: "#457b9d", S4: "#b5179e",
};

export function renderBadge(el: HTMLElement, vm: ConsoleViewModel): void {
    el.textContent = vm.emotion;
    el.dataset.emotion = vm.emotion;
}

/** Probability bars; each bar carries the streamed value verbatim in data-value. */
export function renderBars(el: HTMLElement, vm: ConsoleViewModel): void {
    el.replaceChildren();
    vm.bars.forEach((value, i) => {
        const row = document.createElement("div");
        row.className = "bar-row";
        const label = document.createElement("span");
        label.textContent = EMOTIONS[i];
        const bar = document.createElement("div");
        bar.className = "bar";
        bar.dataset.value = String(value);
        bar.style.width = `${Math.round(value * 100)}%`;
        row.append(label, bar);
        el.append(row);
    });
}

export function renderComfort(el: HTMLElement, vm: ConsoleViewModel): void {
    const value = vm.comfort;
    el.dataset.value = value === null ? "" : String(value);
    el.textContent = value === null ? "comfort: -" : `comfort: ${value}`;
}

export function renderCurves(svg: SVGSVGElement, vm: ConsoleViewModel,
                             width = 360, height = 120): void {
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.replaceChildren();
    const window_ = vm.stimulusWindow;
    if (window_.length < 2) return;
    const maxVal = Math.max(0.2, ...window_.flatMap((p) => CHANNELS.map((c) => p[c])));
    for (const channel of CHANNELS) {
        const line = document.createElementNS(SVG_NS, "polyline");
        const points = window_
            .map((p, i) => {
                const x = (i / (window_.length - 1)) * width;
                const y = height - (p[channel] / maxVal) * (height - 4);
                return `${x.toFixed(1)},${y.toFixed(1)}`;
            })
            .join(" ");
        line.setAttribute("points", points);
        line.setAttribute("fill", "none");
        line.setAttribute("stroke", CHANNEL_COLORS[channel]);
        line.dataset.channel = channel;
        svg.append(line);
    }
}

export function renderRadar(svg: SVGSVGElement, vm: ConsoleViewModel, size = 160): void {
    svg.setAttribute("viewBox", `0 0 ${size} ${size}`);
    svg.replaceChildren();
    const values = vm.radar;
    if (!values.length) return;
    const max = Math.max(...values, 1e-9);
    const cx = size / 2;
    const polygon = document.createElementNS(SVG_NS, "polygon");
    const points = values
        .map((v, i) => {
            const angle = (2 * Math.PI * i) / values.length - Math.PI / 2;
            const r = (v / max) * (size / 2 - 8);
            return `${(cx + r * Math.cos(angle)).toFixed(1)},${(cx + r * Math.sin(angle)).toFixed(1)}`;
        })
        .join(" ");
    polygon.setAttribute("points", points);
    polygon.setAttribute("fill", "rgba(69,123,157,0.4)");
    polygon.dataset.values = values.join(",");
    svg.append(polygon);
}

export function renderRecommendations(el: HTMLElement, vm: ConsoleViewModel): void {
    el.replaceChildren();
    for (const card of vm.recommendations) {
        const item = document.createElement("div");
        item.className = "rec-card";
        item.dataset.candidate = card.candidate;
        item.dataset.phase = card.phase;
        item.dataset.score = String(card.score);
        const title = document.createElement("strong");
        title.textContent = `${card.candidate} (${card.phase})`;
        const detail = document.createElement("small");
        detail.textContent = Object.entries(card.explanation)
            .map(([k, v]) => `${k}=${v}`)
            .join("  ");
        item.append(title, detail);
        el.append(item);
    }
}

export function renderReward(el: HTMLElement, vm: ConsoleViewModel): void {
    el.replaceChildren();
    if (!vm.reward) return;
    const total = document.createElement("div");
    total.dataset.total = String(vm.reward.total);
    total.textContent = `total reward: ${vm.reward.total}`;
    el.append(total);
    for (const edge of vm.reward.edges) {
        const row = document.createElement("div");
        row.dataset.peer = edge.peer;
        row.dataset.weight = String(edge.weight);
        row.textContent = `${edge.peer}: m=${edge.m} weight=${edge.weight}`;
        el.append(row);
    }
}

export function renderGraph(svg: SVGSVGElement, vm: ConsoleViewModel,
                            width = 420, height = 300): void {
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.replaceChildren();
    const graph = vm.graph;
    if (graph.users.length === 0) return; // empty canvas, no errors
    const positions = new Map(forceLayout(graph, width, height).map((p) => [p.id, p]));
    const maxWeight = Math.max(0, ...graph.edges.map((e) => e.weight));
    for (const edge of graph.edges) {
        const a = positions.get(edge.u);
        const b = positions.get(edge.v);
        if (!a || !b) continue;
        const line = document.createElementNS(SVG_NS, "line");
        line.setAttribute("x1", a.x.toFixed(1));
        line.setAttribute("y1", a.y.toFixed(1));
        line.setAttribute("x2", b.x.toFixed(1));
        line.setAttribute("y2", b.y.toFixed(1));
        line.setAttribute("stroke", "#999");
        line.setAttribute("stroke-width", edgeStrokeWidth(edge.weight, maxWeight).toFixed(2));
        line.dataset.weight = String(edge.weight);
        svg.append(line);
    }
    for (const user of graph.users) {
        const pos = positions.get(user.user_id)!;
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", pos.x.toFixed(1));
        circle.setAttribute("cy", pos.y.toFixed(1));
        circle.setAttribute("r", "5");
        circle.setAttribute("fill", "#1d3557");
        circle.dataset.user = user.user_id;
        svg.append(circle);
    }
}

export function renderBanner(el: HTMLElement, vm: ConsoleViewModel): void {
    el.dataset.status = vm.status;
    el.textContent = vm.status === "live" ? "" : `stream ${vm.status}...`;
    el.style.display = vm.status === "live" ? "none" : "block";
}
