import { ApiClient } from "./api.js";
import { PetStream } from "./stream.js";
import { ConsoleViewModel } from "./viewmodel.js";
import {
    renderBadge,
    renderBanner,
    renderBars,
    renderComfort,
    renderCurves,
    renderGraph,
    renderRadar,
    renderRecommendations,
    renderReward,
} from "./render.js";

function byId<T extends HTMLElement>(id: string): T {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
}

export function boot(): void {
    const params = new URLSearchParams(window.location.search);
    const petId = params.get("pet") ?? "rex";
    const userId = params.get("user") ?? "u0";
    const host = params.get("host") ?? window.location.host;

    const api = new ApiClient(`http://${host}`);
    const vm = new ConsoleViewModel(api, petId);
    const stream = new PetStream(
        `ws://${host}/pet/${petId}/stream`,
        (url) => new WebSocket(url) as unknown as import("./stream.js").WebSocketLike,
    );

    stream.onStatus((status) => {
        vm.applyStatus(status);
        renderBanner(byId("banner"), vm);
    });
    stream.onFrame((frame) => {
        vm.applyFrame(frame);
        renderBadge(byId("badge"), vm);
        renderBars(byId("bars"), vm);
        renderComfort(byId("comfort"), vm);
        renderCurves(byId("curves") as unknown as SVGSVGElement, vm);
        renderRadar(byId("radar") as unknown as SVGSVGElement, vm);
    });
    stream.connect();

    byId("feed-form").addEventListener("submit", (ev) => {
        ev.preventDefault();
        const propId = (byId<HTMLSelectElement>("prop")).value;
        void vm.feedProp(propId);
    });

    byId("env-form").addEventListener("submit", (ev) => {
        ev.preventDefault();
        const readings = ["slider-a", "slider-b", "slider-c"]
            .map((id) => Number(byId<HTMLInputElement>(id).value));
        const threshold = Number(byId<HTMLInputElement>("threshold").value);
        void vm.setEnvironment(readings, threshold);
    });

    const refresh = () =>
        vm.refreshDashboard(userId).then(() => {
            renderRecommendations(byId("recommendations"), vm);
            renderReward(byId("reward"), vm);
            renderGraph(byId("graph") as unknown as SVGSVGElement, vm);
        }).catch(() => undefined);
    void refresh();
    setInterval(refresh, 5000);
}

if (typeof window !== "undefined" && typeof document !== "undefined"
    && document.getElementById("badge")) {
    boot();
}
