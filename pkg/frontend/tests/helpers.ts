import type { WebSocketLike } from "../src/stream.js";
import type { StreamFrame } from "../src/types.js";

export function frame(tick: number, overrides: Partial<StreamFrame> = {}): StreamFrame {
    return {
        v: 1,
        tick,
        time: tick,
        emotion: "neutral",
        p: [0.1, 0.1, 0.1, 0.2, 0.1, 0.1, 0.3],
        stimuli: { S1: 0, S2: 0, S3: 0, S4: 0 },
        personality: [1, 1, 1, 1, 1, 1, 1],
        k: 3,
        comfort: null,
        ...overrides,
    };
}

export class FakeSocket implements WebSocketLike {
    onopen: ((ev: unknown) => void) | null = null;
    onclose: ((ev: unknown) => void) | null = null;
    onmessage: ((ev: { data: string }) => void) | null = null;
    sent: string[] = [];
    closedByClient = false;

    constructor(public url: string) {}

    open(): void {
        this.onopen?.({});
    }

    deliver(payload: unknown): void {
        this.onmessage?.({ data: JSON.stringify(payload) });
    }

    drop(): void {
        this.onclose?.({});
    }

    send(data: string): void {
        this.sent.push(data);
    }

    close(): void {
        this.closedByClient = true;
        this.onclose?.({});
    }
}

export class ManualScheduler {
    pending: Array<{ fn: () => void; ms: number }> = [];

    schedule = (fn: () => void, ms: number): unknown => {
        this.pending.push({ fn, ms });
        return this.pending.length;
    };

    runNext(): number {
        const job = this.pending.shift();
        if (!job) throw new Error("nothing scheduled");
        job.fn();
        return job.ms;
    }
}

export interface RequestLog {
    url: string;
    method: string;
    body: unknown;
}

/** fetch stub returning canned JSON payloads keyed by "METHOD path". */
export function fakeFetch(routes: Record<string, unknown>, log: RequestLog[] = []) {
    return async (input: string, init?: RequestInit): Promise<Response> => {
        const method = init?.method ?? "GET";
        const path = input.replace(/^https?:\/\/[^/]+/, "");
        log.push({ url: path, method, body: init?.body ? JSON.parse(String(init.body)) : null });
        const key = `${method} ${path}`;
        if (!(key in routes)) {
            return new Response(JSON.stringify({ detail: "not found" }), { status: 404 });
        }
        const payload = routes[key];
        const value = typeof payload === "function" ? (payload as () => unknown)() : payload;
        return new Response(JSON.stringify(value), {
            status: 200,
            headers: { "content-type": "application/json" },
        });
    };
}
