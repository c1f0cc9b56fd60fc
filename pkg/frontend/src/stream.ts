import type { StreamFrame, StreamStatus } from "./types.js";

export interface WebSocketLike {
    onopen: ((ev: unknown) => void) | null;
    onclose: ((ev: unknown) => void) | null;
    onmessage: ((ev: { data: string }) => void) | null;
    send(data: string): void;
    close(): void;
}

export type SocketFactory = (url: string) => WebSocketLike;

export interface StreamOptions {
    baseBackoffMs?: number;
    maxBackoffMs?: number;
    scheduler?: (fn: () => void, ms: number) => unknown;
}

/**
 * Live state stream for one pet. Reconnects with exponential back-off after a
 * drop and delivers frames in strictly increasing tick order (stale or
 * duplicate ticks after a reconnect are discarded).
 */
export class PetStream {
    private socket: WebSocketLike | null = null;
    private attempts = 0;
    private lastTick = -1;
    private stopped = false;
    private frameHandlers: Array<(frame: StreamFrame) => void> = [];
    private statusHandlers: Array<(status: StreamStatus) => void> = [];
    private readonly baseBackoffMs: number;
    private readonly maxBackoffMs: number;
    private readonly scheduler: (fn: () => void, ms: number) => unknown;

    constructor(
        private url: string,
        private factory: SocketFactory,
        options: StreamOptions = {},
    ) {
        this.baseBackoffMs = options.baseBackoffMs ?? 500;
        this.maxBackoffMs = options.maxBackoffMs ?? 10_000;
        this.scheduler = options.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
    }

    onFrame(handler: (frame: StreamFrame) => void): void {
        this.frameHandlers.push(handler);
    }

    onStatus(handler: (status: StreamStatus) => void): void {
        this.statusHandlers.push(handler);
    }

    get reconnectAttempts(): number {
        return this.attempts;
    }

    nextBackoffMs(): number {
        return Math.min(this.baseBackoffMs * 2 ** this.attempts, this.maxBackoffMs);
    }

    connect(): void {
        if (this.stopped) return;
        this.emitStatus(this.attempts === 0 ? "connecting" : "reconnecting");
        this.socket = this.factory(this.url);
        this.socket.onopen = () => {
            this.attempts = 0;
            this.emitStatus("live");
        };
        this.socket.onmessage = (ev) => {
            const frame = JSON.parse(ev.data) as StreamFrame;
            if (frame.tick <= this.lastTick) return; // stale after reconnect
            this.lastTick = frame.tick;
            for (const handler of this.frameHandlers) handler(frame);
        };
        this.socket.onclose = () => {
            if (this.stopped) return;
            const delay = this.nextBackoffMs();
            this.attempts += 1;
            this.emitStatus("reconnecting");
            this.scheduler(() => this.connect(), delay);
        };
    }

    /** Send a command over the bidirectional channel (feed, environment). */
    send(command: Record<string, unknown>): void {
        this.socket?.send(JSON.stringify(command));
    }

    close(): void {
        this.stopped = true;
        this.socket?.close();
        this.emitStatus("closed");
    }

    private emitStatus(status: StreamStatus): void {
        for (const handler of this.statusHandlers) handler(status);
    }
}
