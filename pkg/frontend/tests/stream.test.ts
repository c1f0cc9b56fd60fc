import { describe, expect, it } from "vitest";

import { PetStream } from "../src/stream.js";
import type { StreamStatus } from "../src/types.js";
import { FakeSocket, ManualScheduler, frame } from "./helpers.js";

function wired() {
    const sockets: FakeSocket[] = [];
    const scheduler = new ManualScheduler();
    const stream = new PetStream(
        "ws://x/pet/rex/stream",
        (url) => {
            const s = new FakeSocket(url);
            sockets.push(s);
            return s;
        },
        { baseBackoffMs: 100, maxBackoffMs: 1600, scheduler: scheduler.schedule },
    );
    return { stream, sockets, scheduler };
}

describe("PetStream", () => {
    it("delivers frames in strictly increasing tick order", () => {
        const { stream, sockets } = wired();
        const ticks: number[] = [];
        stream.onFrame((f) => ticks.push(f.tick));
        stream.connect();
        sockets[0].open();
        sockets[0].deliver(frame(1));
        sockets[0].deliver(frame(2));
        sockets[0].deliver(frame(2)); // duplicate dropped
        sockets[0].deliver(frame(1)); // stale dropped
        sockets[0].deliver(frame(3));
        expect(ticks).toEqual([1, 2, 3]);
    });

    it("reconnects after a forced drop and resumes frames", () => {
        const { stream, sockets, scheduler } = wired();
        const ticks: number[] = [];
        const statuses: StreamStatus[] = [];
        stream.onFrame((f) => ticks.push(f.tick));
        stream.onStatus((s) => statuses.push(s));
        stream.connect();
        sockets[0].open();
        sockets[0].deliver(frame(5));
        sockets[0].drop(); // server went away
        expect(statuses.at(-1)).toBe("reconnecting");
        scheduler.runNext(); // back-off timer fires
        expect(sockets).toHaveLength(2);
        sockets[1].open();
        expect(statuses.at(-1)).toBe("live");
        sockets[1].deliver(frame(6));
        expect(ticks).toEqual([5, 6]);
    });

    it("backs off exponentially and resets after success", () => {
        const { stream, sockets, scheduler } = wired();
        stream.connect();
        sockets[0].open();
        sockets[0].drop();
        expect(scheduler.runNext()).toBe(100);
        sockets[1].drop(); // fails before opening
        expect(scheduler.runNext()).toBe(200);
        sockets[2].drop();
        expect(scheduler.runNext()).toBe(400);
        sockets[3].open(); // success resets the counter
        sockets[3].drop();
        expect(scheduler.runNext()).toBe(100);
    });

    it("caps the back-off", () => {
        const { stream, sockets, scheduler } = wired();
        stream.connect();
        let delay = 0;
        for (let i = 0; i < 8; i++) {
            sockets[i].drop();
            delay = scheduler.runNext();
        }
        expect(delay).toBe(1600);
    });

    it("stops reconnecting after close", () => {
        const { stream, sockets, scheduler } = wired();
        stream.connect();
        sockets[0].open();
        stream.close();
        expect(scheduler.pending).toHaveLength(0);
        expect(sockets[0].closedByClient).toBe(true);
    });

    it("sends commands over the socket", () => {
        const { stream, sockets } = wired();
        stream.connect();
        sockets[0].open();
        stream.send({ cmd: "feed", prop_id: "bone" });
        expect(JSON.parse(sockets[0].sent[0])).toEqual({ cmd: "feed", prop_id: "bone" });
    });
});
