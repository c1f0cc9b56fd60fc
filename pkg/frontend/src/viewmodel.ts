import type { ApiClient } from "./api.js";
import type {
    GraphSnapshot,
    RecommendationCard,
    RewardSummary,
    StreamFrame,
    StreamStatus,
} from "./types.js";

export interface StimulusPoint {
    tick: number;
    S1: number;
    S2: number;
    S3: number;
    S4: number;
}

/**
 * State behind the console. Every number here is copied from a stream frame
 * or an API payload; the only client-side work is windowing for the curves
 * and the one-in-flight guards on the mutating controls.
 */
export class ConsoleViewModel {
    frame: StreamFrame | null = null;
    stimulusWindow: StimulusPoint[] = [];
    recommendations: RecommendationCard[] = [];
    reward: RewardSummary | null = null;
    graph: GraphSnapshot = { users: [], edges: [] };
    status: StreamStatus = "connecting";
    feedRequests = 0;
    environmentRequests = 0;

    private feedInFlight = false;
    private environmentInFlight = false;

    constructor(
        private api: ApiClient,
        private petId: string,
        private windowSize = 120,
    ) {}

    applyFrame(frame: StreamFrame): void {
        this.frame = frame;
        this.stimulusWindow.push({ tick: frame.tick, ...frame.stimuli });
        if (this.stimulusWindow.length > this.windowSize) {
            this.stimulusWindow.splice(0, this.stimulusWindow.length - this.windowSize);
        }
        // a new tick means the previous mutation has been applied
        this.feedInFlight = false;
        this.environmentInFlight = false;
    }

    applyStatus(status: StreamStatus): void {
        this.status = status;
    }

    applyRecommendations(cards: RecommendationCard[]): void {
        this.recommendations = cards;
    }

    applyReward(summary: RewardSummary): void {
        this.reward = summary;
    }

    applyGraph(snapshot: GraphSnapshot): void {
        this.graph = snapshot;
    }

    /** Badge text straight off the stream. */
    get emotion(): string {
        return this.frame?.emotion ?? "-";
    }

    /** Probability bars, verbatim stream values. */
    get bars(): number[] {
        return this.frame ? [...this.frame.p] : [];
    }

    /** Personality radar values, verbatim stream values. */
    get radar(): number[] {
        return this.frame ? [...this.frame.personality] : [];
    }

    get comfort(): number | null {
        return this.frame?.comfort ?? null;
    }

    /** Feed once; further clicks are ignored until the next frame arrives. */
    async feedProp(propId: string): Promise<boolean> {
        if (this.feedInFlight) return false;
        this.feedInFlight = true;
        this.feedRequests += 1;
        try {
            await this.api.feed(this.petId, propId);
        } catch (err) {
            this.feedInFlight = false;
            throw err;
        }
        return true;
    }

    /** Post the slider readings as a sensor frame; one in flight at a time. */
    async setEnvironment(readings: number[], comfortThreshold: number): Promise<boolean> {
        if (this.environmentInFlight) return false;
        this.environmentInFlight = true;
        this.environmentRequests += 1;
        try {
            await this.api.setEnvironment(this.petId, readings, comfortThreshold);
        } catch (err) {
            this.environmentInFlight = false;
            throw err;
        }
        return true;
    }

    async refreshDashboard(userId: string): Promise<void> {
        const [cards, reward, graph] = await Promise.all([
            this.api.recommendations(userId),
            this.api.reward(userId),
            this.api.graph(),
        ]);
        this.applyRecommendations(cards);
        this.applyReward(reward);
        this.applyGraph(graph);
    }
}
