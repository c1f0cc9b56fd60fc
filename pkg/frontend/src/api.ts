import type { GraphSnapshot, RecommendationCard, RewardSummary, StreamFrame } from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(public status: number, message: string) {
        super(message);
    }
}

/** Thin typed client over the service endpoints. */
export class ApiClient {
    constructor(
        private baseUrl: string,
        private fetchImpl: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
        if (!response.ok) {
            throw new ApiError(response.status, `${path} -> ${response.status}`);
        }
        return (await response.json()) as T;
    }

    petState(petId: string): Promise<StreamFrame> {
        return this.request(`/pet/${petId}/state`);
    }

    feed(petId: string, propId: string): Promise<unknown> {
        return this.request(`/pet/${petId}/feed`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ prop_id: propId }),
        });
    }

    setEnvironment(petId: string, readings: number[], comfortThreshold: number): Promise<unknown> {
        return this.request(`/pet/${petId}/environment`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ readings, comfort_threshold: comfortThreshold }),
        });
    }

    recommendations(userId: string): Promise<RecommendationCard[]> {
        return this.request(`/users/${userId}/recommendations`);
    }

    reward(userId: string): Promise<RewardSummary> {
        return this.request(`/users/${userId}/reward`);
    }

    graph(): Promise<GraphSnapshot> {
        return this.request("/graph");
    }

    completeTask(taskId: string): Promise<unknown> {
        return this.request(`/tasks/${taskId}/complete`, { method: "POST" });
    }
}
