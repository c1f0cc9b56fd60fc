// Wire types mirroring the service's JSON encoding (version 1). The console
// displays these values verbatim; it never recomputes domain quantities.

export const EMOTIONS = [
    "anger", "disgust", "fear", "happy", "sad", "surprise", "neutral",
] as const;

export type EmotionName = (typeof EMOTIONS)[number];

export interface StreamFrame {
    v: number;
    tick: number;
    time: number;
    emotion: EmotionName;
    p: number[];
    stimuli: { S1: number; S2: number; S3: number; S4: number };
    personality: number[];
    k: number;
    comfort: number | null;
}

export interface RecommendationCard {
    candidate: string;
    score: number;
    phase: "similarity" | "network";
    explanation: Record<string, unknown>;
}

export interface RewardEdge {
    peer: string;
    m: number;
    weight: number;
}

export interface RewardSummary {
    total: number;
    alpha: number;
    edges: RewardEdge[];
    collective_activities: number;
    props: Record<string, number>;
    achievements: string[];
}

export interface GraphUser {
    user_id: string;
    lat: number;
    lon: number;
}

export interface GraphEdge {
    u: string;
    v: string;
    m: number;
    weight: number;
}

export interface GraphSnapshot {
    users: GraphUser[];
    edges: GraphEdge[];
}

export type StreamStatus = "connecting" | "live" | "reconnecting" | "closed";
