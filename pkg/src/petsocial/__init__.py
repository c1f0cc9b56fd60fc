"""Pet-robot social platform simulator.

Social graph with task-weighted friendships, a logistic reward mechanism,
two-phase friend recommendation, a probabilistic pet emotion engine with
decaying stimuli, inference kernels for face-emotion recognition, an
agent-based experiment harness, and a service API with a live state stream.
"""

from .emotion import (
    EMOTIONS,
    Emotion,
    EmotionEngine,
    EngineConfig,
    PersonalityVector,
    PropItem,
    SensorFrame,
    StimulusTrace,
    TransitionStats,
    comfort,
    default_transition_stats,
    env_stimuli,
    breeder_stimuli,
    load_transition_stats,
    personality_update,
    transition_intensity,
    transition_probabilities,
)
from .graph import OfflineTask, SocialEdge, SocialGraph, Store, UserProfile, haversine_km
from .perception import (
    ConfusionMatrix,
    NetworkSpec,
    batchnorm_infer,
    classify,
    default_confusion_matrix,
    depthwise_separable_conv,
    load_confusion_matrix,
    noisy_recognize,
    residual_apply,
    softmax,
)
from .recommend import (
    Recommendation,
    RecommendParams,
    common_neighbor_decomposition,
    network_score,
    recommend,
    similarity,
    similarity_candidates,
)
from .rewards import RewardConfig, RewardLedger, RewardParams, edge_weight, total_reward
from .simulator import (
    SimConfig,
    SimMetrics,
    TrialConfig,
    loneliness_proxy,
    run,
    run_emotion_trial,
)

__version__ = "0.1.0"
