"""bandit-lens: operator console for contextual bandit systems.

Computes counterfactual value gains from logged bandit feedback via
off-policy evaluation, validates them against a ground-truth simulator,
and assembles the operator dashboard payload.
"""

from .config import (
    Arm,
    EnvironmentConfig,
    EstimatorConfig,
    ExperimentConfig,
    GoalMetric,
    NoiseConfig,
    PolicyConfig,
    default_config,
    load_config,
)
from .context import (
    CategoricalField,
    ContextSchema,
    ContextVector,
    NumericField,
    context_key,
    encode_context,
)
from .dashboard import DashboardPayload, assemble_dashboard, payload_to_json
from .exceptions import (
    AblationError,
    BanditLensError,
    ConfigError,
    EncodingError,
    EstimatorError,
    IngestError,
)
from .logstore import LogRecord, LogStore, LogView, ingest_logs, write_log_file
from .models import LinearRewardModel
from .ope import (
    ValueEstimate,
    direct_method,
    doubly_robust,
    ips,
    on_policy_value,
    snips,
)
from .policies import (
    ConstantArmPolicy,
    EpsilonGreedyPolicy,
    PolicySnapshot,
    ThompsonSamplingPolicy,
    UcbPolicy,
    choose_arm,
    load_snapshot,
    policy_from_config,
    save_snapshot,
)
from .simulator import (
    Environment,
    GroundTruthValue,
    replay_frozen,
    run_online,
    simulate_value,
    true_policy_value,
)
from .value_gain import (
    AblationSpec,
    ValueGainReport,
    build_ablated_policy,
    value_gain,
)

__version__ = "0.1.0"
