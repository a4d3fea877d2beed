from .engine import (
    ACTION_INDEX,
    ACTION_NAMES,
    DELIVERY_REWARD,
    EAST,
    HELD_DISH,
    HELD_NONE,
    HELD_ONION,
    HELD_SOUP,
    INTERACT,
    NORTH,
    NUM_ACTIONS,
    SOUTH,
    STAY,
    WEST,
    Event,
    PlayerState,
    ShapedReward,
    ShapingConfig,
    StepOutcome,
    TerminalStepError,
    WorldState,
    reset,
    state_digest,
    state_from_dict,
    state_to_dict,
    step,
)
from .episode import DEFAULT_HORIZON, EpisodeResult, Policy, run_episode, sample_action
from .features import decode_observation, encode_observation, observation_dim
from .layout import (
    BUNDLED_LAYOUT_NAMES,
    Layout,
    LayoutError,
    MalformedCellError,
    MissingCellKindError,
    OpenBoundaryError,
    RaggedGridError,
    StartCountMismatch,
    bundled_layouts,
    canonical_layout_text,
    load_layout,
    parse_layout,
    serialize_layout,
)
from .trajlog import (
    LoggedEpisode,
    ReplayMismatchError,
    read_episodes,
    replay_episode,
    replay_file,
    write_episode,
)
