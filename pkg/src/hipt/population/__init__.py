from .archive import ArchiveError, load_population, save_population
from .crossplay import (
    classify_play_styles,
    crossplay_matrix,
    pair_mean_return,
    write_matrix_csv,
    write_matrix_pgm,
)
from .jsd import jsd_objective_and_grad, jsd_term
from .training import PopulationConfig, train_population
from .types import (
    MID_BAND,
    TIER_NAMES,
    CheckpointRecord,
    CrossplayMatrix,
    PartnerPopulation,
    PopulationMember,
    select_mid_checkpoint,
)
