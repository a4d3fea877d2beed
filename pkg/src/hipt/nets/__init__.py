from .adam import AdamState, DivergenceError, LinearSchedule, adam_update, lr_decay_schedule
from .net import (
    backward_step,
    forward,
    init_recurrent_state,
    log_softmax,
    low_logits_all_priors,
    one_hot,
    softmax,
)
from .modelio import ModelFileError, load_model, params_digest, save_model
from .spec import (
    NetworkSpec,
    ParamStore,
    init_params,
    param_count,
    param_table,
    zero_gradient,
)
