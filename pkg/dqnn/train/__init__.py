from . import adam, choi, random_state
from ._base import (CHOI_PROTOCOL, RANDOM_STATE_PROTOCOL, TrainConfig, TrainingTrace, check_config, init_network,
                    init_params, plateau_reached, steepest_descent_iteration)
from .adam import AdamState, adam_init, adam_step
from .choi import choi_train
from .random_state import random_state_train

__all__ = [
    "adam", "choi", "random_state",
    "TrainConfig", "TrainingTrace", "CHOI_PROTOCOL", "RANDOM_STATE_PROTOCOL", "check_config", "init_params",
    "init_network", "steepest_descent_iteration", "plateau_reached",
    "AdamState", "adam_init", "adam_step", "choi_train", "random_state_train", "train",
]


def train(net, target, cfg, run_id=None):
    """Dispatch on `cfg.mode`."""
    if cfg.mode == 'random_state':
        return random_state_train(net, target, cfg, run_id)
    return choi_train(net, target, cfg, run_id)
