"""Batch orchestration: configuration, synthetic data and the subcommands."""
from .commands import cmd_entropy, cmd_offers, cmd_segment, cmd_stream, cmd_train_tree, load_population
from .config import RunConfig, StreamConfig, config_from_dict, load_config
from .synth import SyntheticSpec, generate as cmd_gen_data

__all__ = [
    "RunConfig", "StreamConfig", "SyntheticSpec", "cmd_entropy", "cmd_gen_data", "cmd_offers",
    "cmd_segment", "cmd_stream", "cmd_train_tree", "config_from_dict", "load_config", "load_population",
]
