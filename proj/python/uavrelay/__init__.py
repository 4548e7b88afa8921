"""UAV decode-and-forward relay simulator."""

from ._core import (
    Model,
    Realization,
    config_hash,
    default_config,
    delay_sweep,
    generate_dataset,
    grid,
    little_delay,
    load_dataset_size,
    run,
    train,
)

__all__ = [
    "Model",
    "Realization",
    "config_hash",
    "default_config",
    "delay_sweep",
    "generate_dataset",
    "grid",
    "little_delay",
    "load_dataset_size",
    "run",
    "train",
]
