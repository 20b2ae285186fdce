__version__ = "0.0.1"

from . import linalg, rng, isometry, network, channels, cost, metrics, train, data, experiments, cli

__all__ = ["linalg", "rng", "isometry", "network", "channels", "cost", "metrics", "train", "data", "experiments",
           "cli"]
