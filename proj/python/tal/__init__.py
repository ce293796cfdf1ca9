"""Python bindings for the TAL cold-hardiness transfer library.

Configs are plain dicts with the same keys as the JSON files the ``tal``
command-line tool reads.
"""

import json

from . import _tal
from ._tal import Dataset, Model, TalError, compute_weights, eval_rmse, generate, gradcheck, load_csv, load_model

__all__ = [
    "Dataset",
    "Model",
    "TalError",
    "compute_weights",
    "eval_rmse",
    "generate",
    "gradcheck",
    "load_csv",
    "load_model",
    "run_loco",
    "train",
    "transfer",
]


def train(dataset, tasks=None, config=None):
    """Train a multi-task model on ``tasks`` (default: every task)."""
    return _tal.train(dataset, list(tasks or []), json.dumps(config or {}))


def transfer(model, dataset, task, config=None):
    """Run one transfer method on ``task``'s seasons.

    Returns ``(manifest, predictions)`` where ``predictions`` holds one
    ``[days, 3]`` array of lte10/lte50/lte90 per season.
    """
    manifest, predictions = _tal.transfer(model, dataset, task, json.dumps(config or {}))
    return json.loads(manifest), predictions


def run_loco(config=None):
    """Leave-one-task-out benchmark; returns the report as CSV text."""
    return _tal.run_loco(json.dumps(config or {}))
