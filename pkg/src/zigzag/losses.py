"""Convex 1-Lipschitz losses with deterministic subgradient selection."""

from __future__ import annotations

import numpy as np

__all__ = ["LOSSES", "loss", "dloss", "loss_batch", "dloss_batch"]

LOSSES = ("hinge", "absolute", "linear")


def loss(fn: str, yhat: float, y: float) -> float:
    if fn == "hinge":
        return max(0.0, 1.0 - yhat * y)
    if fn == "absolute":
        return abs(yhat - y)
    if fn == "linear":
        return -yhat * y
    raise ValueError(f"unknown loss {fn!r}")


def dloss(fn: str, yhat: float, y: float) -> float:
    """A subgradient of the loss in its first argument, always in [-1, 1].

    At kinks the selection is 0: hinge picks 0 at and beyond the margin,
    absolute picks 0 at yhat == y.
    """
    if fn == "hinge":
        return -y if 1.0 - yhat * y > 0.0 else 0.0
    if fn == "absolute":
        return float(np.sign(yhat - y))
    if fn == "linear":
        return -y
    raise ValueError(f"unknown loss {fn!r}")


def loss_batch(fn: str, yhat: np.ndarray, y: np.ndarray) -> np.ndarray:
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    if fn == "hinge":
        return np.maximum(0.0, 1.0 - yhat * y)
    if fn == "absolute":
        return np.abs(yhat - y)
    if fn == "linear":
        return -yhat * y
    raise ValueError(f"unknown loss {fn!r}")


def dloss_batch(fn: str, yhat: np.ndarray, y: np.ndarray) -> np.ndarray:
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    if fn == "hinge":
        return np.where(1.0 - yhat * y > 0.0, -y, 0.0)
    if fn == "absolute":
        return np.sign(yhat - y)
    if fn == "linear":
        return -y * np.ones_like(yhat)
    raise ValueError(f"unknown loss {fn!r}")
