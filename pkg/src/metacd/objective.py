"""Modularity-style objectives shared by the clustering and evaluation code."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ObjectiveKind:
    """Which objective to optimise: plain modularity ``Q`` or human-weighted ``HQ``.

    ``alpha`` scales every community term, ``beta`` rewards the human share and
    ``gamma`` penalises the AI share of a community.  They are ignored for Q.
    """

    kind: str = "HQ"
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in ("Q", "HQ"):
            raise ValueError(f"objective must be Q or HQ, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        for name in ("alpha", "beta", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def q(cls) -> "ObjectiveKind":
        return cls("Q")

    @classmethod
    def hq(cls, alpha: float = 1.0, beta: float = 1.0, gamma: float = 1.0) -> "ObjectiveKind":
        return cls("HQ", alpha, beta, gamma)

    @property
    def human_weighted(self) -> bool:
        return self.kind == "HQ"


def reward_penalty_w(human_count: int, ai_count: int, beta: float = 1.0, gamma: float = 1.0) -> float:
    """Composition weight of a community: ``beta*H/size - gamma*A/size``."""
    size = human_count + ai_count
    if human_count < 0 or ai_count < 0 or size < 1:
        raise ValueError("community must contain at least one member")
    return (beta * human_count - gamma * ai_count) / size


def community_weights(humans: np.ndarray, ais: np.ndarray, obj: ObjectiveKind) -> np.ndarray:
    """``alpha * W(C)`` per community (all ones for Q; empty communities get 0)."""
    humans = np.asarray(humans, dtype=np.float64)
    ais = np.asarray(ais, dtype=np.float64)
    if not obj.human_weighted:
        return np.ones(len(humans))
    size = humans + ais
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (obj.beta * humans - obj.gamma * ais) / size
    return np.where(size > 0, obj.alpha * w, 0.0)


def community_terms(sigma_in: np.ndarray, sigma_tot: np.ndarray, total_weight: float) -> np.ndarray:
    """Per-community modularity contribution ``2*in/2m - (tot/2m)^2``."""
    return 2.0 * np.asarray(sigma_in) / total_weight - (np.asarray(sigma_tot) / total_weight) ** 2
