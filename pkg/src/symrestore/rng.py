"""Seed handling: one seedable generator per run, split deterministically per task."""

from __future__ import annotations

import numpy as np

SeedLike = int | np.random.Generator | np.random.SeedSequence | None


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(seed: int | np.random.SeedSequence | None, count: int) -> list[np.random.SeedSequence]:
    """Independent, reproducible child seed sequences for ``count`` tasks."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(count)


def child_generators(seed: int | np.random.SeedSequence | None, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in child_seeds(seed, count)]
