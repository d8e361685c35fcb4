"""Deterministic child RNG streams derived from one master seed.

Every stochastic step in the pipeline draws from a generator obtained via
``child_rng(master, *path)`` where ``path`` identifies the step (e.g.
("cv", repeat, fold) or ("rforest", tree_index)).  Results are therefore
reproducible from the master seed alone and independent of scheduling.
"""

from __future__ import annotations

import numpy as np

# fixed tags keep the spawn keys stable across releases
_TAGS = {
    "split": 1,
    "cv": 2,
    "rforest": 3,
    "smote": 4,
    "rfecv": 5,
    "importance": 6,
    "model": 7,
    "mi": 8,
    "mutate": 9,
    "synth": 10,
}


def _key(part) -> int:
    if isinstance(part, str):
        if part not in _TAGS:
            raise KeyError(f"unknown seed tag {part!r}")
        return _TAGS[part]
    return int(part) & 0xFFFFFFFF


def child_seed_sequence(master: int, *path) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=tuple(_key(p) for p in path))


def child_rng(master: int, *path) -> np.random.Generator:
    """Generator for the step identified by ``path`` under ``master``."""
    return np.random.default_rng(child_seed_sequence(master, *path))


def child_int(master: int, *path) -> int:
    """A derived 63-bit integer seed, for APIs that want a plain int."""
    return int(child_seed_sequence(master, *path).generate_state(1, np.uint64)[0] >> 1)
