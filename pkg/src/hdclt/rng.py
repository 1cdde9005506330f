"""Deterministic splittable random streams.

All randomness in the package flows through :func:`derive_rng`.  A stream is
addressed by a master seed plus a tuple of nonnegative integers (the spawn
key), so any unit of work — bootstrap draw ``b``, Monte Carlo replicate ``r``
— owns a stream that is reproducible regardless of execution order, batching,
or the number of workers.

Conventions used across the package:

- ``derive_rng(seed)``                  root stream of an operation
- ``derive_rng(seed, b)``               bootstrap draw ``b`` (sample_ghat)
- ``derive_rng(seed, 0, r)``            Monte Carlo replicate ``r``
- ``derive_seed(seed, *key)``           integer sub-seed handed to a nested
                                        operation that itself takes a seed
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_rng", "derive_seed"]


def _seed_sequence(seed: int, key: tuple[int, ...]) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed}")
    return np.random.SeedSequence(seed, spawn_key=key)


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for stream ``(seed, *key)``.

    Streams with distinct keys are statistically independent; the same
    ``(seed, *key)`` always yields an identical generator state.
    """
    return np.random.default_rng(_seed_sequence(seed, key))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse stream ``(seed, *key)`` into a plain integer seed.

    Used when handing a reproducible sub-seed to an operation whose public
    signature takes ``seed: int``.
    """
    return int(_seed_sequence(seed, key).generate_state(1, np.uint64)[0])
