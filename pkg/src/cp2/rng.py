"""Keyed random streams.

All randomness in the package flows through :func:`substream`, which derives
an independent counter-based generator from a master seed and a hashable key
path.  Two calls with the same (seed, path) yield identical streams, and
distinct paths yield independent streams, so results do not depend on
evaluation order or on how work is sharded across threads.

Conventions used by the calibration engine:

    substream(seed, "calib", point_id, 0)   exogenous draws for a point
    substream(seed, "calib", point_id, 1)   second sample for the tau solve
    substream(seed, "test",  point_id, 0)   same, prediction phase
    substream(seed, "data", r)              replication r's dataset
    substream(seed, "split", r)             replication r's partition
    substream(seed, "fit", r)               model fitting
    substream(rep_seed, "wsc")              slab directions

Point ids are stable row indices, so permuting a calibration set permutes
the draws with the points and leaves every downstream statistic unchanged.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_word(item) -> int:
    # spawn_key entries must be non-negative ints; strings hash via crc32
    if isinstance(item, str):
        return zlib.crc32(item.encode("utf-8"))
    if isinstance(item, (int, np.integer)):
        return int(item) & 0xFFFFFFFF
    raise TypeError(f"stream key items must be int or str, got {type(item).__name__}")


def substream(seed: int, *path) -> np.random.Generator:
    """Return a generator keyed by ``(seed, *path)``.

    Parameters
    ----------
    seed : int
        Master seed of the run.
    *path : int or str
        Key path naming the consumer, e.g. ``("calib", 17, 0)``.
    """
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(_key_word(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path) -> int:
    """Collapse ``(seed, *path)`` into one reusable integer seed."""
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(_key_word(p) for p in path))
    return int(ss.generate_state(2, dtype=np.uint64)[0])
