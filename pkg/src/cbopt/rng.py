"""Deterministic, stream-splittable random number generation.

Each Monte-Carlo realization owns one stream, identified by
``(base_seed, stream_id)``. Streams use numpy's Philox counter-based
generator seeded through ``SeedSequence(base_seed, spawn_key=(stream_id,))``,
so the draw sequence of realization ``i`` never depends on how many
realizations run, in what order, or on how work is split across threads.

Normal variates come from numpy's ziggurat implementation; the method is
fixed per release of numpy (determinism is per-build, not cross-library).
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """One deterministic random stream for one realization."""

    def __init__(self, base_seed: int, stream_id: int = 0):
        base_seed = int(base_seed)
        stream_id = int(stream_id)
        if base_seed < 0 or stream_id < 0:
            raise ValueError("base_seed and stream_id must be non-negative")
        self.base_seed = base_seed
        self.stream_id = stream_id
        seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(stream_id,))
        self._gen = np.random.Generator(np.random.Philox(seq))

    def standard_normal(self, shape=None):
        """One N(0,1) draw, or an array of them when ``shape`` is given."""
        if shape is None:
            return float(self._gen.standard_normal())
        return self._gen.standard_normal(shape)

    def uniform_in_box(self, box, size=None):
        """Uniform point(s) in the box [lo_k, hi_k) per coordinate.

        ``box`` has shape (d, 2); returns shape (d,) or (size, d).
        """
        box = np.asarray(box, dtype=float)
        if box.ndim != 2 or box.shape[1] != 2:
            raise ValueError("box must have shape (d, 2)")
        lo, hi = box[:, 0], box[:, 1]
        if not np.all(lo < hi):
            raise ValueError("degenerate box: requires lo < hi per coordinate")
        d = box.shape[0]
        u = self._gen.random(d if size is None else (size, d))
        return lo + u * (hi - lo)
