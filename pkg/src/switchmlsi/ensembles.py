"""Seeded families of positive test functions on a chain's states.

The families mix moderate functions with ones whose dynamic range exceeds
any fixed ``r``, so that regularization actually lifts some values.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .chain import FiniteChain, graph_distances

FAMILIES = ("lognormal", "spike", "radial", "two_level", "heavy")


def positive_functions(chain: FiniteChain, count: int, seed: int, r: float | None = None) -> Iterator[tuple[str, np.ndarray]]:
    """``count`` functions cycling through :data:`FAMILIES`.

    ``r`` sets the scale of the radial and heavy families (defaults to 10).
    """
    rng = np.random.default_rng(seed)
    n = chain.size
    lr = math.log(r if r is not None else 10.0)
    dist = graph_distances(chain)
    diam = int(dist.max())
    for k in range(count):
        fam = FAMILIES[k % len(FAMILIES)]
        if fam == "lognormal":
            f = np.exp(rng.normal(0, rng.choice([0.3, 1.0, 3.0]), n))
        elif fam == "spike":
            f = np.ones(n)
            size = int(rng.integers(1, max(2, n // 8)))
            f[rng.choice(n, size, replace=False)] = math.exp(rng.uniform(0, 3 * lr))
        elif fam == "radial":
            x0 = int(rng.integers(n))
            s = rng.uniform(0.2, 3.0) * lr
            f = np.exp(-s * dist[x0] + rng.normal(0, 0.1, n))
        elif fam == "two_level":
            f = np.where(rng.random(n) < rng.uniform(0.05, 0.95), 1.0, math.exp(-rng.uniform(0, 2.5 * lr)))
        else:
            f = np.exp(rng.standard_cauchy(n).clip(-50, 50) * rng.uniform(0.1, 1.0) * lr / max(diam, 1))
        yield fam, f
