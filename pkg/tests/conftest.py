from __future__ import annotations

import numpy as np

from traster import gen_random_smooth


def random_walk_series(rng: np.random.Generator, rows: int, cols: int,
                       tau: int, fast: bool) -> list[np.ndarray]:
    """A smooth starting grid evolved by sparse or dense random steps."""
    hi = int(rng.integers(40, 400))
    base = gen_random_smooth(rows, cols, (0, hi),
                             smoothness=int(rng.integers(1, 4)),
                             seed=int(rng.integers(1 << 30)))
    frames = [base.astype(np.int64)]
    frac = 0.4 if fast else 0.03
    for _ in range(tau - 1):
        mask = rng.random((rows, cols)) < frac
        step = rng.integers(-4, 5, size=(rows, cols))
        frames.append(frames[-1] + mask * step)
    return frames


def random_window(rng: np.random.Generator, rows: int, cols: int):
    """Mostly small windows, sometimes the full extent."""
    kind = rng.random()
    if kind < 0.15:
        return 0, rows - 1, 0, cols - 1
    w = int(rng.choice([2, 4, 8, 16, 64]))
    h = min(w, rows)
    w = min(w, cols)
    r1 = int(rng.integers(rows - h + 1))
    c1 = int(rng.integers(cols - w + 1))
    return r1, r1 + h - 1, c1, c1 + w - 1
