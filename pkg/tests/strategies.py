"""Hypothesis strategies for small random masked grids and fields on them."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from chemofv.fields import ScalarField
from chemofv.geometry import DomainSpec, build_grid


@st.composite
def grids(draw, dims=(2, 3), max_cells=12, min_cells=2, equal_spacing=False):
    n = draw(st.sampled_from(dims))
    cap = max_cells if n == 2 else min(max_cells, 7)
    shape = tuple(draw(st.integers(min_cells, cap)) for _ in range(n))
    if equal_spacing:
        h = draw(st.floats(0.05, 2.0))
        upper = [h * s for s in shape]
    else:
        upper = [draw(st.floats(0.2, 3.0)) for _ in range(n)]
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    mask = rng.random(shape) < draw(st.floats(0.5, 1.0))
    if not mask.any():
        mask.flat[0] = True
    return build_grid(DomainSpec.box([0.0] * n, upper), shape, mask=mask)


def random_field(grid, rng, low=0.0, high=1.0):
    return ScalarField(grid, rng.uniform(low, high, grid.n_cells))


seeds = st.integers(0, 2**32 - 1)
