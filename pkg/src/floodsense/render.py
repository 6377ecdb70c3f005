"""PNG heatmaps of floodiness grids (north up, white for empty or masked cells)."""
from __future__ import annotations

import numpy as np
from PIL import Image

from .geo import Grid

# yellow -> orange -> dark red
_RAMP = np.array([[255, 237, 160], [254, 178, 76], [240, 59, 32], [128, 0, 38]], dtype=float)


def colorize(heights: np.ndarray, masked=None, vmax=None) -> np.ndarray:
    h = np.asarray(heights, dtype=float)
    top = float(h.max()) if vmax is None else float(vmax)
    rgb = np.full(h.shape + (3,), 255, dtype=np.uint8)
    blank = h <= 0
    if masked is not None:
        blank = blank | masked
    if top <= 0:
        return rgb
    t = np.clip(h / top, 0.0, 1.0) * (len(_RAMP) - 1)
    k = np.minimum(t.astype(int), len(_RAMP) - 2)
    frac = (t - k)[..., None]
    col = _RAMP[k] * (1 - frac) + _RAMP[k + 1] * frac
    rgb[~blank] = np.round(col[~blank]).astype(np.uint8)
    return rgb


def render_png(grid: Grid, path, cell_px: int = 8, vmax=None) -> None:
    rgb = colorize(grid.heights, grid.masked, vmax)[::-1]  # row 0 is south
    img = Image.fromarray(rgb, mode="RGB")
    img = img.resize((grid.n_cols * cell_px, grid.n_rows * cell_px), Image.NEAREST)
    img.save(path, format="PNG")
