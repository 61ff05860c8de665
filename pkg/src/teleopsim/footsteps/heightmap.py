"""Grid terrain: per-cell elevation plus no-step occupancy.

Cell (ix, iy) covers the square [origin + i*res, origin + (i+1)*res) on
each axis; footprint coverage uses cell centers against the oriented foot
rectangle. The file format is YAML with row-major heights and an explicit
no-step cell list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..errors import OutOfBounds, ParseError


@dataclass
class HeightMap:
    resolution: float
    width_cells: int
    height_cells: int
    heights: np.ndarray
    no_step: np.ndarray
    origin_x: float = 0.0
    origin_y: float = 0.0

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        self.heights = np.asarray(self.heights, dtype=float).reshape(
            self.height_cells, self.width_cells
        )
        self.no_step = np.asarray(self.no_step, dtype=bool).reshape(
            self.height_cells, self.width_cells
        )
        if not np.all(np.isfinite(self.heights)):
            raise ValueError("all elevations must be finite")
        # Cell-center coordinate vectors, reused by footprint rasterization.
        self._centers_x = self.origin_x + (np.arange(self.width_cells) + 0.5) * self.resolution
        self._centers_y = self.origin_y + (np.arange(self.height_cells) + 0.5) * self.resolution
        self.refresh_cached_flags()

    def refresh_cached_flags(self):
        """Recompute map-global facts that let footprint probes skip
        rasterization. Call after mutating heights/no_step arrays directly."""
        self._uniform_height = float(self.heights.min()) == float(self.heights.max())
        self._any_no_step = bool(self.no_step.any())

    @classmethod
    def flat(
        cls,
        width_cells: int,
        height_cells: int,
        resolution: float = 0.05,
        elevation: float = 0.0,
        origin_x: float = 0.0,
        origin_y: float = 0.0,
    ) -> "HeightMap":
        return cls(
            resolution=resolution,
            width_cells=width_cells,
            height_cells=height_cells,
            heights=np.full((height_cells, width_cells), elevation),
            no_step=np.zeros((height_cells, width_cells), dtype=bool),
            origin_x=origin_x,
            origin_y=origin_y,
        )

    # -- coordinate helpers -------------------------------------------------

    @property
    def width_m(self) -> float:
        return self.width_cells * self.resolution

    @property
    def height_m(self) -> float:
        return self.height_cells * self.resolution

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin_x + (ix + 0.5) * self.resolution,
            self.origin_y + (iy + 0.5) * self.resolution,
        )

    def cell_at(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin_x) / self.resolution)),
            int(math.floor((y - self.origin_y) / self.resolution)),
        )

    def cell_in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width_cells and 0 <= iy < self.height_cells

    def point_in_bounds(self, x: float, y: float) -> bool:
        return (
            self.origin_x <= x <= self.origin_x + self.width_m
            and self.origin_y <= y <= self.origin_y + self.height_m
        )

    # -- footprint coverage -------------------------------------------------

    def footprint_corners(
        self, x: float, y: float, yaw: float, length: float, width: float
    ) -> np.ndarray:
        c, s = math.cos(yaw), math.sin(yaw)
        half_l, half_w = length / 2.0, width / 2.0
        corners = np.array(
            [
                [half_l, half_w],
                [half_l, -half_w],
                [-half_l, -half_w],
                [-half_l, half_w],
            ]
        )
        rot = np.array([[c, -s], [s, c]])
        return corners @ rot.T + np.array([x, y])

    def _footprint_window(self, x, y, yaw, length, width):
        """Index window and coverage mask of the oriented foot rectangle."""
        c, s = math.cos(yaw), math.sin(yaw)
        half_l, half_w = length / 2.0, width / 2.0
        ext_x = half_l * abs(c) + half_w * abs(s)
        ext_y = half_l * abs(s) + half_w * abs(c)
        ix_lo = max(0, int(math.floor((x - ext_x - self.origin_x) / self.resolution)))
        ix_hi = min(
            self.width_cells - 1,
            int(math.floor((x + ext_x - self.origin_x) / self.resolution)),
        )
        iy_lo = max(0, int(math.floor((y - ext_y - self.origin_y) / self.resolution)))
        iy_hi = min(
            self.height_cells - 1,
            int(math.floor((y + ext_y - self.origin_y) / self.resolution)),
        )
        if ix_hi < ix_lo or iy_hi < iy_lo:
            return ix_lo, iy_lo, np.zeros((0, 0), dtype=bool)
        cx = self._centers_x[ix_lo : ix_hi + 1] - x
        cy = self._centers_y[iy_lo : iy_hi + 1] - y
        u = c * cx[None, :] + s * cy[:, None]
        v = -s * cx[None, :] + c * cy[:, None]
        mask = (np.abs(u) <= half_l + 1e-12) & (np.abs(v) <= half_w + 1e-12)
        return ix_lo, iy_lo, mask

    def covered_cells(
        self, x: float, y: float, yaw: float, length: float, width: float
    ) -> tuple[np.ndarray, np.ndarray]:
        """Indices (ix, iy) of cells whose center lies inside the oriented
        foot rectangle. Clipped to map bounds; use footprint_in_bounds to
        detect clipping."""
        ix_lo, iy_lo, mask = self._footprint_window(x, y, yaw, length, width)
        iy_rel, ix_rel = np.nonzero(mask)
        return ix_rel + ix_lo, iy_rel + iy_lo

    def probe_footprint(
        self,
        x: float,
        y: float,
        yaw: float,
        length: float,
        width: float,
        max_height_delta: float,
    ):
        """One-pass footprint query: (in_bounds, z, no_step_hit, spread_exceeded).

        z is the mean elevation over the covered cell centers (the center
        cell when the footprint covers none); the flags mirror the snap
        validity rules. Out-of-bounds footprints return in_bounds=False with
        the rest zeroed.
        """
        if not self.footprint_in_bounds(x, y, yaw, length, width):
            return False, 0.0, False, False
        if self._uniform_height and not self._any_no_step:
            return True, float(self.heights[0, 0]), False, False
        ix_lo, iy_lo, mask = self._footprint_window(x, y, yaw, length, width)
        if not mask.any():
            ix, iy = self.cell_at(x, y)
            return True, float(self.heights[iy, ix]), bool(self.no_step[iy, ix]), False
        window_h = self.heights[iy_lo : iy_lo + mask.shape[0], ix_lo : ix_lo + mask.shape[1]]
        window_n = self.no_step[iy_lo : iy_lo + mask.shape[0], ix_lo : ix_lo + mask.shape[1]]
        covered = window_h[mask]
        z = float(covered.mean())
        no_step_hit = bool(window_n[mask].any())
        spread = float(covered.max() - covered.min()) > max_height_delta
        return True, z, no_step_hit, spread

    def footprint_in_bounds(
        self, x: float, y: float, yaw: float, length: float, width: float
    ) -> bool:
        # Axis-aligned extent of the oriented rectangle; scalar math, this
        # sits on the planner's hot path.
        c, s = math.cos(yaw), math.sin(yaw)
        ext_x = (length / 2.0) * abs(c) + (width / 2.0) * abs(s)
        ext_y = (length / 2.0) * abs(s) + (width / 2.0) * abs(c)
        return (
            x - ext_x >= self.origin_x
            and x + ext_x <= self.origin_x + self.width_m
            and y - ext_y >= self.origin_y
            and y + ext_y <= self.origin_y + self.height_m
        )

    def require_footprint_in_bounds(self, x, y, yaw, length, width) -> None:
        if not self.footprint_in_bounds(x, y, yaw, length, width):
            raise OutOfBounds(
                f"footprint at ({x:.3f}, {y:.3f}, yaw {yaw:.3f}) leaves the map"
            )

    def mark_no_step_disk(self, x: float, y: float, radius: float) -> None:
        """Mark every cell whose center lies within ``radius`` of (x, y)."""
        dx = self._centers_x - x
        dy = self._centers_y - y
        hit = dx[None, :] ** 2 + dy[:, None] ** 2 <= radius * radius
        self.no_step |= hit
        self.refresh_cached_flags()

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        cells = np.argwhere(self.no_step)
        return {
            "resolution": self.resolution,
            "width": self.width_cells,
            "height": self.height_cells,
            "origin": [self.origin_x, self.origin_y],
            "heights": [float(v) for v in self.heights.ravel()],
            "no_step": [[int(ix), int(iy)] for iy, ix in cells],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "HeightMap":
        try:
            resolution = float(raw["resolution"])
            width = int(raw["width"])
            height = int(raw["height"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"height map needs resolution/width/height: {exc}") from exc
        origin = raw.get("origin", [0.0, 0.0])
        if "heights" in raw:
            heights = np.asarray(raw["heights"], dtype=float)
            if heights.size != width * height:
                raise ParseError(
                    f"heights length {heights.size} != width*height {width * height}"
                )
            heights = heights.reshape(height, width)
        else:
            heights = np.full((height, width), float(raw.get("default_height", 0.0)))
        no_step = np.zeros((height, width), dtype=bool)
        for pair in raw.get("no_step", []):
            ix, iy = int(pair[0]), int(pair[1])
            if not (0 <= ix < width and 0 <= iy < height):
                raise ParseError(f"no_step cell [{ix}, {iy}] outside the grid")
            no_step[iy, ix] = True
        return cls(
            resolution=resolution,
            width_cells=width,
            height_cells=height,
            heights=heights,
            no_step=no_step,
            origin_x=float(origin[0]),
            origin_y=float(origin[1]),
        )


def load_height_map(text: str) -> HeightMap:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"height map is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("height map document must be a mapping")
    return HeightMap.from_dict(raw)


def save_height_map(grid: HeightMap) -> str:
    return yaml.safe_dump(grid.to_dict(), sort_keys=False)
