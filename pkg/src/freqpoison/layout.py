"""Target-class to (block, channel, orientation) assignment.

The image is tiled with ``2*l0`` square cells. Each cell carries one
``l0 x l0`` block in its top-left quadrant, leaving an ``l0`` gap to the
neighbouring blocks. Targets fill every block of the B channel first, then
R, then G. Orientation alternates on a checkerboard so that 4-neighbouring
blocks always carry different morphologies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CapacityExceeded, ConfigError, SpacingViolation, TargetOutOfRange

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
ORIENTATIONS = (HORIZONTAL, VERTICAL)

CHANNEL_NAMES = ("B", "R", "G")
# channel code n -> index into an RGB-ordered pixel array
CHANNEL_TO_PLANE = {0: 2, 1: 0, 2: 1}


@dataclass(frozen=True)
class GridConfig:
    image_height: int
    image_width: int
    block_side: int
    num_classes: int
    channels: int = 3

    def __post_init__(self):
        if self.block_side < 4 or self.block_side % 4:
            raise ConfigError(f"block side must be a multiple of 4 and >= 4, got {self.block_side}")
        if self.channels not in (1, 3):
            raise ConfigError(f"channels must be 1 or 3, got {self.channels}")
        if self.num_classes < 1:
            raise ConfigError("num_classes must be positive")

    @property
    def n_rows(self) -> int:
        return self.image_height // (2 * self.block_side)

    @property
    def n_cols(self) -> int:
        return self.image_width // (2 * self.block_side)

    @property
    def blocks_per_channel(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def capacity(self) -> int:
        return self.channels * self.blocks_per_channel


@dataclass(frozen=True)
class BlockSpec:
    target_class: int  # 1-based
    block_index: int
    channel: int  # 0=B, 1=R, 2=G
    origin: tuple[int, int]
    side: int
    orientation: str

    @property
    def channel_name(self) -> str:
        return CHANNEL_NAMES[self.channel]

    def plane_index(self, num_channels: int) -> int:
        """Index of the pixel plane this spec writes to."""
        return CHANNEL_TO_PLANE[self.channel] if num_channels == 3 else 0

    def slices(self) -> tuple[slice, slice]:
        r, c = self.origin
        return slice(r, r + self.side), slice(c, c + self.side)


def cell_of(block_index: int, cfg: GridConfig) -> tuple[int, int]:
    return divmod(block_index, cfg.n_cols)


def orientation_of(block_index: int, cfg: GridConfig) -> str:
    n1, n2 = cell_of(block_index, cfg)
    return HORIZONTAL if (n1 + n2) % 2 == 0 else VERTICAL


def block_grid(cfg: GridConfig) -> list[tuple[int, int]]:
    """Top-left pixel origin of every block, row-major."""
    if cfg.blocks_per_channel == 0 or cfg.num_classes > cfg.capacity:
        raise CapacityExceeded(
            f"{cfg.num_classes} targets requested, grid holds {cfg.capacity} "
            f"({cfg.n_rows}x{cfg.n_cols} blocks x {cfg.channels} channels)"
        )
    step = 2 * cfg.block_side
    return [(n1 * step, n2 * step) for n1 in range(cfg.n_rows) for n2 in range(cfg.n_cols)]


def target_to_spec(t: int, cfg: GridConfig) -> BlockSpec:
    """Map 1-based target class ``t`` to its block, channel and orientation."""
    origins = block_grid(cfg)
    if not 1 <= t <= min(cfg.num_classes, cfg.capacity):
        raise TargetOutOfRange(f"target {t} outside 1..{min(cfg.num_classes, cfg.capacity)}")
    S = cfg.blocks_per_channel
    i, n = (t - 1) % S, (t - 1) // S
    return BlockSpec(t, i, n, origins[i], cfg.block_side, orientation_of(i, cfg))


def spec_for_block(block_index: int, cfg: GridConfig, *, channel: int = 0, orientation: str | None = None,
                   target_class: int = 0) -> BlockSpec:
    """A spec for an explicit block, bypassing the target mapping."""
    if not 0 <= block_index < cfg.blocks_per_channel:
        raise TargetOutOfRange(f"block {block_index} outside 0..{cfg.blocks_per_channel - 1}")
    if orientation is None:
        orientation = orientation_of(block_index, cfg)
    if orientation not in ORIENTATIONS:
        raise ConfigError(f"unknown orientation {orientation!r}")
    step = 2 * cfg.block_side
    n1, n2 = cell_of(block_index, cfg)
    return BlockSpec(target_class, block_index, channel, (n1 * step, n2 * step), cfg.block_side, orientation)


def all_specs(cfg: GridConfig) -> list[BlockSpec]:
    return [target_to_spec(t, cfg) for t in range(1, cfg.num_classes + 1)]


def validate_spacing(cfg: GridConfig) -> None:
    """Check the block spacing rule, accepting exact tilings."""
    l0 = cfg.block_side
    origins = block_grid(cfg)
    step = 2 * l0
    for name, size in (("height", cfg.image_height), ("width", cfg.image_width)):
        rem = size % step
        if rem != 0 and rem < l0:
            raise SpacingViolation(f"image {name} {size} leaves remainder {rem} < {l0} modulo {step}")
    for r, c in origins:
        if r + l0 > cfg.image_height or c + l0 > cfg.image_width:
            raise SpacingViolation(f"block at {(r, c)} leaves the image")
    for k, (r, c) in enumerate(origins):
        n1, n2 = cell_of(k, cfg)
        for dr, dc in ((0, 1), (1, 0)):
            if n1 + dr >= cfg.n_rows or n2 + dc >= cfg.n_cols:
                continue
            r2, c2 = origins[(n1 + dr) * cfg.n_cols + n2 + dc]
            centre_dist = abs(r2 - r) + abs(c2 - c)
            gap = max(r2 - r, c2 - c) - l0
            if centre_dist != step or gap < l0:
                raise SpacingViolation(f"blocks {(r, c)} and {(r2, c2)}: distance {centre_dist}, gap {gap}")
