"""How many targets fit, and where each one goes, for three image geometries."""

from freqpoison.layout import GridConfig, all_specs, validate_spacing

for side, block in ((32, 8), (64, 8), (256, 12)):
    grid = GridConfig(side, side, block, num_classes=1)
    grid = GridConfig(side, side, block, num_classes=grid.capacity)
    validate_spacing(grid)
    specs = all_specs(grid)
    print(f"{side}x{side}, {block}px blocks: {grid.n_rows}x{grid.n_cols} blocks per channel, "
          f"capacity {grid.capacity}")
    for s in specs[:3] + specs[-1:]:
        print(f"   target {s.target_class:>3} -> origin {s.origin}, channel {s.channel_name}, {s.orientation}")
