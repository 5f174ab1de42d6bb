"""A fluid at rest under a flat beam should stay exactly at rest.

Runs the shipped ``steady`` configuration and prints the distance to the
rest state at a few times along with the Picard iteration count per window.
"""
import tempfile
from pathlib import Path

from fsisim import parse_config, run_simulation

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "steady.ini"

cfg = parse_config(CONFIG)
with tempfile.TemporaryDirectory() as out:
    res = run_simulation(cfg, out_dir=out)

print(f"grid {cfg.grid.Nx}x{cfg.grid.Nz}, dt={cfg.numerics.dt}, {len(res.rows) - 1} steps")
for row in res.rows[::50]:
    print(f"  t={row['t']:.3f}  distance to rest {row['steady_residual']:.1e}")
print("Picard iterations per window:", res.window_iterations)
print("Every window converges on the first pass: the rest state is a fixed point.")
