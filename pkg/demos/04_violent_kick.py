"""A hard kick drives 1 + eta towards the admissibility floor.

The coupling loop halves the window whenever the fixed-point iteration
leaves the admissible set.  Once a single step fails, the run stops with a
window underflow, after flushing all output.  The event log tells the story.
"""
import tempfile
from pathlib import Path

from fsisim import WindowUnderflow, parse_config, run_simulation

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "violent.ini"
cfg = parse_config(CONFIG)

with tempfile.TemporaryDirectory() as out:
    try:
        res = run_simulation(cfg, out_dir=out)
        print("run completed (unexpected for this preset)")
    except WindowUnderflow as exc:
        res = exc.result
        print("stopped:", exc)
    for ev in res.events:
        if ev["event"] == "window":
            print(f"  window {ev['index']} t0={ev['t_start']:.2f} steps={ev['steps']:>2} "
                  f"-> {ev['outcome']} after {ev['iterations']} iterations")
        elif ev["event"] in ("halving", "underflow"):
            print(f"  {ev['event']}: {({k: v for k, v in ev.items() if k != 'event'})}")
    print("smallest 1 + eta reached:", min(r["min_one_plus_eta"] for r in res.rows))
    print("files written:", sorted(str(p.relative_to(out)) for p in Path(out).rglob("*") if p.is_file()))
