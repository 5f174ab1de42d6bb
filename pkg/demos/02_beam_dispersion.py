"""Free beam modes decay and oscillate at the rates set by the dispersion relation.

For each Fourier mode the Crank-Nicolson beam is released from a cosine
profile and the complex rate is recovered from the mode amplitude.  The
exact rates are the roots of ``lam^2 + delta k^2 lam + alpha k^4 + beta k^2``.
"""
import numpy as np

from fsisim.oracles import dispersion_table
from fsisim.sources import PhysParams

params = PhysParams(alpha=1.0, beta=1.0, delta=1.0, L=2 * np.pi)
print(f"{'mode':>4} {'dt|lam|':>8} {'exact':>22} {'measured':>22} {'rel.err':>9} {'order':>6}")
for r in dispersion_table(params):
    exact = complex(r["exact_re"], r["exact_im"])
    meas = complex(r["measured_re"], r["measured_im"])
    order = f"{r['order']:.2f}" if "order" in r else ""
    print(f"{r['mode']:>4} {r['dt_abs_lambda']:>8.3f} {exact:>22.6f} {meas:>22.6f} "
          f"{r['rel_error']:>9.2e} {order:>6}")
print("Halving dt cuts the error by four: the time stepping is second order.")
