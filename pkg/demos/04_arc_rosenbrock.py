"""
Adaptive cubic regularization on test functions
===============================================

Each outer step minimizes a cubic model of the function.  When the
gradient is small and the Hessian has a clearly negative eigenvalue the
model is solved through the lifted reformulation; otherwise plain BB
steps are used.
"""

import numpy as np

from crs import arc_minimize
from crs.testfuncs import get_objective

for name in ("rosenbrock", "humps"):
    obj, x0 = get_objective(name, 100)
    x, hist = arc_minimize(obj, x0, subsolver="apg")
    lifted = sum(r["branch"] == "lifted" for r in hist)
    s = hist.summary
    print(f"{name:10s} {hist.status:9s} outer {s['n_i']:4d}  lifted {lifted:3d}  "
          f"Hessian products {s['n_prod']:6d}  f* {s['f*']:.3e}  "
          f"||g|| {np.linalg.norm(obj.eval_g(x)):.1e}")

# the history records the radius parameter and step quality per iteration
print("\nfirst iterations on humps:")
for r in hist[:8]:
    print(f"  k={r['k']:2d} f={r['f']:10.4f} sigma={r['sigma']:.2e} rho={r['rho']:7.3f} {r['branch']}")
