"""
Projecting onto the lifted set
==============================

The lifted problem lives on ``{(x, y) : ||x||^2 <= y}``, optionally with a
floor ``y >= l``.  Both projections are exact: one scalar cubic for the
first set, plus a short case analysis for the floor.
"""

import numpy as np

from crs import LiftedPoint, cubic_mu_root, project_Bhat, project_S

p = LiftedPoint(np.array([2.0, 0.0]), -1.0)
q = project_S(p)
print("point       ", p.x, p.y)
print("projection  ", q.x, q.y, " on boundary:", np.isclose(q.x @ q.x, q.y))

# the multiplier behind it
mu = cubic_mu_root(p.x @ p.x, p.y)
print("multiplier  ", mu, " x shrinks by", 1 / (1 + mu))

# adding a floor that the plain projection violates
for l in (0.5, 2.0, 9.0):
    r = project_Bhat(p, l)
    print(f"floor l={l:3}:", r.x, r.y)

# a feasible point comes back unchanged
inside = LiftedPoint(np.array([0.3, 0.4]), 1.0)
print("feasible point kept:", project_S(inside).y == 1.0)
