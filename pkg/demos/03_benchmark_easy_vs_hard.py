"""
Easy and hard synthetic instances
=================================

Generated instances have a known optimum of -1.  The easy case is
controlled by a condition number ``kappa``; the hard case puts ``b``
orthogonal to the bottom eigenvector and shrinks the gap between the two
smallest eigenvalues.
"""

import sys

from crs.bench import InstanceSpec, run_experiment

grid = [
    InstanceSpec(n=200, K=20, case="easy", kappa=100),
    InstanceSpec(n=200, K=20, case="easy", kappa=1000),
    InstanceSpec(n=200, K=20, case="hard", gap=1e-3),
    InstanceSpec(n=200, K=20, case="hard", gap=1e-4),
]
methods = [("apg", "sp"), ("bbm", "sp"), ("apg", "ap"), ("bbm", "ap")]

# rows go to stdout as CSV; means over trials are tagged trial=mean
rows, means = run_experiment(grid, methods, trials=3, out=sys.stdout)
