"""Multi-zone day-ahead electricity market dispatch and grid-security toolkit.

The package covers the full chain from profit-driven position optimization
through merit-order market clearing (plus economic-dispatch / unit-commitment
baselines), DC grid redispatch, and quasi-steady-state cascading-failure
simulation, on bundled desk-scale datasets.
"""

from euroem.solver import OptProblem, OptSolution, solve_lp, solve_milp

__version__ = "0.1.0"
