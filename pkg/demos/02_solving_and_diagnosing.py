"""Solving pencil-form SDPs, and what an honest solver does when they degenerate.

A pencil-form SDP is: maximize <b, y> subject to F0 + sum_i y_i F_i >= 0.
When no feasible y makes the pencil positive definite (strict feasibility
fails), optimal solutions of the primal-dual pair may simply not exist, and
interior-point iterates chase them off to infinity.  strictfeas reports that
instead of pretending.
"""

import numpy as np

from strictfeas import MatrixPencil, SdpProblem, diagnostics_report, solve_sdp

# a healthy problem: maximize y subject to diag(1 - y, 1 + y) >= 0
healthy = SdpProblem(
    pencil=MatrixPencil(
        n=2,
        scalar="double",
        f0=np.eye(2),
        var_names=("y",),
        terms=(np.diag([-1.0, 1.0]),),
    ),
    objective=(1.0,),
    name="interval",
)
res = solve_sdp(healthy)
print("healthy problem:", res.status.tag.value, "objective", res.objective_dual)
print()

# a degenerate one: maximize y subject to [[0, y], [y, 1]] >= 0.
# Feasibility forces y = 0, but the minimizing primal sequence needs
# X[0,0] -> infinity, so no optimal primal exists.
degenerate = SdpProblem(
    pencil=MatrixPencil(
        n=2,
        scalar="double",
        f0=np.array([[0.0, 0.0], [0.0, 1.0]]),
        var_names=("y",),
        terms=(np.array([[0.0, 1.0], [1.0, 0.0]]),),
    ),
    objective=(1.0,),
    name="corner",
)
res = solve_sdp(degenerate)
print("degenerate problem:")
print(diagnostics_report(res))
