# ## Solving a three-block trace-sum problem and certifying the answer
#
# This walk-through uses the small instance whose landscape is fully
# understood: three 3x3 blocks coupled by S_12 = -I, S_13 = I, S_23 = I,
# solved at rank 2.  Its global maximum is 3, but the all-identity point
# is stationary at objective 2 — a trap that catches a naive start.

import numpy as np

from otsm import (
    SolverConfig,
    Verdict,
    certify,
    dual_upper_bound,
    hard_example,
    solve,
)

problem = hard_example(3, 2)
print("blocks:", problem.dims.dims, "rank:", problem.dims.r)

# ## A naive start walks into the stationary trap

report_id = solve(problem, SolverConfig(init="identity"))
print("\nidentity start:")
print("  objective  :", report_id.objective)
print("  iterations :", report_id.iterations)
print("  stop reason:", report_id.stop_reason.value)

# The identity triple satisfies the first-order conditions exactly, so
# the solver (correctly) stops after one cycle.  The certificate tells
# us this is NOT verified optimal — the verdict is inconclusive:

cert_id = certify(problem, report_id.solution)
print("  verdict    :", cert_id.verdict.value)
print("  tau_i      :", np.round(cert_id.taus, 6))
print("  lmin(L*)   :", f"{cert_id.lmin_full:.6f}")

# ## The spectral start escapes and reaches the global optimum

report_sp = solve(problem, SolverConfig(init="spectral"))
print("\nspectral start:")
print("  objective  :", f"{report_sp.objective:.10f}")
print("  iterations :", report_sp.iterations)

cert_sp = certify(problem, report_sp.solution)
print("  verdict    :", cert_sp.verdict.value)
print("  tau_i      :", np.round(cert_sp.taus, 6))
assert cert_sp.verdict is Verdict.CERTIFIED_GLOBAL

# ## The dual bound pins the optimum from above
#
# The spectral upper bound equals the attained value here, which is an
# independent confirmation that 3 really is the global maximum.

bound = dual_upper_bound(problem)
print("\ndual upper bound:", f"{bound:.12f}")
print("attained        :", f"{report_sp.objective:.12f}")
print("certificate and bound agree: the spectral run is globally optimal")
