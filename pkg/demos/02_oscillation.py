# ## Why the proximal term is not optional
#
# Dropping the proximal term (alpha = +inf) turns each block update into
# the classical full polar step.  On the three-block instance from demo
# 01 there is a starting point, (I, J, I) with J the column-swapped I,
# from which the classical updates can cycle through four states forever
# while the objective sits at 2 — below the optimum 3.  The scripted
# cycle below is validated step by step: every update attains the
# nuclear norm of its target, so the cycle is a legitimate trajectory of
# the classical method, not a numerical accident.

from otsm import SolverConfig, hard_example, oscillation_demo, solve

trace = oscillation_demo()

print("cycle objectives:", [round(v, 12) for v in trace.objectives])
print("worst argmax residual over the 12 scripted updates:",
      f"{max(trace.argmax_residuals):.3e}")

for k, point in enumerate(trace.iterates):
    print(f"\nstate {k}:")
    for i, block in enumerate(point.blocks):
        print(f"  O_{i + 1} =", block.tolist())

# ## The same point is harmless with a finite alpha
#
# With the proximal term on (any finite alpha), the cycle's starting
# point is a fixed point: the proximal update leaves it where it is, the
# mean change is zero, and the solver reports convergence instead of
# looping.

print("\nfinite-alpha mean change from the cycle start:",
      f"{trace.fixed_point_mean_change:.3e}")

# ## The guarded solver on the same instance
#
# The production configuration (alpha = 1000) never oscillates: from the
# spectral start it climbs monotonically to the optimum.

report = solve(hard_example(3, 2), SolverConfig(init="spectral"))
first, last = report.objective_trace[0], report.objective_trace[-1]
print("\nguarded solver: objective", f"{first:.6f} -> {last:.6f}",
      "in", report.iterations, "cycles")
assert all(
    b >= a - 1e-12 * (1 + abs(a))
    for a, b in zip(report.objective_trace, report.objective_trace[1:])
), "the guarded ascent must be monotone"
print("monotone ascent confirmed across all recorded cycles")
