# ## Driving the command line end to end
#
# Problems, solutions, and reports all live in JSON files, so a solve
# can be scripted without writing any Python against the library API.
# This demo shells through the console entry point in-process: write a
# problem file, solve it, certify the solution file, and inspect the
# exit codes a pipeline would branch on.

import json
import tempfile
from pathlib import Path

from otsm import hard_example, save_problem
from otsm.cli import main

tmpdir = tempfile.TemporaryDirectory()
base = Path(tmpdir.name)

problem_path = base / "hard.problem.json"
save_problem(hard_example(3, 2), problem_path)
print("problem file keys:", sorted(json.loads(problem_path.read_text())))

# ## Solve: exit 0 on convergence, report + solution side by side

report_path = base / "hard.report.json"
code = main([
    "solve", "--input", str(problem_path),
    "--init", "spectral",
    "--certify",
    "--out", str(report_path),
])
print("solve exit code:", code)
assert code == 0

report = json.loads(report_path.read_text())
print("objective  :", report["objective"])
print("iterations :", report["iterations"])
print("stop reason:", report["stop_reason"])
print("verdict    :", report["certificate"]["verdict"])

# The solution lands beside the report: X.json -> X.solution.json.
solution_path = base / "hard.report.solution.json"
assert solution_path.exists(), "solver writes the solution next to the report"

# ## Certify: re-check a stored solution independently of the solver

cert_report = base / "check.report.json"
code = main(["certify", "--input", str(problem_path),
             "--solution", str(solution_path),
             "--out", str(cert_report)])
print("\ncertify exit code:", code, "(0 means certified global)")
assert code == 0
payload = json.loads(cert_report.read_text())
print("certify report keys:", sorted(payload))
print("tau_i:", [round(t, 6) for t in payload["certificate"]["taus"]])

# ## Exit codes distinguish outcomes, not just success/failure
#
# A solve capped at 3 cycles stops on the iteration limit (exit 2); a
# malformed problem file is an input error (exit 1).  Pipelines can
# branch on these without parsing any output.

code = main(["solve", "--input", str(problem_path), "--init", "spectral",
             "--max-iter", "3", "--out", str(base / "capped.report.json")])
print("\ncapped solve exit code:", code)
assert code == 2

bad = base / "bad.problem.json"
bad.write_text('{"dims": [3, 3], "r": 2}')
code = main(["solve", "--input", str(bad), "--out", str(base / "nope.json")])
print("malformed problem exit code:", code)
assert code == 1

tmpdir.cleanup()
print("\nall command-line checks passed")
