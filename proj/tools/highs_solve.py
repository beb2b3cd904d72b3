#!/usr/bin/env python3
"""External MILP solver adapter backed by HiGHS.

Usage: highs_solve.py <lp-file> <solution-file>

Reads a CPLEX-LP file, solves it with HiGHS and writes one `name value`
line per variable. Exit codes: 0 solved, 2 infeasible, 1 anything else.
"""

import sys

import highspy


def main(argv):
    if len(argv) != 3:
        print("usage: highs_solve.py <lp-file> <solution-file>", file=sys.stderr)
        return 1
    lp_path, sol_path = argv[1], argv[2]

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 1e-9)
    h.setOptionValue("mip_abs_gap", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    if h.readModel(lp_path) != highspy.HighsStatus.kOk:
        print(f"cannot read {lp_path}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    if status in (highspy.HighsModelStatus.kInfeasible, highspy.HighsModelStatus.kUnboundedOrInfeasible):
        return 2
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"HiGHS status: {h.modelStatusToString(status)}", file=sys.stderr)
        return 1

    lp = h.getLp()
    values = list(h.getSolution().col_value)
    integrality = list(lp.integrality_)
    for j, kind in enumerate(integrality):
        # Snap integer columns that HiGHS reports within its tolerance.
        if kind != highspy.HighsVarType.kContinuous and abs(values[j] - round(values[j])) <= 1e-6:
            values[j] = float(round(values[j]))
    with open(sol_path, "w") as out:
        out.write(f"# objective {h.getInfo().objective_function_value!r}\n")
        for name, value in zip(lp.col_names_, values):
            out.write(f"{name} {value!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
