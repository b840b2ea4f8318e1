"""Smoke test for the ceamp_py extension module.

Build and install first, e.g.
    pip install maturin && maturin build -m crates/python/Cargo.toml --release
    pip install target/wheels/ceamp-*.whl
"""

import json

import ceamp_py as ce

PHI2 = "p cnf 3 2\n1 -2 -3 0\n-1 2 3 0\n"


def contradiction():
    lines = ["p cnf 3 8"]
    for mask in range(8):
        lits = [str(i + 1) if mask >> i & 1 else str(-(i + 1)) for i in range(3)]
        lines.append(" ".join(lits) + " 0")
    return "\n".join(lines) + "\n"


def main():
    f = ce.Formula.from_dimacs(PHI2)
    assert f.is_conforming() and f.variable_count == 3 and f.clause_count == 2

    inst = ce.reduce(f)
    assert inst.vertex_count == 388
    ok, report = inst.verify()
    assert ok, report
    assert len(json.loads(report)) == 9
    assert json.loads(inst.stats_json())["max_incidence"] == 49
    assert inst.recover_formula().to_dimacs() == f.to_dimacs()

    a = f.brute_force_sat()
    edits = inst.encode(a)
    assert len(edits) == inst.packing_size
    assert inst.verify_solution(edits)[0]
    assert inst.decode(edits) == a

    witness = inst.solve(time_limit=60.0)
    assert witness is not None and f.is_satisfied_by(inst.decode(witness))
    again = ce.EditSet.from_json(witness.to_json())
    assert again.edits() == witness.edits()

    back = ce.Instance.from_json(inst.to_json())
    assert back.to_json() == inst.to_json()

    unsat = ce.reduce(ce.Formula.from_dimacs(contradiction()))
    assert unsat.solve() is None
    try:
        unsat.solve(time_limit=0.0)
    except TimeoutError:
        pass
    else:
        raise AssertionError("expected a timeout")

    try:
        ce.Formula.from_dimacs("p cnf x\n")
    except ValueError:
        pass
    else:
        raise AssertionError("expected a parse error")

    print("smoke test passed")


if __name__ == "__main__":
    main()
