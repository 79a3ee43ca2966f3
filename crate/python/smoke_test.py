"""Smoke test for the multiweight extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import json
import math
import random

import multiweight as mw


def main():
    p = mw.Exponent("3/2")
    assert p.inv == "2/3" and not p.is_infinite
    assert mw.Exponent("inf").is_infinite
    assert p.dual_inv() == "1/3"

    ds = mw.derived_scales(["2", "2"], ["1", "1", "1"])
    assert ds["r"] == "1/3"
    try:
        mw.derived_scales(["2", "2"], ["4", "4", "1"])
    except ValueError as e:
        assert "index 1" in str(e)
    else:
        raise AssertionError("ordering violation accepted")

    t = mw.offdiag_targets("2", "2", "2", "3")
    assert t["r"] == t["q"] == "3"

    grid = mw.Grid(1, 4, seed=7)
    rng = random.Random(0)
    w = [math.exp(rng.uniform(-1, 1)) for _ in range(grid.cells)]
    f = [rng.uniform(-1, 1) for _ in range(grid.cells)]

    a2 = mw.ap_constant(grid, w, "2")["constant"]
    a22 = mw.apr_constant(grid, w, "2", "2")["constant"]
    assert a2 >= 1.0 and a22 >= 1.0
    # [v]_{A_{2,2}} = [v^2]_{A_2}^{1/2}
    assert abs(a22 - mw.ap_constant(grid, [x * x for x in w], "2")["constant"] ** 0.5) < 1e-9 * a22

    back = mw.telescope(grid, f)
    assert max(abs(a - b) for a, b in zip(back, f)) < 1e-12
    h = mw.haar(grid, 1, [0], [1])
    assert abs(sum(x * x for x in h) / grid.cells - 1.0) < 1e-12
    m = mw.maximal(grid, f, "all_discrete")
    assert all(mi >= abs(fi) - 1e-15 for mi, fi in zip(m, f))

    res = mw.rdf_iterate(grid, [abs(x) + 0.1 for x in f], w, t="2", K=16)
    assert res["certs"]["domination"] and res["certs"]["a1_pointwise_ratio"] <= 1 + 1e-12

    config = {
        "experiment": "offdiag-ratio",
        "grid": {"d": 1, "L": 3},
        "exponents": {"p0": "2", "r0": "2", "q0": "2", "p": "2"},
        "trials": 4,
        "seed": 1,
        "options": {"operator": "identity", "f_equals_g": True},
    }
    csv, summary = mw.run_experiment(json.dumps(config))
    assert csv.splitlines()[0] == "trial,seed,constant,lhs,rhs,ratio"
    assert abs(summary["max_ratio"] - 1.0) < 1e-12
    assert csv == mw.run_experiment(json.dumps(config))[0]

    rep = mw.verify("identities", scale=0.05)
    assert rep["passed"], rep
    bad = mw.verify("sparse", scale=0.1, inject_violation=True)
    assert not bad["passed"]

    print(f"multiweight {mw.__version__} smoke test ok")


if __name__ == "__main__":
    main()
