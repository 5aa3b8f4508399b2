"""Smoke test for the cohwit extension.

Build and run from the repository root:

    cargo build --release -p cohwit-py --features extension-module
    cp target/release/libcohwit_py.so python/cohwit.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import cohwit  # noqa: E402


def close(a, b, tol=1e-6):
    return abs(a - b) <= tol


def main():
    assert close(cohwit.classical_coherence_bound(0, 1), math.sqrt(2) * math.exp(-0.5), 1e-12)
    assert close(cohwit.classical_coherence_bound(0, 2), math.sqrt(2) / math.e, 1e-12)

    space = cohwit.ObservableSpace("P0,X01")
    assert len(space) == 2 and space.observables() == ["P0", "X01"]

    c = cohwit.classify("P0,X01", [0.2, 0.6])
    assert c.verdict == "nonclassical" and c.margin > 0, c
    assert len(c.direction) == 2
    assert cohwit.classify("X01", [0.5]).verdict == "classical"
    assert cohwit.classify("P0,P1", [0.6, 0.6]).verdict == "inconsistent"

    try:
        cohwit.classify("P0,X01", [0.2])
    except cohwit.CohwitError:
        pass
    else:
        raise AssertionError("length mismatch should raise")

    h = cohwit.support_classical("P0,P1", [0.0, 1.0])
    assert close(h, math.exp(-1.0), 1e-9)
    assert cohwit.support_quantum("P0,P1", [0.0, 1.0]) >= h

    rho = cohwit.prepare_state("zero-one", 0.5, 0.0, 0.1)
    trace = sum(rho[i][i].real for i in range(len(rho)))
    assert close(trace, 1.0, 1e-9)

    cf = dict(cohwit.thermal_closed_form_01(0.5, 0.0, 0.1, 2))
    ex = cohwit.family_expectations("zero-one", "P0,X01", 0.5, 0.0, 0.1)
    assert close(cf["P0"], ex[0], 1e-9) and close(cf["X01"], ex[1], 1e-9)

    t = cohwit.find_threshold("zero-one", "P0,X01")
    assert close(t, 0.73, 0.01), t

    print("python smoke test: ok (zero-one threshold T* = %.4f)" % t)


if __name__ == "__main__":
    main()
