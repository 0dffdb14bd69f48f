"""Smoke test for the `fbcap` extension module.

Build and stage the module, then run this script:

    cargo build -p fbcap-py --release
    cp target/release/libfbcap_py.so python/fbcap.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import fbcap  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    # White-noise reduction and units.
    r = fbcap.ma1_feedback_capacity(0.0, 3.0)
    close(r.rate_bits, 1.0, 1e-12)
    close(fbcap.white_capacity(3.0), 0.5 * math.log(4.0), 1e-15)

    # Root solver against the recursion fixed point.
    c = fbcap.ma1_feedback_capacity(0.5, 1.0)
    close(c.rate_nats, fbcap.fixed_point(0.5, 1.0), 1e-10)
    close(fbcap.arma11_conjectured_rate(0.5, 0.0, 1.0).rate_nats, c.rate_nats, 1e-12)
    assert fbcap.interleaved_ma2_greedy_rate(0.5, 1.0).rate_nats < c.rate_nats

    trace = fbcap.run_recursion(0.5, [1.0] * 2000, 1.0)
    close(trace.per_symbol_rate, c.rate_nats, 1e-3)
    assert len(trace.j) == 2001

    # Determinant of the unit-coefficient covariance is n + 1.
    k = fbcap.ma1_covariance(1.0, 3)
    assert k[0] == [2.0, 1.0, 0.0]

    # The two block-capacity solvers agree.
    g = fbcap.greedy_block_capacity(0.7, 4, 1.0)
    h = fbcap.generic_optimize(0.7, 4, 1.0)
    close(g.rate_nats, h.rate_nats, 1e-5)
    assert len(g.kv) == 4 and len(g.b[0]) == 4

    # Coding scheme.
    p = fbcap.SchemeParams(0.7, 1.0, 10, 0.9)
    close(p.entropy_gap(), p.capacity_nats, 1e-8)
    rep = fbcap.run_montecarlo(p, 2000, seed=1)
    again = fbcap.run_montecarlo(p, 2000, seed=1)
    assert rep.errors == again.errors and rep.to_json() == again.to_json()
    lo, hi = rep.error_ci
    assert lo <= rep.error_rate <= hi
    assert json.loads(rep.to_json())["n"] == 10

    try:
        fbcap.ma1_feedback_capacity(2.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for |alpha| > 1")

    print("fbcap smoke test passed")


if __name__ == "__main__":
    main()
