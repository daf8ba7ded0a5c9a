"""Smoke test for the screenkit_py extension module.

Build and run from the repository root:

    cargo build --release -p screenkit-python --features extension-module
    cp target/release/libscreenkit_py.so python/screenkit_py.so
    python3 python/smoke_test.py
"""

import math
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import screenkit_py as sk


def main():
    names = sk.methods()
    assert len(names) == 10 and "WD-Screen" in names, names

    rng = random.Random(5)
    n = 40
    y = [rng.gauss(0, 1) for _ in range(n)]
    noise = [rng.gauss(0, 1) for _ in range(n)]
    for m in names:
        u_self = sk.utility(m, y, y)
        u_noise = sk.utility(m, noise, y)
        assert math.isfinite(u_self) and u_self > u_noise, (m, u_self, u_noise)

    # feature 3 is y itself; every method should rank it first
    x = [[rng.gauss(0, 1) if j != 3 else y[i] for j in range(8)] for i in range(n)]
    for m in ["SIS", "DC-SIS", "PC-Screen", "WD-Screen"]:
        table = sk.score_all(m, x, y)
        assert len(table) == 8
        assert table.ranking()[0] == 3, (m, table.utilities)
        assert table.top_k(1, [f"g{j}" for j in range(8)]) == ["g3"]

    assert sk.cutoff(200) == 37

    cost, plan = sk.ot_exact([[0.0], [1.0]], [0.5, 0.5], [[0.0], [1.0]], [0.5, 0.5])
    assert abs(cost) < 1e-12 and abs(plan[0][0] - 0.5) < 1e-12
    approx, _ = sk.sinkhorn([[0.0], [1.0]], [0.5, 0.5], [[0.5], [2.0]], [0.5, 0.5], epsilon=0.2)
    exact, _ = sk.ot_exact([[0.0], [1.0]], [0.5, 0.5], [[0.5], [2.0]], [0.5, 0.5])
    assert abs(approx - exact) < 0.05 * exact, (approx, exact)
    perm, c = sk.assignment([[4.0, 1.0], [2.0, 8.0]])
    assert perm == [1, 0] and c == 3.0

    inst = sk.gen_study("S1", replicate=0, seed=11, n=50, p=20)
    assert inst.true_features == [0, 1, 11, 12]
    assert len(inst.x) == 1 and len(inst.x[0]) == 50 and len(inst.x[0][0]) == 20

    report = sk.simulate("S1", 2, seed=3, n=60, p=30, methods=["SIS", "DC-SIS"])
    assert [r["method"] for r in report["results"]] == ["SIS", "DC-SIS"]
    assert report["cutoff"] == sk.cutoff(60)

    try:
        sk.utility("no-such-method", y, y)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    print("screenkit_py smoke test passed")


if __name__ == "__main__":
    main()
