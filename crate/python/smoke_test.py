"""Smoke test for the qwalk_py extension.

Build and install first:
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/qwalk_py-*.whl
"""

import csv
import io
import json
import sys

import qwalk_py as q


def max_diff(a, b):
    return max(abs(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def main():
    u = q.haar_unitary(5, 42)
    sched = q.compile(u, 1e-9)
    doc = json.loads(sched)
    assert doc["dim"] == 5, doc["dim"]

    residual = q.verify(sched, u)
    assert residual <= 1e-9, residual

    ideal = q.simulate(sched)
    assert max_diff(ideal, u) <= 1e-9

    noisy = q.simulate(sched, sigma_phase=0.3, seed=7)
    fid, sim = q.scores(noisy, u)
    assert abs(sim - 1.0) <= 1e-9, sim
    assert fid < 1.0

    try:
        q.compile([[1, 1], [0, 1]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unitary target accepted")

    config = {"dim": 4, "n_unitaries": 2, "n_patterns": 2,
              "grid": {"start": 0.0, "stop": 0.2, "count": 3}}
    rows = list(csv.DictReader(io.StringIO(q.sweep("phase", json.dumps(config)))))
    assert len(rows) == 12, len(rows)
    for r in rows:
        if r["arch"] == "qwalk":
            assert abs(float(r["mean_similarity"]) - 1.0) <= 1e-9

    for line in q.selftest(3):
        print(line)
    print(f"qwalk_py {q.__version__}: smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
