"""Smoke test for the pyoscone extension.

Build and install first:  pip install --no-build-isolation -e crates/py
Run with:  python python/smoke_test.py   (or pytest python/)
"""

import math

import pyoscone as po


def test_boxes():
    pr = po.CorrelationBox.pr()
    assert pr.chsh() == 4.0
    assert po.CorrelationBox.from_json(pr.to_json()) == pr
    assert po.CorrelationBox.deterministic([0, 0], [1, 1]).chsh() == -2.0
    assert po.classify(po.CorrelationBox.uniform())["summary"].startswith("P:yes L:yes Q:yes")


def test_pr_matrix():
    m = [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]]
    report = po.classify_matrix(m)
    assert report["summary"] == "P:yes L:no Q:no(sqrt-Bell violated, lhs 2 rhs 0)"
    bell = po.sqrt_bell_value(m)
    assert bell["lhs"] == [2.0, 2.0] and bell["rhs"] == 0.0 and bell["violated"]


def test_displayed_q():
    e11, e22 = [[1, 0], [0, 0]], [[0, 0], [0, 1]]
    q = po.max_cone_construct([e11, e22, e11, e22], [e11, e22, e11, e22])
    assert q == [[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
    assert not po.sqrt_bell_value(q)["violated"]


def test_tsirelson():
    r = po.seesaw_maximize(dim=2, restarts=20, seed=0)
    assert abs(r["value"] - 2 * math.sqrt(2)) < 1e-3
    assert po.classify(r["box"])["summary"].startswith("P:yes L:no")


def test_operator_systems():
    assert abs(po.numerical_radius([[0, 1], [0, 0]]) - 0.5) < 1e-10
    assert po.ando_split([[0, 1], [0, 0]])["status"] == "feasible"
    assert po.ando_split([[0, 1.2], [0, 0]])["status"] == "infeasible-evidence"
    assert po.nc2_positivity(3, 1, 1, 1e-6)["status"] == "feasible"
    assert po.nc2_positivity(2, 1, 1, 1e-6)["status"] == "infeasible-evidence"
    assert po.gamma_quotient([1, 1, -1, -1]) == [0.0, 0.0, 0.0]
    assert abs(po.torus_min_eig_h(360) - (3 - 2 * math.sqrt(2))) < 1e-4


def test_errors():
    for bad in (lambda: po.classify_matrix([[1, 2], [3, 4]]), lambda: po.numerical_radius([[1, 2, 3]])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")


if __name__ == "__main__":
    tests = [f for name, f in sorted(globals().items()) if name.startswith("test_")]
    for t in tests:
        t()
        print(f"ok  {t.__name__}")
    print(f"{len(tests)} smoke tests passed")
