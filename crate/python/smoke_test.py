"""Smoke test for the pytagmetrics extension module.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
Then run:                 python python/smoke_test.py   (or pytest python/)
"""

import math

import pytagmetrics as tm

HOURGLASS = "aa -> aaa\nab -> b\nba -> a\nbb -> b"
ALTERNATING = "aa -> bbb\nab -> ab\nba -> bb\nbb -> a"


def close(a, b, tol=1e-12):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def test_rules():
    r = tm.RuleSet("aa -> aab\nab -> ab\nba -> b\nbb -> ba")
    assert r.n == 2 and r.glyphs == "ab"
    assert r.productions()["ba"] == "b"
    assert tm.RuleSet(r.to_text()) == r
    eps = tm.RuleSet("aa -> aa\nab -> ba\nba ->\nbb -> ab")
    assert eps.productions()["ba"] == ""
    try:
        tm.RuleSet("aa -> ab\nab -> ba\nba -> aa")
    except ValueError as e:
        assert "bb" in str(e)
    else:
        raise AssertionError("missing rule accepted")


def test_worked_example():
    prod = {"bbb": 0.25, "ab": 0.25, "bb": 0.25, "a": 0.25}
    sel = tm.selection_distribution(prod)
    assert close(sel["bbb"], 3 / 8) and close(sel["a"], 1 / 8)
    assert close(tm.prefix_probability("b", prod), 0.5)
    nxt = tm.next_tuple_distribution(prod)
    for t, want in {"aa": 1 / 16, "ab": 3 / 16, "ba": 3 / 16, "bb": 9 / 16}.items():
        assert close(nxt[t], want)
    sampled = tm.oracle_tuple_distribution(prod, symbols=200_000, seed=3)
    assert max(abs(sampled[t] - nxt[t]) for t in nxt) < 0.01


def test_predict():
    p = tm.predict(tm.RuleSet(HOURGLASS), length=100.0, epochs=7, tabulated=True)
    assert len(p) == 7
    assert [round(x, 2) for x in p.lengths()] == [100.0, 75.0, 75.0, 91.65, 126.02, 182.98, 271.36]
    e2 = p.epochs[2]
    assert close(e2.densities[0], 5 / 6)
    assert close(sum(e2.tuple_distribution.values()), 1.0, 1e-9)
    alt = tm.predict(tm.RuleSet(ALTERNATING), length=10000.0, epochs=10)
    assert alt.lengths()[-1] == 3164.0625


def test_simulate_and_compare():
    rules = tm.RuleSet(ALTERNATING)
    run = tm.simulate(rules, length=10_000, epochs=4, seed=1)
    assert [e.epoch for e in run.epochs] == [0, 1, 2, 3]
    assert abs(run.epochs[2].start_length - 7500) < 150
    assert tm.simulate(rules, queue="bb", epochs=3).halted_at_step == 1
    frames = tm.snapshots(rules, "aabb", epochs=1)
    assert frames[0] == "aabb" and frames[1] == "bbbbb"
    rows = tm.compare(tm.RuleSet(HOURGLASS), length=500, trials=50, epochs=2, seed=4)
    quantities = {r["quantity"] for r in rows}
    assert quantities == {"density_a", "density_b", "growth_per_step", "length"}
    assert all(abs(r["error"]) < 0.1 for r in rows if r["quantity"].startswith("density"))
    assert len(tm.random_queue(32, seed=9)) == 32


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
