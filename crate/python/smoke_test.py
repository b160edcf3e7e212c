"""Smoke test of the adtreduce extension module.

Build and install it first:
    pip install --no-build-isolation ./crates/python
"""

import os
import sys

import adtreduce

LISTS = """(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))
(declare-const x CList)
(declare-const y Colour)
"""

NAT = """(declare-datatypes ((Nat 0)) (((one) (succ (pred Nat)))))
(declare-const x Nat)
(declare-const y Nat)
"""


def main():
    query = LISTS + "(assert (and ((_ is cons) x) (not (= y blue)) (or (= (head x) red) (= x (cons y nil)))))"
    r = adtreduce.solve(query)
    assert r["verdict"] == "sat", r
    print("solve:", r["verdict"], r["model"])

    r = adtreduce.solve(LISTS + "(declare-const k Int)(assert (= (adt.size x) (* 2 k)))")
    assert r["verdict"] == "unsat", r

    r = adtreduce.solve(NAT + "(assert (and (not (= x y)) (= (adt.size x) (adt.size y))))", fuel=20)
    assert r["verdict"] == "unknown" and "NonExpanding(Nat)" in r["reason"], r
    print("fuel 20:", r["reason"].split(";")[1].strip())

    text = adtreduce.emit(query, optimize=False)
    assert "ctorId_CList" in text and "depth_CList" in text

    info = adtreduce.analyze(NAT)
    assert not info["Nat"]["expanding"] and info["Nat"]["cycle"] == "Nat -> succ -> Nat", info
    print("analyze:", info)

    shim = os.path.join(os.path.dirname(os.path.abspath(__file__)), "cvc5_shim.py")
    try:
        import cvc5  # noqa: F401
    except ImportError:
        print("interpolate: skipped (cvc5 not installed)")
    else:
        a = LISTS + "(declare-const z CList)(assert (and (= (tail x) z) ((_ is cons) z) (not (= (head x) (head z)))))"
        b = "(declare-const c Colour)(declare-const w CList)(assert (= x (cons c (cons c w))))"
        i = adtreduce.interpolate(a, b, f"{sys.executable} {shim}")
        assert i is not None
        print("interpolate:", i)

    summary = adtreduce.corpus(signatures=2, formulas=20)
    assert summary["disagreements"] == 0, summary
    print("corpus:", summary)
    print("ok")


if __name__ == "__main__":
    main()
