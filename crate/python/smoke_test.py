"""Smoke test for the cusp_py extension.

Build first:  pip install --no-build-isolation ./crates/py
"""

import json
import pathlib
import sys

import cusp_py

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check_goldens():
    for script in sorted((ROOT / "scripts").glob("*.cusp")):
        code, out = cusp_py.run(script.read_text())
        golden = script.with_suffix(".json").read_text()
        assert code == 0, (script.name, code)
        assert out == golden, f"{script.name}: output differs from golden"
        assert json.loads(out)["schema"] == cusp_py.SCHEMA


def check_diagnostics():
    code, out = cusp_py.run("semigroup N = builtin(extnat\n")
    assert code == 2
    assert json.loads(out)["diagnostics"]
    try:
        cusp_py.format("gamma")
    except ValueError as e:
        assert "error" in str(e)
    else:
        raise AssertionError("format accepted a malformed script")


def check_structures():
    names = cusp_py.corpus_names()
    assert "twopoint" in names
    for name in names:
        s = cusp_py.Structure.from_corpus(name)
        assert s.cu_violation() is None, name
        # On a finite Cu-semigroup every element is compact, so gamma(iota S) = S.
        assert s.gamma_len() == len(s), name
    t = cusp_py.Structure.from_corpus("twopoint")
    assert t.add("inf", "inf") == "inf"
    assert t.leq("0", "inf") and not t.leq("inf", "0")
    assert t.way_below("inf", "inf")


def main():
    check_goldens()
    check_diagnostics()
    check_structures()
    print("smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
