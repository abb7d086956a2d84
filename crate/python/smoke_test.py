#!/usr/bin/env python3
"""Smoke test for the riesz_lab_py extension module.

Builds are looked up in target/release first, then target/debug. The cdylib
is copied into a temp directory under the importable module name before the
import, so no installation step is needed.
"""

import json
import pathlib
import shutil
import sys
import tempfile

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_extension() -> pathlib.Path:
    candidates = []
    for profile in ("release", "debug"):
        base = REPO_ROOT / "target" / profile
        candidates.extend(
            [
                base / "libriesz_lab_py.so",
                base / "riesz_lab_py.dll",
                base / "libriesz_lab_py.dylib",
            ]
        )
    for path in candidates:
        if path.exists():
            return path
    sys.exit(
        "extension not built; run `cargo build -p riesz-lab-py` (or --release) first"
    )


def import_module():
    built = locate_extension()
    staging = pathlib.Path(tempfile.mkdtemp(prefix="riesz-lab-py-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, staging / f"riesz_lab_py{suffix}")
    sys.path.insert(0, str(staging))
    import riesz_lab_py

    return riesz_lab_py


def main() -> None:
    rl = import_module()
    print(f"imported riesz_lab_py {rl.version()} from {rl.__file__}")

    # lattice arithmetic is exact and coordinatewise
    x = rl.LatticeElement(["1", "-2", "3"])
    y = rl.LatticeElement(["-1", "2", "-3"])
    assert x.join(y).coords() == ["1", "2", "3"]
    assert x.meet(y).coords() == ["-1", "-2", "-3"]
    assert x.abs().coords() == ["1", "2", "3"]
    assert x.pos_part().sub(x.neg_part()) == x
    assert x.pos_part().meet(x.neg_part()).coords() == ["0", "0", "0"]
    assert x.scale("1/3").coords() == ["1/3", "-2/3", "1"]
    assert not x.leq(y) and not y.leq(x)

    # piecewise-linear functions keep exact breakpoints and norms
    tent = rl.PwlFunc.tent(4)
    assert tent.sup_norm() == "1"
    assert tent.l1_norm() == "1/8"
    assert tent.eval("1/8") == "1/2"
    ramp = rl.PwlFunc.ramp(3)
    assert ramp.max_abs_slope() == "3"
    two_bumps = rl.PwlFunc.unit_l1_bump(1, 2).join(rl.PwlFunc.unit_l1_bump(2, 2))
    assert two_bumps.l1_norm() == "2"
    f = rl.PwlFunc([("0", "0"), ("1", "1")])
    g = rl.PwlFunc([("0", "1"), ("1", "0")])
    assert f.join(g).eval("1/2") == "1/2"
    assert f.join(g).points() == [("0", "1"), ("1/2", "1/2"), ("1", "1")]

    # operators: modulus closed form, oracle, induced norms, domination
    linf2 = json.dumps({"kind": "seq_l_inf", "dim": 2})
    t = rl.MatrixOp([["1", "-2"], ["-3", "4"]], linf2, linf2)
    assert t.modulus().entries() == [["1", "2"], ["3", "4"]]
    ones = rl.LatticeElement(["1", "1"])
    assert t.modulus_rk(ones).coords() == ["3", "7"]
    assert t.modulus().apply(ones) == t.modulus_rk(ones)
    assert t.induced_norm() == "7"
    assert t.modulus().dominates(t)
    s = rl.MatrixOp([["2", "2"], ["3", "4"]], linf2, linf2)
    assert s.dominates(t)
    assert not t.dominates(s)
    round_trip = rl.MatrixOp.from_json(t.to_json())
    assert round_trip == t

    # probes: the projection-gap certificate from Python
    report = json.loads(rl.run_probe("projection_gap"))
    assert report["verdict"] == "fails"
    assert all(value == "1" for _, value in report["curve"])

    # registry is visible
    registry = rl.probe_registry()
    assert "am_identity" in registry and len(registry) == 10

    # a tiny config runs end to end, deterministically
    config = {
        "probes": [
            {"name": "am_identity", "params": {"tag": {"kind": "seq_l1", "dim": 2}}},
        ],
        "seed": 11,
        "output": "unused",
        "format": "json",
    }
    manifest_a = rl.run_config(json.dumps(config))
    manifest_b = rl.run_config(json.dumps(config))
    assert manifest_a == manifest_b
    manifest = json.loads(manifest_a)
    assert manifest["reports"][0]["verdict"] == "fails"
    assert manifest["reports"][0]["witnesses"][0]["ratio"] == "2"

    # default config parses and covers the registry
    default = json.loads(rl.default_config_json())
    assert {p["name"] for p in default["probes"]} == set(registry)

    # errors surface as ValueError with the library's message
    try:
        rl.LatticeElement([])
    except ValueError:
        pass
    else:
        sys.exit("expected a ValueError for the empty element")
    try:
        rl.run_probe("no-such-probe")
    except ValueError:
        pass
    else:
        sys.exit("expected a ValueError for an unknown probe")

    print("smoke test passed")


if __name__ == "__main__":
    main()
