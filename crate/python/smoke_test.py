"""Smoke test for the swarmseek Python module.

Uses an installed ``swarmseek`` (``maturin develop`` in crates/python) or
falls back to the library built by
``cargo build -p swarmseek-py --release --features extension-module``.
"""

import importlib.util
import json
import os
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        import swarmseek

        return swarmseek
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libswarmseek_py.so"
        if lib.exists():
            spec = importlib.util.spec_from_file_location("swarmseek", lib)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("swarmseek module not found; build crates/python first")


def main():
    ss = load_module()

    v = ss.jury_check(0.675, -0.285, 1.193, 1.193, 1.0)
    assert v.stable, v
    lhs, rhs, ok = v.conditions["C13"]
    assert abs(lhs - 2.39525) < 1e-9 and abs(rhs - 2.386) < 1e-9 and ok
    assert "C14" in ss.jury_check(1.2, 1.2, 1.193, 1.193, 1.0).failed_conditions

    assert ss.steady_state(1.0, 3.0, 2.0, 6.0) == 5.0
    xs = ss.simulate_recurrence(0.675, -0.285, 1.0, [0.0, 0.0, 0.0], 2000, 0.8, 0.4, 10.0, 10.0)
    assert abs(xs[-1] - 10.0) < 1e-9

    sc = ss.Scenario(overrides={"algorithm": "apso", "n": 5})
    rec = sc.run(seed=7, record_trajectories=True)
    assert rec.seed == 7
    assert len(rec.trajectories) == 5
    assert rec.iterations == sc.run(seed=7).iterations
    json.loads(rec.to_json())

    again = ss.Scenario(text=sc.echo())
    assert again.digest() == sc.digest()

    try:
        ss.Scenario(overrides={"params.w1": 1.5, "params.w2": 1.5})
    except ss.UnstableError as e:
        assert "C14" in str(e)
    else:
        raise AssertionError("unstable parameters accepted")
    try:
        ss.Scenario(overrides={"nonsense": 1})
    except ss.ConfigError:
        pass
    else:
        raise AssertionError("unknown key accepted")

    grid = ss.Scenario(overrides={"grid.algorithm": ["spso", "apso"], "runs": 10})
    rows = grid.experiment(seed=3)
    assert [r["algorithm"] for r in rows] == ["spso", "apso"]
    assert rows == grid.experiment(seed=3)
    assert all(r["N"] == 10 for r in rows)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "run.json")
        sc.archive(path, seed=11)
        assert ss.replay(path).seed == 11
        spso = ss.Scenario(overrides={"algorithm": "spso"})
        try:
            ss.replay(path, spso)
        except ss.ReplayMismatch:
            pass
        else:
            raise AssertionError("digest mismatch not detected")

    for r in rows:
        print(f"{r['algorithm']:>5}: I={r['mu_I']:.2f} Ts={r['mu_Ts']:.2f} SD={r['mu_SD']:.1f} failures={r['n_failures']}")
    print("python smoke test ok")


if __name__ == "__main__":
    main()
