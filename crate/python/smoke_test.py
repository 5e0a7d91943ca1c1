"""Quick checks of the `tll` extension module.

Build and run from the repository root:

    cargo build --release -p tll-py
    python3 python/smoke_test.py

The script looks for the built library under target/{release,debug} and
imports it as `tll`.
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_tll():
    try:
        import tll  # installed wheel or a tll.so on the path

        return tll
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libtll.so", "libtll.dylib", "tll.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                loader = importlib.machinery.ExtensionFileLoader("tll", str(lib))
                spec = importlib.util.spec_from_file_location("tll", lib, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                sys.modules["tll"] = module
                return module
    sys.exit("tll extension not found; run `cargo build -p tll-py` first")


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    tll = load_tll()
    checks = []

    tg = tll.Field.taylor_green(2, 32)
    l2 = math.sqrt(2.0) * math.pi
    checks.append(("taylor-green L2", close(tg.l2_norm(), l2)))
    checks.append(("taylor-green solenoidal", tll.relative_divergence(tg) < 1e-12))

    # e^{tA} acts on a |ξ|² = 2 eigenfunction by e^{-2t}
    decayed = tll.stokes_semigroup(tg, 0.25)
    checks.append(("stokes eigen decay", close(decayed.l2_norm(), l2 * math.exp(-0.5))))
    checks.append(("nonlinear term vanishes", tll.nonlinear_term(tg).max_abs() < 1e-10))

    # constant 3 on the 2-torus: ‖·‖_{L_{p,p}} = 3 (4π²)^{1/p}
    n = 16
    const = tll.Field(2, n, 1, [3.0] * (n * n))
    checks.append(("lorentz of constant", close(tll.lorentz_quasinorm(const, 2.0, 2.0), 3.0 * 2.0 * math.pi)))

    norm = tll.tll_norm(tg, s=0.0, p=2.0, q=2.0, r=2.0)
    checks.append(("tll norm bracket", 0.5 * l2 < norm <= l2 * (1 + 1e-12)))

    with tempfile.TemporaryDirectory() as tmp:
        path = str(pathlib.Path(tmp) / "tg.tllf")
        tg.save(path)
        back = tll.Field.load(path)
        checks.append(("save/load roundtrip", back.values() == tg.values()))

    out = tll.solve(tg, {"resolution": 32, "dt": 0.01, "t_max": 0.1, "sample_every": 5})
    final = out["final"]
    checks.append(("solver verdict", out["report"]["verdict"] == "completed"))
    checks.append(("solver heat decay", close(final.l2_norm(), l2 * math.exp(-0.2), 1e-6)))

    reports = tll.run_suite("decomposition-independence", count=4, resolutions=[32, 64], times=[0.5, 1.0])
    checks.append(("suite report", reports[0]["passed"] is True))

    width = max(len(name) for name, _ in checks)
    for name, ok in checks:
        print(f"{name:<{width}}  {'ok' if ok else 'FAIL'}")
    failed = [name for name, ok in checks if not ok]
    if failed:
        sys.exit(f"{len(failed)} check(s) failed")
    print(f"all {len(checks)} checks passed")


if __name__ == "__main__":
    main()
