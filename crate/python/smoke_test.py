"""Smoke test for the pathlab_py extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pathlab_py-*.whl
"""

import cmath
import json
import math

import pathlab_py as pl


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    c = pl.Constants()
    free = pl.Potential.free()
    harmonic = pl.Potential.harmonic(1.0)

    # brute-force path sum agrees with the composed lattice kernel
    sg = pl.SpaceGrid(-1.0, 1.0, 5)
    tg = pl.TimeGrid(0.0, 1.0, 3)
    k = pl.lattice_kernel(sg, tg, harmonic)
    bf = pl.brute_force_kernel(sg, tg, harmonic, -0.5, 0.5)
    assert close(k.at(0.5, -0.5), bf, 1e-12), (k.at(0.5, -0.5), bf)

    # closed forms
    kf = pl.analytic_kernel_free(1.0, 0.0, 1.0, c)
    assert close(abs(kf), 1 / math.sqrt(2 * math.pi), 1e-14)
    try:
        pl.analytic_kernel_harmonic(1.0, 0.0, math.pi, 1.0)
    except pl.PathlabError as e:
        assert "focal point" in str(e)
    else:
        raise AssertionError("expected a focal-point error")

    # classical path for the harmonic oscillator
    fine = pl.TimeGrid(0.0, 1.0, 32)
    sol = pl.solve_classical_path(0.0, 1.0, fine, harmonic)
    assert sol.stationarity_residual < 1e-10
    assert sol.is_positive_definite
    mid = sol.positions[16]
    assert close(mid, math.sin(0.5) / math.sin(1.0), fine.dt ** 2)
    assert sol.probe(0.1, 200, 1) == 1.0

    # action and gradient on a straight line
    line = [t for t in pl.TimeGrid(0.0, 1.0, 4).nodes()]
    assert close(pl.discrete_action(line, pl.TimeGrid(0.0, 1.0, 4), free), 0.5, 1e-15)
    assert max(abs(g) for g in pl.action_gradient(line, pl.TimeGrid(0.0, 1.0, 4), free)) < 1e-14

    # transition quantity: <x>/K follows the straight line for a free particle
    wide = pl.SpaceGrid(-4.0, 4.0, 401, absorbing_band=0.1)
    tq = pl.transition_quantity("position", 0.0, 1.0, wide, pl.TimeGrid(0.0, 1.0, 4), free)
    for tau, r in zip(tq["times"], tq["normalized"]):
        assert close(r, complex(tau, 0.0), 1e-2), (tau, r)
    unit = pl.transition_quantity("unit", 0.0, 1.0, wide, pl.TimeGrid(0.0, 1.0, 4), free)
    assert all(close(s, unit["kernel"], 1e-12 * abs(unit["kernel"])) for s in unit["samples"])

    # the experiment harness, in memory
    cfg = json.dumps({"potential": {"kind": "harmonic", "omega": 1.0}})
    out = pl.run_command("theorem-check", cfg)
    assert out["passed"], out["summary"]
    assert "theorem_table.csv" in out["files"]
    assert "# config_sha256:" in out["files"]["theorem_table.csv"]

    print("pathlab_py", pl.__version__, "smoke test passed")
    print("  K_free(1,0;T=1) =", kf, "phase", cmath.phase(kf))
    print("  x_m(0.5) =", mid, " theorem-check:", out["summary"])


if __name__ == "__main__":
    main()
