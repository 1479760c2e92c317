"""Smoke test for the Python bindings.

Build and install first:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
"""

import math

import mkdv_shock_py as m


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert m.q(1.0, -100.0, 10.0) == 1.0
    assert m.q(1.0, 1000.0, 10.0) == 0.0

    s = m.sample(1.0, 0.0, 10.0)
    assert s["region"]["tag"] == "Elliptic"
    d0 = 0.8009608663101257
    assert close(s["envelope_hi"], 1.0 + d0, 1e-10)
    assert 1.0 - d0 - 1e-12 <= s["q"] <= 1.0 + d0 + 1e-12

    st = m.modulation(1.0, 0.0)
    assert close(st["d"], d0, 1e-10)
    assert st["b_g"] > 0 and st["b_omega"] < 0 and st["delta"] < 0

    mm = st["m"]
    assert close(st["tau"], -2 * math.pi * m.elliptic_k(1 - mm) / m.elliptic_k(mm), 1e-8 * abs(st["tau"]))
    assert close(m.theta_function(0j, -10.0).real, 1.01347589, 1e-8)
    assert close(m.dn(m.elliptic_k(0.5), 0.5), math.sqrt(0.5), 1e-13)

    x, q = m.profile(1.0, 10.0, -100.0, 100.0, 201)
    assert len(x) == len(q) == 201 and x[0] == -100.0 and x[-1] == 100.0

    run = m.simulate(1.0, [4.0], half_length=64.0, n_points=1024)
    assert run["l2_drift"] < 1e-6 and run["mass_drift"] < 1e-8
    sl = run["slices"][0]
    report = m.compare(1.0, sl["t"], sl["x"], sl["q"])
    assert "envelope" in report and "wavelength" in report

    try:
        m.q(-1.0, 0.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative c accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
