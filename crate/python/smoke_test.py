"""Smoke test for the smoothiso Python bindings."""

import math

import smoothiso_py as si


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    k = si.Kernel()
    assert k.name == "triweight"
    assert close(k(0.0), 35 / 32, 1e-12)
    assert close(k.dsq(), 350 / 429, 1e-12)

    f = si.Function.polynomial([1.0, -1.0])
    assert f.is_decreasing() and close(f(0.25), 0.75, 1e-15)
    bump = si.Function("lambda_a", {"a": 0.45})
    assert not bump.is_decreasing()

    # same seed, same data
    ys = si.simulate_regression(f, 500, 0.1, 7)
    assert ys == si.simulate_regression(f, 500, 0.1, 7)
    assert len(ys) == 500

    grid = si.grid(101)
    sg = si.smoothed_grenander(ys, 0.15, grid)
    assert all(a >= b - 1e-12 for a, b in zip(sg, sg[1:])), "SG not monotone"
    kern = si.kernel_estimate(ys, 0.15, grid)
    gs = si.isotonized_kernel(ys, 0.15, grid)
    for est in (sg, kern, gs):
        err = max(abs(e - f(t)) for e, t in zip(est, grid))
        assert err < 0.15, err

    density = si.Function.polynomial([1.5, -1.0])
    draws = si.simulate_density(density, 2000, 3)
    assert draws == sorted(draws) and 0.0 <= draws[0] and draws[-1] <= 1.0
    dens = si.smoothed_grenander(draws, 0.2, grid, kind="density")
    assert close(dens[50], 1.0, 0.15), dens[50]

    knots, values = si.least_concave_majorant([0.0, 0.5, 1.0], [0.0, -1.0, 0.0])
    assert knots == [0.0, 1.0] and values == [0.0, 0.0]

    c = si.constants("linear-regression", 1.0, 1000)
    assert c["regime"] and c["theta2"] > 0 and math.isfinite(c["m_center"])

    rep = si.clt_experiment("linear-regression", "sg", 1.0, 200, 20, 11)
    assert len(rep["z_values"]) == 20

    gaps = si.chernoff_gap_sample(2.0, 0.002, 20, 5)
    assert len(gaps) == 20 and min(gaps) >= 0.0

    assert close(si.rice_sigma(ys), 0.1, 0.02)
    out = si.bootstrap_test(ys, 9, bootstrap=50)
    assert out["reject"] == (out["tn"] > out["critical_value"])
    power = si.power_study(bump, 100, 0.05, 5, 1, bootstrap=40)
    assert 0.0 <= power["rejection_rate"] <= 1.0

    try:
        si.Kernel("gaussian")
    except ValueError as e:
        assert "unknown kernel" in str(e)
    else:
        raise AssertionError("expected ValueError")

    print("smoke test ok")


if __name__ == "__main__":
    main()
