"""Smoke test for the `pulsedyn` extension: closed forms, one run, one scattering."""

import math

import pulsedyn


def main() -> None:
    k = pulsedyn.coefficients(0.17)
    assert abs(k["h_star"] - 6.2146081) < 5e-8, k
    assert abs(k["tau_c"] - 0.1767767) < 5e-8, k
    assert k["tau_d"] < k["tau_c"] < k["tau_h"], k

    eigs = pulsedyn.eigenvalues(k["tau_h"])
    crossing = max(eigs, key=lambda z: abs(z.imag))
    assert abs(crossing.real) < 1e-10, eigs

    h, r = pulsedyn.traveling_pulse(0.17)
    assert abs(h - 7.352897) < 5e-6 and abs(r - 0.493888) < 5e-6, (h, r)

    plus, minus, zero = pulsedyn.front_speeds(0.17)
    assert math.isclose(plus + minus + zero, 0.0, abs_tol=1e-12)

    run = pulsedyn.simulate(0.17)
    assert run["class"] == "TP+", run["class"]
    assert len(run["t"]) == len(run["l1"]) > 100

    label, residence = pulsedyn.scatter(70.0, 0.002)
    assert label == "PEN" and residence is not None and residence > 0, (label, residence)

    cells = pulsedyn.phase_diagram([10.0, 70.0], [-0.008, 0.008], jobs=2)
    assert len(cells) == 4 and {c[2] for c in cells} <= {"PEN", "REB", "DEC1", "DEC2"}, cells

    try:
        pulsedyn.coefficients(-1.0)
    except ValueError as e:
        assert str(e).startswith("["), e
    else:
        raise AssertionError("negative tau accepted")

    print("pulsedyn smoke test passed")


if __name__ == "__main__":
    main()
