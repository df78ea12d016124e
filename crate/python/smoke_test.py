"""Import the extension module and exercise each binding once."""

from fractions import Fraction

import pilotplan_py as pp


def main():
    rates = pp.DepthRates.linear(2.0, 6.0, 4)
    assert len(rates) == 4 and rates.rates[0] == 2.0

    cfg = pp.TwoGroupConfig(81, 10, "1/5", Fraction(9, 10))
    assert (cfg.k1, cfg.k2) == (2, 8)
    for total in cfg.totals():
        assert cfg.rho(total) == cfg.rho_closed_form(total) <= cfg.mu(total)

    th = cfg.thresholds(rates)
    assert th[0] == 0.0 and th[-1] == float("inf")
    assert all(a <= b for a, b in zip(th, th[1:]))

    sol = cfg.optimize(200.0, rates)
    assert sol["feasible"] and sol["total"] >= 10
    assert sum(sol["p1"]["entries"]) == sol["rho"]
    assert sum(sol["p2"]["entries"]) == sol["total"] - sol["rho"]

    entries = pp.optimal_vector(16, 10, 81)
    assert sum(entries) == 16

    multi = pp.MultiGroupConfig(27, 10, [("1/10", "7/10"), ("2/5", "1/5"), ("1/2", "1/10")])
    lengths = multi.greedy_allocate(20, rates_for(27), rule="linear")
    assert sum(lengths) == 20 and len(lengths) == 3

    mc = pp.DepthRates.monte_carlo(9, trials=2000, seed=7)
    assert all(a < b for a, b in zip(mc.rates, mc.rates[1:]))

    try:
        cfg.optimize(-1.0, rates)
    except ValueError:
        pass
    else:
        raise AssertionError("negative coherence time accepted")

    print("smoke test ok:", sol["p1"]["entries"], sol["p2"]["entries"], lengths)


def rates_for(cells):
    depths = {9: 2, 27: 3, 81: 4}[cells]
    return pp.DepthRates.linear(2.0, 6.0, depths)


if __name__ == "__main__":
    main()
