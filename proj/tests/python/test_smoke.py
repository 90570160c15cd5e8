import math

import numpy as np
import pytest

import phdf

GAMMA = math.exp(-1.0)


def test_law_roundtrip():
    f = phdf.parse_law("pareto(2,1)")
    assert f.sf(1.0) == pytest.approx(0.25, rel=1e-15)
    assert f.cdf(f.quantile(0.9)) == pytest.approx(0.9, rel=1e-12)
    with pytest.raises(phdf.PhdfError, match="invalid-spec"):
        phdf.parse_law("pareto(2")


def test_phantom_exact_at_levels():
    g = phdf.rule_phantom(GAMMA, "n", 1000)
    for n in (1, 10, 999):
        assert abs(g.pow_n(float(n), float(n)) - GAMMA) < 1e-14
    again = phdf.Phantom.deserialize(g.serialize())
    assert again.cdf(17.5) == g.cdf(17.5)


def test_degenerate_levels():
    with pytest.raises(phdf.PhdfError, match="degenerate-driving-sequence"):
        phdf.continuous_phantom(0.5, [2.0, 2.0, 2.0])


def test_paths_are_deterministic():
    spec = phdf.parse_process("lindley(shift(pareto(2,1),-2))")
    a = phdf.generate(spec, 7, 5000)
    b = phdf.generate(spec, 7, 5000)
    assert np.array_equal(a["values"], b["values"])
    marks = a["regeneration_marks"]
    assert marks and all(a["values"][i] == 0.0 for i in marks)


def test_exact_laws_and_theta():
    mm = phdf.parse_process("moving_max(2,uniform(0,1))")
    assert phdf.exact_max_cdf(mm, 10, 0.9) == pytest.approx(0.9**11, rel=1e-14)
    th = phdf.estimate_theta(mm, GAMMA, [100, 1000, 10000], exact=True)
    assert th["verdict"] == "positive"
    assert abs(th["theta_hat"] - 0.5) < 1e-2
    mix = phdf.estimate_theta(phdf.parse_process("mixture(n)"), GAMMA, [10, 100, 1000, 10000], exact=True)
    assert mix["verdict"] == "zero"


def test_rates():
    assert phdf.threshold_beta("theta", 1.0) == pytest.approx(1 + math.sqrt(5), rel=1e-15)
    v = phdf.check_rate_sufficiency("eta", 4.0, 1.0)
    assert not v["sufficient"] and v["margin"] == 0.0
    with pytest.raises(phdf.PhdfError):
        phdf.threshold_beta("kappa", 2.0)
