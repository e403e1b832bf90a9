import numpy as np
import pytest

from polylab.metrics import MetricError
from polylab.scenario import (
    BUILTIN_SCENARIOS,
    ScenarioError,
    builtin_scenario,
    parse_scenario,
    scenario_objects,
    serialize_scenario,
)


@pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
def test_builtin_roundtrip(name):
    sc = builtin_scenario(name)
    again = parse_scenario(serialize_scenario(sc))
    assert again == sc
    assert parse_scenario(serialize_scenario(again)) == again


def test_builtin_objects():
    p, m = scenario_objects(builtin_scenario("cube-euclid"))
    assert p.nfaces == 6 and m.name == "euclid"
    p, m = scenario_objects(builtin_scenario("sheared-violating"))
    assert p.nfaces == 6 and m.name == "constant"


def test_minimal_scenario_defaults():
    sc = parse_scenario(BUILTIN_SCENARIOS["cube-euclid"].split("[sweep]")[0])
    assert sc.lambdas == (25.0, 50.0, 100.0, 200.0)
    assert sc.resolution == 64 and sc.sigma == 1.2 and sc.tau == 1.1


def test_overrides():
    sc = builtin_scenario("cube-euclid").with_overrides(lambdas=[30], resolution=24, seed=9)
    assert sc.lambdas == (30.0,) and sc.resolution == 24 and sc.seed == 9
    # None values leave fields alone
    sc2 = sc.with_overrides(resolution=None, trials=7)
    assert sc2.resolution == 24 and sc2.trials == 7


@pytest.mark.parametrize(
    "mutate,frag",
    [
        (lambda t: t.replace("halfspace = 1 0 0 ; -1", "halfspace = 1 0 ; -1"), "coefficients"),
        (lambda t: t.replace("n = 3", "m = 3"), "unknown key"),
        (lambda t: t + "\n[weird]\nx = 1\n", "unknown section"),
        (lambda t: t.replace("family = euclid", "family = fancy"), "unknown metric family"),
        (lambda t: t.replace("family = euclid", "family = conformal\nphi = exp("), "bad phi"),
        (lambda t: t.replace("lambda = 25 50 100 200", "lambda = a b"), "expected numbers"),
    ],
)
def test_parse_errors(mutate, frag):
    with pytest.raises(ScenarioError) as err:
        parse_scenario(mutate(BUILTIN_SCENARIOS["cube-euclid"]))
    assert frag in str(err.value)


def test_non_spd_at_interior_point():
    text = BUILTIN_SCENARIOS["cube-euclid"].replace("family = euclid", "family = entries\ng11 = x1 - 0.6")
    with pytest.raises(MetricError):
        parse_scenario(text)


def test_entries_metric_roundtrip():
    text = BUILTIN_SCENARIOS["cube-euclid"].replace(
        "family = euclid", "family = entries\ng11 = 1 + 0.1*x2^2\ng12 = 0.05*x3"
    )
    sc = parse_scenario(text)
    assert parse_scenario(serialize_scenario(sc)) == sc
    p, m = scenario_objects(sc)
    g = m(np.array([[0.5, 0.5, 0.5]]))[0]
    assert g[0, 1] == pytest.approx(0.025)
    assert g[1, 0] == pytest.approx(0.025)


def test_unknown_builtin():
    with pytest.raises(ScenarioError):
        builtin_scenario("nope")
