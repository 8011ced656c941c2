import numpy as np
import pytest

from splinepde.experiments import (IdentifyConfig, choose_model, count_operations, identify,
                                   loglog_slope, monte_carlo, noise_level, replicate_seeds,
                                   smoothing_scale_for)
from splinepde.lasso import IdentifiedModel
from splinepde.simulate import NoiseSpec, PdeSpec, add_noise, simulate_field
from splinepde.spline import default_alpha
from splinepde.types import Field, Grid1D


def fake_path(supports):
    z = np.zeros(3)
    return [IdentifiedModel((), z, z, tuple(s), 1.0 / (k + 1), 0.0, 0.0)
            for k, s in enumerate(supports)]


def test_choose_model_longest_run():
    path = fake_path([(), (1,), (1,), (1, 2), (1, 2), (1, 2), (0, 1, 2, 3)])
    assert choose_model(path).support == (1, 2)


def test_choose_model_tie_prefers_sparser_then_larger_lambda():
    path = fake_path([(), (0, 1), (0, 1), (2,), (2,)])
    assert choose_model(path).support == (2,)
    path = fake_path([(0,), (0,), (1,), (1,)])
    assert choose_model(path) is path[0]


def test_choose_model_respects_declared_support_and_max_terms():
    path = fake_path([(), (1,), (1,), (1,), (0, 1)])
    assert choose_model(path, true_support=[1, 0]) is path[4]
    assert choose_model(fake_path([(), (0, 1, 2, 3)] * 3), max_terms=3) is None


@pytest.mark.parametrize("sigma", [0.01, 0.1, 1.0])
def test_noise_level_estimates_sigma(sigma):
    spec = PdeSpec("viscous_burgers")
    f = add_noise(simulate_field(spec, spec.grid(100, 100)), NoiseSpec(sigma, 5))
    assert noise_level(f) == pytest.approx(sigma, rel=0.1)


def test_smoothing_scale_floor_and_growth():
    g = Grid1D.uniform(50, 50)
    assert smoothing_scale_for(Field(g, np.zeros(g.shape))) == 1.0
    f = add_noise(Field(g, np.zeros(g.shape)), NoiseSpec(1.0, 0))
    assert smoothing_scale_for(f) == pytest.approx(400 * noise_level(f) ** 2)


def test_config_alphas():
    g = Grid1D.uniform(100, 60)
    f = Field(g, np.zeros(g.shape))
    assert IdentifyConfig(alpha_x=0.3, alpha_t=0.4).alphas(f) == (0.3, 0.4)
    ax, at = IdentifyConfig(smoothing_scale=10.0).alphas(f)
    assert ax == default_alpha(100, 10.0) and at == default_alpha(60, 10.0)
    assert IdentifyConfig().alphas(f) == (default_alpha(100), default_alpha(60))


def test_identify_single_lambda_and_recovery_flag():
    spec = PdeSpec("transport")
    f = simulate_field(spec, spec.grid(40, 40))
    res = identify(f, IdentifyConfig(lam=0.5), true_support=["u_x"])
    assert len(res.path) == 1 and res.recovered in (True, False)
    res = identify(f, true_support=["u_x"])
    assert res.recovered and res.chosen.support_labels == ["u_x"]
    assert res.chosen.refit_beta is not None


def test_replicate_seeds_distinct_and_stable():
    a = replicate_seeds(1, 20)
    assert len(set(a)) == 20 and a == replicate_seeds(1, 20)
    assert a[:5] == replicate_seeds(1, 5)
    assert set(a).isdisjoint(replicate_seeds(2, 20))


def test_monte_carlo_small_and_validation():
    res = monte_carlo(PdeSpec("transport"), 30, 30, [0.0, 0.01], 2, seed=1)
    assert res == {0.0: 1.0, 0.01: 1.0}
    single = monte_carlo(PdeSpec("transport"), 30, 30, [0.01], 2, seed=1, criterion="single")
    assert 0.0 <= single[0.01] <= 1.0
    with pytest.raises(ValueError):
        monte_carlo(PdeSpec("transport"), 30, 30, [0.1], 0)
    with pytest.raises(ValueError):
        monte_carlo(PdeSpec("transport"), 30, 30, [0.1], 1, criterion="best")


def test_loglog_slope_and_counts():
    assert loglog_slope([1, 2, 4], [3, 12, 48]) == pytest.approx(2.0)
    assert loglog_slope([5], [7]) is None
    assert count_operations("spline", 20, 40) < count_operations("localpoly", 20, 40)
    with pytest.raises(ValueError):
        count_operations("fft", 20, 20)
