import json

import numpy as np
import pytest

from splinepde.dictionary import dictionary_from_arrays
from splinepde.forecast import euler_forecast, model_terms, score_forecast
from splinepde.io import ingest_csv, synthetic_monthly_table, write_table_csv
from splinepde.lasso import LassoConfig, coordinate_descent, with_refit
from splinepde.simulate import transport_field
from splinepde.types import Field, Grid1D


def transport_error(N, T=0.02, M=100):
    x = np.arange(1, M + 1) / M
    g = Grid1D(x, np.linspace(0.0, T, N))
    pred = euler_forecast(2 * np.sin(4 * x), g, {"u_x": -2.0}, alpha_x=1.0)
    exact = transport_field(g).values
    return np.max(np.abs(pred.values[:, -1] - exact[:, -1]))


def test_step_halving_halves_error():
    e = [transport_error(N) for N in (11, 21, 41)]
    assert 1.6 <= e[0] / e[1] <= 2.4
    assert 1.6 <= e[1] / e[2] <= 2.4


def test_zero_coefficient_model_keeps_state():
    g = Grid1D.uniform(20, 6)
    u0 = np.sin(g.x)
    pred = euler_forecast(u0, g, {"u_x": 0.0})
    assert np.array_equal(pred.values, np.repeat(u0[:, None], 6, axis=1))


def test_intercept_model_grows_linearly():
    g = Grid1D.uniform(10, 8)
    u0 = np.cos(g.x)
    pred = euler_forecast(u0, g, {"1": 3.0})
    assert np.allclose(pred.values[:, -1] - u0, 3.0 * (g.t[-1] - g.t[0]), atol=1e-12)


def test_model_terms_from_identified_model():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((40, 3))
    d = dictionary_from_arrays(X, 2 * X[:, 0] + 0.01 * rng.standard_normal(40))
    m = coordinate_descent(d, LassoConfig(lam=0.5))
    assert [str(l) for l, _ in model_terms(m)] == ["u"]
    lasso_coef = model_terms(m)[0][1]
    refit = model_terms(with_refit(d, m))[0][1]
    assert refit == pytest.approx(2.0, abs=0.01) and lasso_coef < refit


def test_model_validation():
    g = Grid1D.uniform(10, 5)
    with pytest.raises(ValueError):
        euler_forecast(np.zeros(9), g, {"u_x": 1.0})
    with pytest.raises(ValueError):
        euler_forecast(np.full(10, np.nan), g, {"u_x": 1.0})
    with pytest.raises(ValueError):
        model_terms({})
    with pytest.raises(ValueError):
        model_terms({"u_xxx": 1.0})


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_is_reported():
    g = Grid1D(np.linspace(0, 1, 30), np.linspace(0, 50, 200))
    with pytest.raises(FloatingPointError, match="step"):
        euler_forecast(np.sin(np.linspace(0, 1, 30)), g, {"u^2": 10.0})


def test_score():
    g = Grid1D.uniform(5, 4)
    obs = Field(g, np.ones(g.shape))
    pred = Field(g, np.zeros(g.shape))
    r = score_forecast(pred, obs)
    assert np.array_equal(r.rmse_per_step, np.ones(4))
    assert np.array_equal(r.residual.values, np.ones(g.shape))
    assert score_forecast(obs, obs).summary()["max_abs_residual"] == 0.0
    with pytest.raises(ValueError):
        score_forecast(pred, Field(Grid1D.uniform(5, 5), np.ones((5, 5))))


def test_synthetic_table_end_to_end(tmp_path):
    lon, labels, values = synthetic_monthly_table()
    p = tmp_path / "sst.csv"
    write_table_csv(p, lon, labels, values)
    f = ingest_csv(p)
    g = f.grid
    pred = euler_forecast(f.values[:, 0], g, {"u_x": -1.0})
    res = score_forecast(pred, f)
    assert res.rmse_per_step[0] == 0.0
    assert np.all(np.isfinite(res.rmse_per_step))
    out = tmp_path / "f.json"
    res.to_json(out, model_terms({"u_x": -1.0}))
    assert json.loads(out.read_text())["model"] == {"u_x": -1.0}
