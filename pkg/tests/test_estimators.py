import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hct.bootstrap import bootstrap_quantile, bootstrap_t_draws
from hct.errors import ConfigError
from hct.estimators import BootstrapTQuantiles, HigherCriticism
from hct.hc import alpha_grid, hc_bootstrap, hc_normal
from hct.prng import StreamKey, derive_stream


def data(n=20, p=12, key=0):
    return derive_stream(StreamKey(key)).standard_normal((n, p))


def test_get_params_and_clone():
    est = HigherCriticism(variant="normal", alpha0=0.3, threshold=2.0)
    params = est.get_params()
    assert params["variant"] == "normal" and params["alpha0"] == 0.3
    c = clone(est)
    assert c.get_params() == params and not hasattr(c, "statistic_")
    q = BootstrapTQuantiles(alphas=(0.05, 0.1), B=500).set_params(seed=3)
    assert clone(q).get_params()["seed"] == 3


def test_quantiles_match_functional_route():
    X = data()
    est = BootstrapTQuantiles(alphas=(0.1, 0.2), B=1000, seed=4).fit(X)
    root = derive_stream(StreamKey(4))
    for j in (0, 5, 11):
        d = bootstrap_t_draws(X[:, j], 1000, root.spawn(j))
        assert est.quantiles_[j].tolist() == [bootstrap_quantile(d, 0.1), bootstrap_quantile(d, 0.2)]
    out = est.transform(X)
    assert out.shape == (12, 2) and set(np.unique(out)) <= {0.0, 1.0}
    assert np.all(out[:, 0] <= out[:, 1])


def test_transform_checks():
    with pytest.raises(NotFittedError):
        BootstrapTQuantiles().transform(data())
    est = BootstrapTQuantiles(alphas=(0.2,), B=500).fit(data())
    with pytest.raises(ValueError):
        est.transform(data(p=5))
    with pytest.raises(ConfigError):
        BootstrapTQuantiles(alphas=(1.5,)).fit(data())
    with pytest.raises(ValueError):
        BootstrapTQuantiles().fit(np.array([[1.0, np.nan], [2.0, 3.0]]))


def test_hc_estimator_matches_functions():
    X = data(30, 50, 5)
    grid = alpha_grid(50, 0.3)
    est = HigherCriticism(variant="bootstrap", alpha0=0.3, seed=6).fit(X)
    ref = hc_bootstrap(X, grid, 10_000, derive_stream(StreamKey(6)))
    assert est.statistic_ == ref.value and est.argmax_alpha_ == ref.argmax_alpha
    normal = HigherCriticism(variant="normal", alpha0=0.3).fit(X)
    assert normal.statistic_ == hc_normal(X, grid).value


def test_predict_and_oracle():
    X = data(30, 50, 7)
    X[:, :6] += 1.5
    est = HigherCriticism(variant="normal", alpha0=0.3, threshold=2.0)
    assert est.predict(X) is True
    assert est.decision_function(X) == est.statistic_
    with pytest.raises(ConfigError):
        HigherCriticism(variant="normal", alpha0=0.3).predict(X)
    with pytest.raises(ConfigError):
        HigherCriticism(variant="oracle", alpha0=0.3).fit(X)
    with pytest.raises(ConfigError):
        HigherCriticism(variant="magic").fit(X)
    size = alpha_grid(50, 0.3).size
    oracle = HigherCriticism(variant="oracle", alpha0=0.3, oracle_quantiles=np.full(size, np.inf)).fit(X)
    assert oracle.statistic_ < 0
