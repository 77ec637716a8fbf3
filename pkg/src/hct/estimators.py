"""scikit-learn style front ends for the bootstrap-t and higher-criticism tools.

Both estimators treat the rows of ``X`` as observations and the columns as
features, follow the usual ``get_params`` / ``set_params`` / ``clone``
contract, and keep everything learned in trailing-underscore attributes.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bootstrap import bootstrap_quantile, bootstrap_t_draws, min_resamples
from .errors import ConfigError
from .hc import (
    VARIANTS,
    alpha_grid,
    default_alpha0,
    hc_bootstrap,
    hc_normal,
    hc_oracle,
    required_resamples,
)
from .prng import StreamKey, derive_stream
from .stats import column_t_statistics


def _validate(X) -> np.ndarray:
    return check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_all_finite=True)


class BootstrapTQuantiles(TransformerMixin, BaseEstimator):
    """Per-feature bootstrap-t critical values t_hat_alpha.

    ``fit`` draws ``B`` resamples per column (column ``j`` from child stream
    ``j`` of the seed) and stores ``quantiles_`` with shape
    (n_features, n_alphas).  ``transform`` returns, for new data, the
    indicators I(T_j > t_hat_alpha) as a float matrix of the same shape.
    """

    def __init__(self, alphas=(0.05,), B=None, seed=0):
        self.alphas = alphas
        self.B = B
        self.seed = seed

    def fit(self, X, y=None):
        X = _validate(X)
        alphas = np.asarray(self.alphas, dtype=np.float64).reshape(-1)
        if alphas.size == 0 or np.any((alphas <= 0) | (alphas >= 1)):
            raise ConfigError("alphas must be a non-empty list of levels in (0, 1)")
        B = self.B if self.B is not None else min_resamples(min(float(alphas.min()), 0.5))
        root = derive_stream(StreamKey(int(self.seed)))
        q = np.empty((X.shape[1], alphas.size))
        n_deg = np.empty(X.shape[1], dtype=np.int64)
        for j in range(X.shape[1]):
            d = bootstrap_t_draws(X[:, j], B, root.spawn(j))
            n_deg[j] = d.n_degenerate
            q[j] = [bootstrap_quantile(d, a) for a in alphas]
        self.alphas_ = alphas
        self.B_ = int(B)
        self.quantiles_ = q
        self.n_degenerate_ = n_deg
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "quantiles_")
        X = _validate(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        t = column_t_statistics(X)
        return (t[:, None] > self.quantiles_).astype(np.float64)


class HigherCriticism(BaseEstimator):
    """Higher-criticism test for sparse positive mean shifts.

    ``fit(X)`` computes the statistic for an n-by-p matrix; the result is in
    ``statistic_``, ``argmax_alpha_`` and ``trajectory_``.  ``predict(X)``
    refits and returns whether the statistic exceeds ``threshold``.

    Parameters
    ----------
    variant : {"bootstrap", "normal", "oracle"}
    B : int or None
        Resamples per feature; None uses ceil(100 / alpha_min) for the grid.
    alpha0 : float or None
        Upper end of the grid; None uses n log(p) / p.
    i_min : int
        First grid index, alpha_min = i_min / p.
    oracle_quantiles : array or None
        Exact null quantiles per grid level, required for ``variant="oracle"``.
    split : bool
        Bootstrap from the first half of the rows and test on the second.
    threshold : float or None
        Rejection threshold used by ``predict``.
    """

    def __init__(
        self,
        variant="bootstrap",
        B=None,
        alpha0=None,
        i_min=1,
        oracle_quantiles=None,
        split=False,
        threshold=None,
        seed=0,
        threads=1,
    ):
        self.variant = variant
        self.B = B
        self.alpha0 = alpha0
        self.i_min = i_min
        self.oracle_quantiles = oracle_quantiles
        self.split = split
        self.threshold = threshold
        self.seed = seed
        self.threads = threads

    def fit(self, X, y=None):
        X = _validate(X)
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        n, p = X.shape
        alpha0 = self.alpha0 if self.alpha0 is not None else default_alpha0(n, p)
        grid = alpha_grid(p, alpha0, self.i_min)
        if self.variant == "bootstrap":
            B = self.B if self.B is not None else required_resamples(grid)
            g = derive_stream(StreamKey(int(self.seed)))
            res = hc_bootstrap(X, grid, B, g, split=self.split, threads=self.threads)
        elif self.variant == "normal":
            res = hc_normal(X, grid)
        else:
            if self.oracle_quantiles is None:
                raise ConfigError("variant='oracle' needs oracle_quantiles")
            res = hc_oracle(X, grid, self.oracle_quantiles)
        self.grid_ = grid
        self.result_ = res
        self.statistic_ = res.value
        self.argmax_alpha_ = res.argmax_alpha
        self.trajectory_ = res.trajectory
        self.n_features_in_ = p
        return self

    def decision_function(self, X):
        """The higher-criticism statistic of ``X``."""
        return self.fit(X).statistic_

    def predict(self, X):
        if self.threshold is None:
            raise ConfigError("set threshold before calling predict")
        return bool(self.decision_function(X) > self.threshold)
