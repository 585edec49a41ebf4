"""scikit-learn compatible wrappers.

``RevenueIndexTransformer`` maps ``[time_min_per_day, freq_visits_per_week]``
rows to the revenue index columns. The share of total time is relative to the
data seen in ``fit``, so ``fit_transform`` on a full dataset reproduces
:func:`pollinate.revenue.revenue_table`.

``MediaLengthSelector`` is fit on ``[preferred_length, width]`` rows (one per
user type) and exposes the engagement-maximising length as ``length_``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .heterogeneity import EngagementProfile, joint_engagement, median_media_length
from .revenue import RevenueParams, UsageRow, revenue_table


class RevenueIndexTransformer(TransformerMixin, BaseEstimator):
    feature_names = ("ln_time", "pct_mt", "depth", "cwri", "mwri", "d_cwri", "d_mwri")

    def __init__(self, cpc=2.0, cpm=7.0):
        self.cpc = cpc
        self.cpm = cpm

    def _check_positive(self, X):
        if np.any(X <= 0):
            raise ValueError("time and frequency must be strictly positive")

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (time, freq), got {X.shape[1]}")
        self._check_positive(X)
        RevenueParams(self.cpc, self.cpm)
        self.total_time_ = float(np.sum(X[:, 0]))
        return self

    def transform(self, X):
        check_is_fitted(self, "total_time_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        self._check_positive(X)
        time, freq = X[:, 0], X[:, 1]
        ln_time = np.log(60.0 * time)
        pct = time / self.total_time_
        depth = freq * ln_time
        cwri = self.cpc * pct * depth
        mwri = self.cpm * freq * time / 100.0
        return np.column_stack([ln_time, pct, depth, cwri, mwri, pct * cwri, pct * mwri])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)

    def table(self, X, platforms=None):
        """The same computation through the row-based revenue pipeline."""
        X = check_array(X, dtype=np.float64)
        names = platforms if platforms is not None else [f"p{i}" for i in range(len(X))]
        rows = [UsageRow(n, float(t), float(f)) for n, (t, f) in zip(names, X)]
        return revenue_table(rows, RevenueParams(self.cpc, self.cpm))


class MediaLengthSelector(BaseEstimator):
    def __init__(self, search_interval=None, grid_resolution=0.01, kernel="gaussian"):
        self.search_interval = search_interval
        self.grid_resolution = grid_resolution
        self.kernel = kernel

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (preferred_length, width), got {X.shape[1]}")
        self.profiles_ = [EngagementProfile(str(i), float(mu), float(s)) for i, (mu, s) in enumerate(X)]
        res = median_media_length(self.profiles_, self.search_interval, self.grid_resolution,
                                  self.kernel)
        self.length_ = res.length
        self.joint_engagement_ = res.joint_engagement
        return self

    def score_lengths(self, lengths):
        """Summed engagement of the fitted types at each length."""
        check_is_fitted(self, "length_")
        lengths = np.asarray(lengths, dtype=float)
        return joint_engagement(self.profiles_, lengths, self.kernel)
