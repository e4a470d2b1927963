"""scikit-learn style front ends for entropy estimation and chaos classification."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import chaos
from .bowen import Method, MetricKind
from .dynamics import Family, builtin_family, family_from_config
from .entropy import estimate_entropy, growth_table
from .exceptions import ContractViolation


def resolve_family(family) -> Family:
    """Accept a :class:`Family`, a built-in name or a config dict."""
    if isinstance(family, Family):
        return family
    if isinstance(family, str):
        return builtin_family(family)
    if isinstance(family, dict):
        return family_from_config(family)
    raise ContractViolation(f"cannot build a family from {type(family).__name__}")


def _check_points(X, dim: int, name: str = "X") -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim == 1:
        X = X.reshape(-1, dim)
    if X.shape[1] != dim:
        raise ContractViolation(f"{name} has {X.shape[1]} columns, expected {dim}")
    return X


class HausdorffEntropyEstimator(BaseEstimator):
    """Estimate the Hausdorff metric entropy of a family from separated-set growth.

    ``fit(X)`` uses the rows of ``X`` as candidate points; with ``X=None``
    a grid of spacing ``grid_resolution`` (default ``min(epsilons) / 4``)
    is used instead.

    Attributes set by ``fit``: ``record_``, ``estimate_``, ``entropy_``
    (the headline rate), ``slopes_`` (rate per epsilon) and
    ``n_features_in_``.
    """

    def __init__(self, family="example41", epsilons=(0.05, 0.02), n_max=8,
                 kind="hausdorff_bowen", method="greedy", grid_resolution=None,
                 count="s", tail_fraction=0.5):
        self.family = family
        self.epsilons = epsilons
        self.n_max = n_max
        self.kind = kind
        self.method = method
        self.grid_resolution = grid_resolution
        self.count = count
        self.tail_fraction = tail_fraction

    def fit(self, X=None, y=None):
        fam = resolve_family(self.family)
        eps = [float(e) for e in np.atleast_1d(self.epsilons)]
        if int(self.n_max) < 3:
            raise ContractViolation("n_max must be at least 3 so the fit has four points")
        if self.count not in ("r", "s"):
            raise ContractViolation("count must be 'r' or 's'")
        ns = range(int(self.n_max) + 1)
        kind, method = MetricKind(self.kind), Method(self.method)
        if X is None:
            res = self.grid_resolution if self.grid_resolution is not None else min(eps) / 4
            self.record_ = growth_table(fam, ns, eps, kind, method, grid_resolution=res)
        else:
            cand = _check_points(X, fam.space.dim)
            self.record_ = growth_table(fam, ns, eps, kind, method, candidates=cand)
        self.n_features_in_ = fam.space.dim
        self.estimate_ = estimate_entropy(self.record_, self.count, self.tail_fraction)
        self.entropy_ = self.estimate_.headline
        self.slopes_ = dict(self.estimate_.slopes)
        return self

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "estimate_")
        return self.entropy_


class ChaosPairClassifier(BaseEstimator):
    """Label point pairs by the distributional-chaos class of their orbit-set distances.

    Each row of ``X`` is ``x`` followed by ``y``.  ``predict`` returns
    ``"HDC1"``, ``"HDC2"``, ``"DC3"`` or ``"none"``; ``predict_liyorke``
    returns the Li-Yorke flag; ``transform`` returns the columns
    ``tail_max, tail_min, max_phi_gap``.
    """

    def __init__(self, family="rotation_id", n=500, theta_sep=0.05, eta_prox=0.005,
                 dc_gap_tol=0.1, dc_zero_tol=0.02, t_grid_size=50):
        self.family = family
        self.n = n
        self.theta_sep = theta_sep
        self.eta_prox = eta_prox
        self.dc_gap_tol = dc_gap_tol
        self.dc_zero_tol = dc_zero_tol
        self.t_grid_size = t_grid_size

    def fit(self, X=None, y=None):
        self.family_ = resolve_family(self.family)
        self.thresholds_ = chaos.ChaosThresholds(self.theta_sep, self.eta_prox,
                                                 self.dc_gap_tol, self.dc_zero_tol)
        if int(self.n) < chaos.MIN_PROFILE_LENGTH:
            raise ContractViolation(f"n must be at least {chaos.MIN_PROFILE_LENGTH}")
        self.t_grid_ = chaos.default_t_grid(self.family_.space.diameter, int(self.t_grid_size))
        self.n_features_in_ = 2 * self.family_.space.dim
        return self

    def _classify(self, X):
        check_is_fitted(self, "thresholds_")
        dim = self.family_.space.dim
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2 * dim:
            raise ContractViolation(f"expected {2 * dim} columns (x then y), got {X.shape[1]}")
        rows = chaos.scan_pairs(self.family_, X[:, :dim], X[:, dim:], int(self.n),
                                self.t_grid_, self.thresholds_)
        return [c for _, _, c in rows]

    def predict(self, X) -> np.ndarray:
        return np.array([c.dc_class or "none" for c in self._classify(X)], dtype=object)

    def predict_liyorke(self, X) -> np.ndarray:
        return np.array([c.liyorke for c in self._classify(X)])

    def transform(self, X) -> np.ndarray:
        return np.array([[c.tail_max, c.tail_min, c.max_phi_gap] for c in self._classify(X)])
