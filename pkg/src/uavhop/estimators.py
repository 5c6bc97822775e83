"""scikit-learn style wrappers around the hop-count search.

``fit`` takes a :class:`NetworkScenario` (or a mapping of its fields), picks
the throughput-maximizing hop count and keeps the whole throughput curve.
``predict`` maps hop counts to end-to-end throughput.
"""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from ._util import ordered_map
from .channel import NetworkScenario
from .covert import CovertConstraints, equal_power_covert, evaluate_covert
from .secrecy import SecrecyConstraints, equal_power_secrecy, evaluate_secrecy

_SCHEMES = ("optimal", "equal")


def check_scenario(scenario) -> NetworkScenario:
    """Coerce ``None``, a mapping or a scenario into a validated scenario."""
    if scenario is None:
        return NetworkScenario()
    if isinstance(scenario, NetworkScenario):
        return scenario
    if isinstance(scenario, Mapping):
        try:
            return NetworkScenario(**scenario)
        except TypeError as exc:
            raise ValueError(f"bad scenario fields: {exc}") from None
    raise TypeError(f"expected a NetworkScenario or mapping, got {type(scenario).__name__}")


def check_hop_counts(X) -> np.ndarray:
    """Hop counts as a 1-D int array; accepts shape (n,) or (n, 1)."""
    arr = check_array(X, ensure_2d=False, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected one column of hop counts, got {arr.shape[1]}")
        arr = arr[:, 0]
    if np.any(arr < 1) or np.any(arr != np.round(arr)):
        raise ValueError("hop counts must be positive integers")
    return arr.astype(int)


class _HopPlanner(BaseEstimator):
    def _evaluate(self, scenario, n):
        raise NotImplementedError

    def _check_params(self):
        if self.power_scheme not in _SCHEMES:
            raise ValueError(f"power_scheme must be one of {_SCHEMES}, got {self.power_scheme!r}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError("n_max must be a positive integer")
        if int(self.n_jobs) != self.n_jobs or self.n_jobs < 1:
            raise ValueError("n_jobs must be a positive integer")

    def fit(self, X=None, y=None):
        """Search hop counts ``1..n_max`` for the scenario ``X``.

        Parameters
        ----------
        X : NetworkScenario, mapping or None
            Geometry and channel constants; ``None`` uses the defaults. The
            scenario's own hop count is ignored.
        y : ignored

        Returns
        -------
        self
        """
        self._check_params()
        scenario = check_scenario(X)
        sols = ordered_map(lambda n: self._evaluate(scenario, n),
                           range(1, int(self.n_max) + 1), int(self.n_jobs))
        curve = np.array([s.throughput for s in sols])
        best = int(np.argmax(curve))
        self.scenario_ = scenario
        self.throughput_curve_ = curve
        self.hops_ = best + 1
        self.solution_ = sols[best]
        self.powers_ = np.asarray(sols[best].powers)
        return self

    def predict(self, X):
        """Throughput of each requested hop count under the fitted scenario."""
        check_is_fitted(self, "throughput_curve_")
        hops = check_hop_counts(X)
        out = np.empty(hops.size)
        for i, n in enumerate(hops):
            out[i] = (self.throughput_curve_[n - 1] if n <= self.throughput_curve_.size
                      else self._evaluate(self.scenario_, int(n)).throughput)
        return out

    def score(self, X=None, y=None):
        """Best achievable throughput, or the mean over hop counts ``X``."""
        check_is_fitted(self, "throughput_curve_")
        if X is None:
            return float(self.throughput_curve_[self.hops_ - 1])
        return float(np.mean(self.predict(X)))


class SecrecyHopPlanner(_HopPlanner):
    """Hop count and power plan maximizing secrecy throughput.

    Parameters
    ----------
    zeta : float
        Secrecy outage budget in (0, 1).
    power_total : float
        Sum transmit power in watts.
    n_max : int
        Largest hop count searched.
    power_scheme : {"optimal", "equal"}
        Closed-form optimal split or the equal-power benchmark.
    n_jobs : int
        Threads used for the search.

    Attributes
    ----------
    hops_ : int
    solution_ : SecrecySolution
    powers_ : numpy.ndarray
    throughput_curve_ : numpy.ndarray
        Secrecy throughput for hop counts ``1..n_max``.
    """

    def __init__(self, zeta=0.1, power_total=1.0, n_max=50, power_scheme="optimal", n_jobs=1):
        self.zeta = zeta
        self.power_total = power_total
        self.n_max = n_max
        self.power_scheme = power_scheme
        self.n_jobs = n_jobs

    def _evaluate(self, scenario, n):
        cons = SecrecyConstraints(self.zeta, self.power_total)
        fn = evaluate_secrecy if self.power_scheme == "optimal" else equal_power_secrecy
        return fn(scenario.with_hops(n), cons)


class CovertHopPlanner(_HopPlanner):
    """Hop count and power plan maximizing covert transmit throughput.

    Parameters mirror :class:`SecrecyHopPlanner` with ``epsilon`` (the
    warden's detection-error margin) in place of ``zeta``.
    """

    def __init__(self, epsilon=0.05, power_total=1.0, n_max=200, power_scheme="optimal", n_jobs=1):
        self.epsilon = epsilon
        self.power_total = power_total
        self.n_max = n_max
        self.power_scheme = power_scheme
        self.n_jobs = n_jobs

    def _evaluate(self, scenario, n):
        cons = CovertConstraints(self.epsilon, self.power_total)
        fn = evaluate_covert if self.power_scheme == "optimal" else equal_power_covert
        return fn(scenario.with_hops(n), cons)
