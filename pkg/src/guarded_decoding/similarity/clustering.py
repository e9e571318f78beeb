"""
Flat-kernel mean shift clustering with median-distance bandwidth estimation.
"""
import logging
import math
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

logger = logging.getLogger(__name__)

_CELLS_PER_CHUNK = 4_000_000


def estimate_bandwidth(
    X: np.ndarray,
    sample_size: int = 500,
    seed: int = 0
) -> float:
    """
    Median pairwise Euclidean distance over a random sample of points.

    Args:
        X: Points, shape (n, d)
        sample_size: Maximum number of points sampled
        seed: Sampling seed

    Returns:
        Positive bandwidth
    """
    X = np.asarray(X, dtype=float)
    if len(X) < 2:
        return 1.0
    if len(X) > sample_size:
        rng = np.random.default_rng(seed)
        X = X[np.sort(rng.choice(len(X), size=sample_size, replace=False))]
    median = float(np.median(pdist(X)))
    # identical points: any positive radius groups them
    return median if median > 0 else 1e-6


class MeanShift:
    """
    Mean shift with a flat kernel.

    Every point is shifted to the mean of the original points within
    ``bandwidth`` until its shift falls below ``tol``. With ``normalize``
    each shifted point is projected back onto the unit sphere, which keeps
    Euclidean distance a monotone function of cosine distance. Modes closer
    than ``bandwidth / 2`` are merged into the mode discovered first in
    input order.
    """

    def __init__(
        self,
        bandwidth: Union[float, str] = "auto",
        max_iter: int = 300,
        tol: float = 1e-4,
        normalize: bool = True,
        seed: int = 0
    ):
        if isinstance(bandwidth, str):
            if bandwidth != "auto":
                raise ValueError(f"Unknown bandwidth {bandwidth!r}")
        elif bandwidth <= 0:
            raise ValueError("Bandwidth must be positive")
        if max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if tol <= 0:
            raise ValueError("Shift tolerance must be positive")

        self.bandwidth = bandwidth
        self.max_iter = max_iter
        self.tol = tol
        self.normalize = normalize
        self.seed = seed

        self.labels_: Optional[np.ndarray] = None
        self.cluster_centers_: Optional[np.ndarray] = None
        self.modes_: Optional[np.ndarray] = None
        self.bandwidth_: Optional[float] = None
        self.n_iter_ = 0
        self.converged_ = False

    def fit(self, X: np.ndarray) -> "MeanShift":
        """
        Cluster the rows of ``X``.

        Args:
            X: Points, shape (n, d) or (n,) for one-dimensional data

        Returns:
            self, with ``labels_``, ``cluster_centers_`` and ``modes_`` set
        """
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) == 0:
            raise ValueError("Cannot cluster an empty set of points")

        bandwidth = (
            estimate_bandwidth(X, seed=self.seed)
            if self.bandwidth == "auto" else float(self.bandwidth)
        )
        self.bandwidth_ = bandwidth

        modes = X.copy()
        active = np.ones(len(X), dtype=bool)
        self.n_iter_ = 0
        while self.n_iter_ < self.max_iter and active.any():
            indices = np.flatnonzero(active)
            rows = max(1, _CELLS_PER_CHUNK // len(X))
            for chunk in np.array_split(indices, math.ceil(len(indices) / rows)):
                within = cdist(modes[chunk], X) <= bandwidth
                counts = within.sum(axis=1)
                shifted = modes[chunk].copy()
                has_neighbors = counts > 0
                shifted[has_neighbors] = (
                    within[has_neighbors].astype(float) @ X
                ) / counts[has_neighbors, None]
                if self.normalize:
                    shifted = self._project(shifted)

                shift = np.linalg.norm(shifted - modes[chunk], axis=1)
                modes[chunk] = shifted
                active[chunk[shift < self.tol]] = False
            self.n_iter_ += 1

        self.converged_ = not active.any()
        if not self.converged_:
            logger.warning(
                "Mean shift stopped after %d iterations with %d points still moving",
                self.n_iter_, int(active.sum())
            )

        self.modes_ = modes
        self.labels_, self.cluster_centers_ = self._merge_modes(modes, bandwidth / 2)
        logger.debug(
            "Mean shift: %d points, bandwidth %.4f, %d clusters, %d iterations",
            len(X), bandwidth, len(self.cluster_centers_), self.n_iter_
        )
        return self

    def fit_predict(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).labels_

    @staticmethod
    def _project(points: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(points, axis=1, keepdims=True)
        safe = np.where(norms > 0, norms, 1.0)
        return points / safe

    @staticmethod
    def _merge_modes(modes: np.ndarray, radius: float):
        centers = []
        labels = np.empty(len(modes), dtype=int)
        for i, mode in enumerate(modes):
            for label, center in enumerate(centers):
                if np.linalg.norm(mode - center) <= radius:
                    labels[i] = label
                    break
            else:
                centers.append(mode)
                labels[i] = len(centers) - 1
        return labels, np.array(centers)

    def __repr__(self) -> str:
        return (
            f"MeanShift(bandwidth={self.bandwidth}, max_iter={self.max_iter}, "
            f"tol={self.tol}, normalize={self.normalize})"
        )
