"""Synthetic measurement data: Gaussian I/Q snapshots and Wishart sample covariances.

Random numbers come from :class:`RngStream`, a counter-based stream keyed by
``(master_seed, stream_index)``.  The bit generator is Philox4x64-10 seeded
through ``numpy.random.SeedSequence(master_seed, spawn_key=(stream_index,))``;
normals are NumPy's ziggurat ``Generator.standard_normal`` and chi-squares
``Generator.chisquare``.  Pinning these keeps seeded outputs stable across runs
and independent of how trials are distributed over workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import check_psd, check_symmetric, psd_tolerance, symmetrize

DIM = 4


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(seq))

    def child(self, index: int) -> "RngStream":
        """Stream for trial ``index`` under the same master seed."""
        return RngStream(self.master_seed, int(index))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True)
class SampleCov:
    """Sample covariance ``(1/N) sum x x^T`` and the snapshot count ``N``.

    Only symmetry is enforced: hand-built matrices that are not PSD are
    allowed so the estimator's boundary handling can be exercised.
    """

    matrix: np.ndarray
    n: int

    def __post_init__(self):
        m = check_symmetric(self.matrix)
        if int(self.n) < 1:
            raise ValueError("n must be >= 1")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n", int(self.n))


def _sqrt_factor(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    check_symmetric(cov, atol=1e-12 * max(float(np.max(np.abs(cov))), 1.0))
    cov = symmetrize(cov)
    if not check_psd(cov):
        raise ValueError("covariance is not positive semidefinite")
    w, v = np.linalg.eigh(cov)
    # eigen square root keeps rank-deficient (rho = 1) matrices samplable
    return v * np.sqrt(np.clip(w, 0.0, None))


def draw_snapshots(cov, n: int, rng) -> np.ndarray:
    """``n`` zero-mean Gaussian snapshots with covariance ``cov``.

    Returns an ``(n, 4)`` array with columns ``(I1, Q1, I2, Q2)``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    factor = _sqrt_factor(cov)
    z = _as_generator(rng).standard_normal((n, DIM))
    return z @ factor.T


def sample_covariance(snapshots) -> SampleCov:
    """``(1/N) sum_n x_n x_n^T``: divisor ``N`` and no mean subtraction."""
    x = np.asarray(snapshots, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != DIM:
        raise ValueError(f"snapshots must have shape (N, 4), got {x.shape}")
    n = x.shape[0]
    if n == 0:
        raise ValueError("need at least one snapshot")
    return SampleCov(symmetrize(x.T @ x / n), n)


def draw_wishart_sample_cov(cov, n: int, rng) -> SampleCov:
    """``X / n`` with ``X ~ W_4(cov, n)`` via the Bartlett decomposition.

    ``X = L A A^T L^T`` where ``L`` is the Cholesky factor of ``cov`` and ``A`` is
    lower triangular with ``A_ii = sqrt(chi2(n - i))`` and standard normal
    entries below the diagonal.
    """
    n = int(n)
    if n < DIM:
        raise ValueError(f"Wishart path needs n >= {DIM}, got {n}")
    cov = symmetrize(check_symmetric(cov, atol=1e-12 * max(float(np.max(np.abs(cov))), 1.0)))
    if np.linalg.eigvalsh(cov)[0] <= psd_tolerance(cov):
        raise ValueError("Wishart scale matrix must be positive definite")
    chol = np.linalg.cholesky(cov)
    gen = _as_generator(rng)
    a = np.zeros((DIM, DIM))
    a[np.diag_indices(DIM)] = np.sqrt(gen.chisquare(n - np.arange(DIM)))
    a[np.tril_indices(DIM, -1)] = gen.standard_normal(DIM * (DIM - 1) // 2)
    la = chol @ a
    return SampleCov(symmetrize(la @ la.T / n), n)
