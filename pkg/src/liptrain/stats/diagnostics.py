"""Convergence diagnostics for MCMC chains: split-chain R-hat and ESS."""

from __future__ import annotations

import numpy as np

__all__ = ["split_rhat", "effective_sample_size"]


def _split_halves(chains: np.ndarray) -> np.ndarray:
    """Split each chain in two, doubling the chain count."""
    m, n = chains.shape
    half = n // 2
    return np.concatenate([chains[:, :half], chains[:, n - half:]], axis=0)


def split_rhat(chains: np.ndarray) -> float:
    """Gelman-Rubin potential scale reduction factor on split chains.

    `chains` has shape (n_chains, n_draws) for a single scalar parameter.
    Values near 1 indicate the chains have mixed; > 1.05 is treated as
    non-convergence by the BEST driver.
    """
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2 or chains.shape[0] < 2 or chains.shape[1] < 4:
        raise ValueError("need at least 2 chains of at least 4 draws")
    pieces = _split_halves(chains)
    m, n = pieces.shape
    means = pieces.mean(axis=1)
    s2 = pieces.var(axis=1, ddof=1)
    w = s2.mean()
    b_over_n = means.var(ddof=1)
    if w == 0.0:
        # All pieces constant: identical constants are trivially converged.
        return 1.0 if b_over_n == 0.0 else np.inf
    var_hat = (n - 1) / n * w + b_over_n
    return float(np.sqrt(var_hat / w))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of one chain via FFT."""
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / n


def effective_sample_size(chains: np.ndarray) -> float:
    """Autocorrelation-based ESS across chains (Geyer paired truncation).

    Follows the multi-chain estimator of Gelman et al.: per-lag
    correlations are combined across chains against the pooled variance
    estimate, summed in consecutive pairs until a pair goes negative,
    with the pair sums forced monotone non-increasing.
    """
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2 or chains.shape[0] < 1 or chains.shape[1] < 4:
        raise ValueError("need chains of shape (n_chains, n_draws >= 4)")
    m, n = chains.shape
    s2 = chains.var(axis=1, ddof=1)
    w = s2.mean()
    if w == 0.0:
        return float(m * n)
    if m > 1:
        b_over_n = chains.mean(axis=1).var(ddof=1)
    else:
        b_over_n = 0.0
    var_hat = (n - 1) / n * w + b_over_n
    acov = np.vstack([_autocovariance(chains[j]) for j in range(m)])
    rho = 1.0 - (w - acov.mean(axis=0)) / var_hat

    tau = 0.0
    prev_pair = np.inf
    for k in range(n // 2):
        pair = rho[2 * k] + rho[2 * k + 1] if 2 * k + 1 < n else rho[2 * k]
        if pair < 0.0:
            break
        pair = min(pair, prev_pair)
        prev_pair = pair
        tau += pair
    tau = max(2.0 * tau - 1.0, 1e-12)
    return float(m * n / tau)
