"""Closed-form accuracy of one- and two-layer GCNs on the binary cSBM.

One layer: ``sign(A X W)`` without self-loops on diametric class means
``+-mu m``; accuracy conditioned on the neighbour counts is an erf
expression, and averaging it over binomial neighbour counts gives the
expected accuracy. Two layers: the optimal linear model
``K sum_j sum_k X(k).m`` over self-looped neighbourhoods, whose accuracy in
the sparse (Poisson) limit is a four-index series over first- and
second-shell class counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import special, stats

from .generators import ParameterError, lambda_to_probs


class TruncationError(RuntimeError):
    """The requested tail-mass bound could not be met."""


def erf(x):
    """Gauss error function (scalar or array)."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return special.erf(np.asarray(x, dtype=float))


def normal_cdf(x):
    """Standard normal cdf; accurate in both tails (uses erfc)."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    return special.ndtr(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class TheoryResult:
    accuracy: float
    truncation_limits: dict
    neglected_mass: float


# ---------------------------------------------------------------- one layer

def embedding_moments(mu: float, theta: float, n_in: int, n_out: int,
                      w_norm: float = 1.0) -> tuple[float, float]:
    """Mean and variance of ``(A X W)_i`` for unit-variance feature noise."""
    if w_norm <= 0:
        raise ParameterError("w_norm must be positive")
    mean = mu * (n_in - n_out) * w_norm * math.cos(theta)
    return mean, w_norm ** 2 * (n_in + n_out)


def conditional_accuracy(mu: float, theta: float, n_in, n_out, sigma: float = 1.0):
    """P(correct | n_in, n_out) for the one-layer sign classifier.

    Nodes without neighbours score 0 and count as a coin flip (0.5).
    Broadcasts over array-valued ``n_in`` / ``n_out``.
    """
    n_in = np.asarray(n_in, dtype=float)
    n_out = np.asarray(n_out, dtype=float)
    tot = n_in + n_out
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (mu / sigma) * (n_in - n_out) * math.cos(theta) / np.sqrt(2.0 * tot)
    acc = np.where(tot > 0, 0.5 * (special.erf(np.where(tot > 0, arg, 0.0)) + 1.0), 0.5)
    return float(acc) if acc.ndim == 0 else acc


def expected_accuracy_one_layer(mu: float, theta: float, N: int, p_in: float,
                                p_out: float, sigma: float = 1.0) -> float:
    """Accuracy averaged over ``n_in ~ Bin(N/2, p_in)``, ``n_out ~ Bin(N/2, p_out)``."""
    if N % 2:
        raise ParameterError("N must be even")
    if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
        raise ParameterError("probabilities must lie in [0, 1]")
    half = N // 2
    ks = np.arange(half + 1)
    w_in = stats.binom.pmf(ks, half, p_in)
    w_out = stats.binom.pmf(ks, half, p_out)
    keep_in = w_in > 0
    keep_out = w_out > 0
    a = conditional_accuracy(mu, theta, ks[keep_in][:, None], ks[keep_out][None, :], sigma)
    # centring on 1/2 makes the no-signal cases exact despite pmf rounding
    return float(0.5 + w_in[keep_in] @ (a - 0.5) @ w_out[keep_out])


class ThetaChoice(NamedTuple):
    theta_star: Optional[float]
    acc_at_0: float
    acc_at_pi: float
    degenerate: bool


def optimal_theta(mu: float, N: int, p_in: float, p_out: float,
                  sigma: float = 1.0) -> ThetaChoice:
    """Compare the two critical angles 0 and pi and return the better one.

    With ``p_in == p_out`` the comparison is degenerate and ``theta_star``
    is ``None``.
    """
    a0 = expected_accuracy_one_layer(mu, 0.0, N, p_in, p_out, sigma)
    api = expected_accuracy_one_layer(mu, math.pi, N, p_in, p_out, sigma)
    if p_in == p_out:
        return ThetaChoice(None, a0, api, True)
    return ThetaChoice(0.0 if a0 >= api else math.pi, a0, api, False)


# ---------------------------------------------------------------- two layers

def poisson_pmf(kk, rate):
    """``rate**k exp(-rate) / k!`` evaluated in log space."""
    rate_a = np.asarray(rate, dtype=float)
    if np.any(rate_a < 0):
        raise ParameterError("Poisson rate must be non-negative")
    k = np.asarray(kk, dtype=float)
    if np.any(k < 0):
        raise ParameterError("k must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = special.xlogy(k, rate_a) - rate_a - special.gammaln(k + 1.0)
    out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def psi(c: float, n_in, n_out, n2_in, n2_out):
    """Standardised mean of the linear two-layer score given the shell counts."""
    n_in, n_out, n2_in, n2_out = (np.asarray(v, dtype=float) for v in (n_in, n_out, n2_in, n2_out))
    one = n_in + n_out
    num = 1.0 + 3.0 * n_in - n_out + n2_in - n2_out
    den = np.sqrt((one + 1.0) ** 2 + 4.0 * one + n2_in + n2_out)
    out = c * num / den
    return float(out) if out.ndim == 0 else out


def shell_rates(d: float, lam: float) -> tuple[float, float]:
    """Poisson means ``(d_in, d_out)`` of same- and other-class neighbours."""
    if d <= 0:
        raise ParameterError("d must be positive")
    root = math.sqrt(d)
    if abs(lam) > root + 1e-12:
        raise ParameterError(f"|lambda|={abs(lam)} exceeds sqrt(d)={root:.6g}")
    return max((d + lam * root) / 2.0, 0.0), max((d - lam * root) / 2.0, 0.0)


def structure_prob(n_in, n_out, n2_in, n2_out, d: float, lam: float):
    """Probability of the first/second-shell class counts around a node."""
    d_in, d_out = shell_rates(d, lam)
    n_in = np.asarray(n_in)
    n_out = np.asarray(n_out)
    return (poisson_pmf(n_in, d_in) * poisson_pmf(n_out, d_out)
            * poisson_pmf(n2_in, d_in * n_in + d_out * n_out)
            * poisson_pmf(n2_out, d_out * n_in + d_in * n_out))


def _upper(rate: float, tail: float) -> int:
    """Smallest m with P(Poisson(rate) > m) < tail."""
    if rate == 0:
        return 0
    m = int(stats.poisson.isf(tail, rate))
    while stats.poisson.sf(m, rate) >= tail:
        m += 1
    return m


def _lower(rate: float, tail: float) -> int:
    """Largest m with P(Poisson(rate) < m) < tail."""
    if rate == 0:
        return 0
    m = max(int(stats.poisson.ppf(tail, rate)), 0)
    while m > 0 and stats.poisson.cdf(m - 1, rate) >= tail:
        m -= 1
    return m


def two_layer_accuracy(mu: float, sigma: float, d: float, lam: float, sign_k: int = 1,
                       tail_mass_bound: float = 1e-8, max_index: int = 100_000) -> TheoryResult:
    """Accuracy of the optimal linear two-layer GCN, truncated series.

    The outer counts run up to the point where each Poisson upper tail is
    below ``tail_mass_bound / 4``; for every outer pair the second-shell
    counts are cut on both sides so each conditional tail is below
    ``tail_mass_bound / 8``. ``neglected_mass`` is one minus the probability
    actually summed.
    """
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    if sign_k not in (1, -1):
        raise ParameterError("sign_k must be +1 or -1")
    if not 0 < tail_mass_bound < 1:
        raise ParameterError("tail_mass_bound must lie in (0, 1)")
    d_in, d_out = shell_rates(d, lam)
    c = sign_k * mu / sigma
    q = tail_mass_bound / 4.0
    hi_in, hi_out = _upper(d_in, q), _upper(d_out, q)
    if max(hi_in, hi_out) > max_index:
        raise TruncationError("outer truncation exceeds max_index")

    acc_parts, mass_parts = [], []
    hi2 = 0
    for a in range(hi_in + 1):
        pa = poisson_pmf(a, d_in)
        for b in range(hi_out + 1):
            pab = pa * poisson_pmf(b, d_out)
            if pab == 0.0:
                continue
            r_in, r_out = d_in * a + d_out * b, d_out * a + d_in * b
            lo_i, up_i = _lower(r_in, q / 2), _upper(r_in, q / 2)
            lo_o, up_o = _lower(r_out, q / 2), _upper(r_out, q / 2)
            if max(up_i, up_o) > max_index:
                raise TruncationError("second-shell truncation exceeds max_index")
            hi2 = max(hi2, up_i, up_o)
            i2 = np.arange(lo_i, up_i + 1)
            o2 = np.arange(lo_o, up_o + 1)
            w_i = poisson_pmf(i2, r_in)
            w_o = poisson_pmf(o2, r_out)
            phi = normal_cdf(psi(c, a, b, i2[:, None], o2[None, :])) - 0.5
            acc_parts.append(pab * float(w_i @ phi @ w_o))
            mass_parts.append(pab * float(w_i.sum() * w_o.sum()))
    mass = math.fsum(mass_parts)
    neglected = max(0.0, 1.0 - mass)
    if neglected > tail_mass_bound:
        raise TruncationError(f"neglected mass {neglected:.3g} exceeds bound {tail_mass_bound:.3g}")
    # summing Phi - 1/2 halves the worst-case truncation error
    acc = 0.5 + math.fsum(acc_parts)
    return TheoryResult(
        accuracy=min(max(acc, 0.0), 1.0),
        truncation_limits={"n_in": hi_in, "n_out": hi_out, "n2": hi2},
        neglected_mass=neglected,
    )


def one_layer_accuracy_from_params(mu: float, sigma: float, d: float, lam: float, n: int,
                                   theta: float = 0.0) -> float:
    """Expected one-layer accuracy for cSBM parameters (``N = n``)."""
    p_in, p_out = lambda_to_probs(d, lam, n)
    return expected_accuracy_one_layer(mu, theta, n - n % 2, p_in, p_out, sigma)
