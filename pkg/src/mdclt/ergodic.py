"""Markov-Dobrushin coefficients, oscillation, and beta-sequences.

``delta(k)`` is the largest total-variation distance between two rows of a
kernel and ``alpha(k) = 1 - delta(k)`` its mixing strength. A beta-sequence
marks the "good" steps of a chain; ``check_h_beta`` decides whether the marks
are dense enough in every long window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .markov_core import ChainSpec, Distribution, Kernel, Observable, ValidationError

__all__ = [
    "BetaSequence",
    "HBetaParams",
    "KAPPA_CONVENTIONS",
    "DEFAULT_THETAS",
    "delta",
    "delta_three_ways",
    "alpha",
    "step_alphas",
    "alpha_n",
    "osc",
    "osc_on_support",
    "alpha_beta",
    "marked_count",
    "check_h_beta",
    "check_h_beta_bruteforce",
    "find_beta",
    "search_beta",
    "weakened_exponent",
]

# "prefix": kappa_j - kappa_i counts marks at i+1..j (the displayed window inequality).
# "inclusive": kappa_j - kappa_{i-1} counts marks at i..j.
KAPPA_CONVENTIONS = ("prefix", "inclusive")
DEFAULT_THETAS = (0.5, 0.2, 0.1, 0.05)
ENUMERATION_GUARD = 20


@dataclass(frozen=True, eq=False)
class BetaSequence:
    bits: np.ndarray
    kappa_prefix: np.ndarray = field(init=False)

    def __post_init__(self):
        b = np.array(self.bits, dtype=np.int8)
        if b.ndim != 1 or b.size == 0:
            raise ValidationError("bits must be a non-empty 1-d sequence", "beta")
        if np.any((b != 0) & (b != 1)):
            raise ValidationError("bits must be 0 or 1", "beta")
        b.setflags(write=False)
        # kappa_prefix[j] = sum of bits[1..j] (1-based), kappa_prefix[0] = 0
        kappa = np.concatenate([[0], np.cumsum(b, dtype=np.int64)])
        kappa.setflags(write=False)
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "kappa_prefix", kappa)

    @property
    def n(self) -> int:
        return self.bits.size

    def kappa(self, j: int) -> int:
        """Number of marks among positions ``1..j``."""
        return int(self.kappa_prefix[j])

    def to_bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @classmethod
    def from_bitstring(cls, s: str) -> "BetaSequence":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValidationError(f"not a bit string: {s[:20]!r}", "beta")
        return cls(np.frombuffer(s.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def ones(cls, n: int) -> "BetaSequence":
        return cls(np.ones(n, dtype=np.int8))


@dataclass(frozen=True)
class HBetaParams:
    m0: int
    c: float

    def __post_init__(self):
        if int(self.m0) != self.m0 or self.m0 < 1:
            raise ValidationError(f"m0 must be a positive integer, got {self.m0}", "m0")
        if not 0.0 < self.c <= 1.0:
            raise ValidationError(f"c must lie in (0, 1], got {self.c}", "c")


def delta(k: Kernel) -> float:
    """Largest total-variation distance between two rows of ``k``."""
    r = k.rows
    tv = 0.5 * np.abs(r[:, None, :] - r[None, :, :]).sum(axis=2)
    return float(min(1.0, tv.max()))


def delta_three_ways(k: Kernel) -> tuple[float, float, float]:
    """The coefficient by exhaustive enumeration, three ways.

    1. sup over row pairs and subsets ``A`` of ``|k(x1, A) - k(x2, A)|``;
    2. half the sup over sign vectors ``f`` of ``|sum_y f(y)(k(x1, y) - k(x2, y))|``;
    3. sup over ``u`` in ``{0, 1}^size`` of ``|(k u)(x1) - (k u)(x2)|``. These
       indicator vectors are the extreme points of ``{u : Osc(u) <= 1}`` up to
       constants, so the sup over the whole class is attained there.

    Costs ``O(2^size)``; intended as a test oracle for :func:`delta`.
    """
    s = k.size
    if s > ENUMERATION_GUARD:
        raise ValidationError(f"size {s} exceeds enumeration guard {ENUMERATION_GUARD}",
                              "delta_three_ways")
    r = k.rows
    subsets = ((np.arange(2 ** s)[:, None] >> np.arange(s)) & 1).astype(float)
    diff = r[:, None, :] - r[None, :, :]

    by_sets = float(np.abs(diff @ subsets.T).max())
    by_signs = 0.5 * float(np.abs(diff @ (2.0 * subsets - 1.0).T).max())
    pu = r @ subsets.T  # (k u)(x) for every u
    by_functions = float(np.abs(pu[:, None, :] - pu[None, :, :]).max())
    return by_sets, by_signs, by_functions


def alpha(k: Kernel) -> float:
    return 1.0 - delta(k)


def step_alphas(chain: ChainSpec) -> np.ndarray:
    """``alpha`` of each one-step kernel, indexed by step ``1..n-1`` at ``[0..n-2]``.

    Kernel objects shared between steps are evaluated once.
    """
    cache: dict[int, float] = {}
    out = np.empty(chain.n - 1)
    for i, k in enumerate(chain.kernels):
        key = id(k)
        if key not in cache:
            cache[key] = alpha(k)
        out[i] = cache[key]
    return out


def alpha_n(chain: ChainSpec) -> float:
    """Minimum one-step coefficient over the chain."""
    if chain.n < 2:
        raise ValidationError("alpha_n needs n >= 2", "alpha_n")
    return float(step_alphas(chain).min())


def osc(f: Observable | np.ndarray) -> float:
    v = f.values if isinstance(f, Observable) else np.asarray(f)
    return float(v.max() - v.min())


def osc_on_support(f: Observable | np.ndarray, mu: Distribution | np.ndarray) -> float:
    """Oscillation restricted to states of positive probability (ess sup - ess inf)."""
    v = f.values if isinstance(f, Observable) else np.asarray(f)
    p = mu.probs if isinstance(mu, Distribution) else np.asarray(mu)
    if v.shape != p.shape:
        raise ValidationError(f"dimension mismatch: {v.shape} vs {p.shape}", "osc_on_support")
    on = v[p > 0]
    if on.size == 0:
        raise ValidationError("measure has empty support", "osc_on_support")
    return float(on.max() - on.min())


def alpha_beta(chain: ChainSpec, beta: BetaSequence, alphas: np.ndarray | None = None) -> float:
    """Minimum one-step coefficient over marked steps ``i <= n - 1``."""
    if beta.n != chain.n:
        raise ValidationError(f"beta has length {beta.n}, chain has n={chain.n}", "beta")
    if alphas is None:
        alphas = step_alphas(chain)
    marked = beta.bits[: chain.n - 1].astype(bool)
    if not marked.any():
        raise ValidationError("empty beta support", "beta")
    return float(alphas[marked].min())


def marked_count(beta: BetaSequence, i: int, j: int) -> int:
    """Number of marked positions among ``i..j`` (1-based, inclusive)."""
    if j < i:
        return 0
    return int(beta.kappa_prefix[j] - beta.kappa_prefix[i - 1])


def _window_lower_index(convention: str) -> int:
    if convention not in KAPPA_CONVENTIONS:
        raise ValidationError(f"unknown convention {convention!r}", "convention")
    return 0 if convention == "prefix" else 1


def check_h_beta(beta: BetaSequence, p: HBetaParams, convention: str = "prefix",
                 tol: float = 1e-9) -> bool:
    """Mark density in every window of length at least ``m0``.

    True iff ``kappa_j - kappa_i >= c (j - i)`` for all ``1 <= i < j <= n``
    with ``j - i >= m0`` (``kappa_{i-1}`` in place of ``kappa_i`` under the
    inclusive convention). Linear time: with ``g(i) = kappa_i - c i`` the
    condition reads ``g(j) >= max_{i <= j - m0} g(i)``.
    """
    shift = _window_lower_index(convention)
    n, m0, c = beta.n, p.m0, p.c
    if n - 1 < m0:
        return True
    idx = np.arange(n + 1)
    g = beta.kappa_prefix - c * idx
    # left endpoint term for i in 1..n: kappa_{i - shift} - c*i
    left = beta.kappa_prefix[1 - shift:n + 1 - shift] - c * idx[1:]
    running = np.maximum.accumulate(left)
    # for j = 1 + m0 .. n the admissible i run over 1..j - m0
    return bool(np.all(g[1 + m0:] >= running[: n - m0] - tol))


def check_h_beta_bruteforce(beta: BetaSequence, p: HBetaParams, convention: str = "prefix",
                            tol: float = 1e-9) -> bool:
    """All-pairs ``O(n^2)`` version of :func:`check_h_beta`."""
    shift = _window_lower_index(convention)
    k = beta.kappa_prefix
    for i in range(1, beta.n + 1):
        for j in range(i + p.m0, beta.n + 1):
            if k[j] - k[i - shift] < p.c * (j - i) - tol:
                return False
    return True


def find_beta(chain: ChainSpec, theta: float, p: HBetaParams, convention: str = "prefix",
              alphas: np.ndarray | None = None) -> BetaSequence | None:
    """Mark steps with ``alpha >= theta``; return the marks if they satisfy (H_beta).

    The last position ``n`` has no kernel of its own and copies the mark of
    step ``n - 1``.
    """
    if chain.n < 2:
        raise ValidationError("find_beta needs n >= 2", "find_beta")
    if not 0.0 < theta <= 1.0:
        raise ValidationError(f"theta must lie in (0, 1], got {theta}", "theta")
    if alphas is None:
        alphas = step_alphas(chain)
    bits = np.empty(chain.n, dtype=np.int8)
    bits[:-1] = alphas >= theta
    bits[-1] = bits[-2]
    beta = BetaSequence(bits)
    if not bits[:-1].any() or not check_h_beta(beta, p, convention):
        return None
    return beta


def search_beta(chain: ChainSpec, p: HBetaParams, thetas: Iterable[float] = DEFAULT_THETAS,
                convention: str = "prefix") -> tuple[BetaSequence, float] | None:
    """First accepted :func:`find_beta` witness over a decreasing threshold grid."""
    alphas = step_alphas(chain)
    for theta in thetas:
        beta = find_beta(chain, theta, p, convention, alphas)
        if beta is not None:
            return beta, theta
    return None


def weakened_exponent(beta: BetaSequence, i: int, j: int) -> int:
    """Marked kernels used by the product from time ``i`` to ``j`` (steps ``i..j-1``)."""
    return marked_count(beta, i, j - 1)
