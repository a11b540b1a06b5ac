"""Two-state array schemes used in the experiments.

* A: every step is the same well-mixing kernel (classical regime).
* B: well-mixing steps every ``period`` steps, near-identity steps in between
  with coefficient ``n**-gamma``; the minimum coefficient decays too fast for
  the classical condition while the marked steps keep their strength.
* C: uniformly slow switching with ``lam`` expected switches over the
  horizon; violates both conditions and the normalized sum stays non-Gaussian.

All summands are ``(+1, -1)`` centered, so ``C_n = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ergodic import BetaSequence, HBetaParams
from .markov_core import (ChainSpec, Distribution, Kernel, Observable, StateSpace,
                          ValidationError, center_observables)
from .scheme import DEFAULT_GRID, ArrayScheme

__all__ = ["FamilyParams", "GOOD_KERNEL", "family_a", "family_b", "family_c",
           "companion_beta", "family_h_beta_params", "make_scheme", "flip_kernel"]

GOOD_KERNEL = ((0.7, 0.3), (0.3, 0.7))
SIGN = (1.0, -1.0)


@dataclass(frozen=True)
class FamilyParams:
    """Generator parameters.

    ``skew`` in ``[0, 1)`` tilts family B's near-identity step to switch
    ``1 + skew`` times as often out of state 0 as out of state 1 (total
    coefficient unchanged). With the symmetric default every conditional
    variance is state independent, so tail oscillations vanish identically.
    """

    family: str = "A"
    gamma: float = 0.5
    lam: float = 2.0
    period: int = 2
    skew: float = 0.0

    def __post_init__(self):
        if self.family not in ("A", "B", "C"):
            raise ValidationError(f"unknown family {self.family!r}", "family")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {self.gamma}", "gamma")
        if self.lam <= 0:
            raise ValidationError(f"lam must be positive, got {self.lam}", "lam")
        if int(self.period) != self.period or self.period < 2:
            raise ValidationError(f"period must be an integer >= 2, got {self.period}", "period")
        if not 0.0 <= self.skew < 1.0:
            raise ValidationError(f"skew must lie in [0, 1), got {self.skew}", "skew")


def flip_kernel(eps: float, skew: float = 0.0) -> Kernel:
    """Two-state kernel leaving 0 w.p. ``(1 + skew) eps`` and 1 w.p. ``(1 - skew) eps``.

    ``alpha`` is ``2 eps`` whatever the skew.
    """
    a, b = (1.0 + skew) * eps, (1.0 - skew) * eps
    return Kernel(np.array([[1.0 - a, a], [b, 1.0 - b]]))


def _two_state(initial, kernels, n: int) -> ChainSpec:
    sign = Observable(np.array(SIGN))
    chain = ChainSpec(StateSpace(2), Distribution(np.asarray(initial, dtype=float)),
                      tuple(kernels), (sign,) * n)
    return center_observables(chain)


def family_a(n: int, p: FamilyParams | None = None) -> ChainSpec:
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}", "n")
    good = Kernel(np.array(GOOD_KERNEL))
    return _two_state([0.5, 0.5], [good] * (n - 1), n)


def family_b(n: int, p: FamilyParams | None = None) -> ChainSpec:
    p = p or FamilyParams("B")
    if n < 2 * p.period:
        raise ValidationError(f"n must be >= 2*period = {2 * p.period}, got {n}", "n")
    good = Kernel(np.array(GOOD_KERNEL))
    bad = flip_kernel(n ** -p.gamma / 2.0, p.skew)
    kernels = [good if i % p.period == 0 else bad for i in range(1, n)]
    return _two_state([0.5, 0.5], kernels, n)


def family_c(n: int, p: FamilyParams | None = None) -> ChainSpec:
    p = p or FamilyParams("C")
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}", "n")
    if p.lam >= n / 2:
        raise ValidationError(f"lam={p.lam} must stay below n/2={n / 2}", "lam")
    return _two_state([0.5, 0.5], [flip_kernel(p.lam / n)] * (n - 1), n)


def companion_beta(n: int, p: FamilyParams) -> BetaSequence:
    """Marks of the well-mixing steps: every step for A and C, multiples of ``period`` for B."""
    if p.family != "B":
        return BetaSequence.ones(n)
    return BetaSequence((np.arange(1, n + 1) % p.period == 0).astype(np.int8))


def family_h_beta_params(p: FamilyParams) -> HBetaParams:
    """Window parameters that the companion sequence of family B satisfies."""
    return HBetaParams(2 * p.period, 1.0 / (2 * p.period))


_GENERATORS = {"A": family_a, "B": family_b, "C": family_c}


def make_scheme(p: FamilyParams, grid=DEFAULT_GRID) -> ArrayScheme:
    gen = _GENERATORS[p.family]
    return ArrayScheme(generator=lambda n: gen(n, p), grid=tuple(grid),
                       name=f"family_{p.family}",
                       beta=lambda n: companion_beta(n, p))
