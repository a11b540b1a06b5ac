"""Array schemes, exact moments of ``S_n`` and the CLT condition evaluators.

Limits in ``n`` cannot be decided on a finite grid, so :func:`evaluate_conditions`
only records values per ``n`` plus a strict-monotonicity label per quantity.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Mapping, Sequence

import numpy as np

from .ergodic import (BetaSequence, HBetaParams, alpha_beta, check_h_beta, search_beta,
                      step_alphas)
from .gordin import backward_z
from .markov_core import ChainSpec, ValidationError, center_observables, marginal_array

__all__ = [
    "DEFAULT_GRID",
    "VARIANTS",
    "ArrayScheme",
    "ConditionRecord",
    "ConditionReport",
    "expected_sum",
    "variance_of_sum",
    "per_step_variances",
    "trend",
    "evaluate_conditions",
    "evaluate_chain",
    "variance_lower_bound_check",
]

DEFAULT_GRID = tuple(2 ** k for k in range(8, 15))
VARIANTS = ("consistent", "as-printed")
CENTER_TOL = 1e-9

FOOTNOTES = {
    "consistent": "theorem1_value = C_n^2 / (alpha_n * alpha_beta^2 * sum_var)",
    "as-printed": "theorem1_value = C_n^2 * alpha_n / (alpha_beta^2 * sum_var)",
}


@dataclass(frozen=True)
class ArrayScheme:
    """A family of chains, one per horizon ``n``.

    ``beta`` optionally supplies the companion mark sequence for each ``n``.
    """

    generator: Callable[[int], ChainSpec]
    grid: tuple[int, ...] = DEFAULT_GRID
    name: str = "scheme"
    beta: Callable[[int], BetaSequence] | None = None

    def chain(self, n: int) -> ChainSpec:
        c = self.generator(n)
        if c.n != n:
            raise ValidationError(f"generator returned n={c.n} for n={n}", self.name)
        return c


def expected_sum(chain: ChainSpec) -> float:
    mus = marginal_array(chain)
    return float(np.einsum("ij,ij->", mus, chain.observable_matrix()))


def per_step_variances(chain: ChainSpec) -> np.ndarray:
    """``D(f_i(X_i))`` for ``i = 1..n``."""
    mus = marginal_array(chain)
    fs = chain.observable_matrix()
    mean = np.einsum("ij,ij->i", mus, fs)
    return np.maximum(np.einsum("ij,ij->i", mus, fs ** 2) - mean ** 2, 0.0)


def variance_of_sum(chain: ChainSpec) -> float:
    """``D(S_n)`` from the pairwise covariance expansion.

    ``D(S_n) = sum_i D(f_i) + 2 sum_{i<j} E[f_i(X_i) (P_{i,j} f_j)(X_i)]``. The
    columns ``P_{i,j} f_j`` for all ``j > i`` are carried as one matrix and
    pushed one kernel back per step, so each cross term is its own column and
    the cost is ``O(n^2 size^2)``.
    """
    mus = marginal_array(chain)
    fs = chain.observable_matrix()
    means = np.einsum("ij,ij->i", mus, fs)
    if np.max(np.abs(means)) > CENTER_TOL:
        raise ValidationError("chain is not centered", "observables")
    n = chain.n
    total = float(per_step_variances(chain).sum())
    cols = np.empty((chain.size, n))
    cross = 0.0
    for i in range(n - 1, 0, -1):  # 1-based time i, columns j = i+1..n at [:, i:]
        cols[:, i] = fs[i]
        block = chain.kernels[i - 1].rows @ cols[:, i:]
        cols[:, i:] = block
        cross += float((mus[i - 1] * fs[i - 1]) @ block.sum(axis=1))
    var = total + 2.0 * cross
    if var < -1e-10:
        raise ArithmeticError(f"negative variance {var}")
    return max(var, 0.0)


def trend(values: Sequence[float]) -> str:
    """``"increasing"``/``"decreasing"`` if strictly monotone, else ``"inconclusive"``."""
    v = np.asarray(values, dtype=float)
    if v.size < 2 or not np.all(np.isfinite(v)):
        return "inconclusive"
    d = np.diff(v)
    if np.all(d > 0):
        return "increasing"
    if np.all(d < 0):
        return "decreasing"
    return "inconclusive"


@dataclass
class ConditionRecord:
    n: int
    alpha_n: float
    alpha_beta: float
    sum_var: float
    variance_floor: float
    C_n: float
    var_Sn: float
    dobrushin_value: float
    theorem1_value: float
    corollary2_value: float
    h_beta_ok: bool
    beta_source: str
    beta: str = field(default="", repr=False)


TREND_KEYS = ("alpha_n", "alpha_beta", "sum_var", "var_Sn", "dobrushin_value",
              "theorem1_value", "corollary2_value")


@dataclass
class ConditionReport:
    scheme: str
    variant: str
    kappa_convention: str
    m0: int
    density_c: float
    records: list[ConditionRecord]
    trends: dict[str, str] = field(default_factory=dict)
    footnotes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.trends:
            self.trends = {k: trend([getattr(r, k) for r in self.records]) for k in TREND_KEYS}

    def column(self, key: str) -> list:
        return [getattr(r, key) for r in self.records]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConditionReport":
        d = dict(d)
        d["records"] = [ConditionRecord(**r) for r in d["records"]]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ConditionReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        cols = [f.name for f in fields(ConditionRecord) if f.name != "beta"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in cols])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def evaluate_chain(chain: ChainSpec, beta: BetaSequence | None, p: HBetaParams,
                   variant: str = "consistent", convention: str = "prefix") -> ConditionRecord:
    """Condition values for a single horizon.

    Without a supplied ``beta`` the threshold search is tried first; when it
    finds nothing the all-ones sequence is used, which always satisfies the
    window condition and makes ``alpha_beta = alpha_n``.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}", "variant")
    n = chain.n
    if n < 2:
        raise ValidationError("condition evaluation needs n >= 2", "n")
    alphas = step_alphas(chain)
    a_n = float(alphas.min())
    source = "supplied"
    if beta is None:
        found = search_beta(chain, p, convention=convention)
        if found is None:
            beta, source = BetaSequence.ones(n), "all-ones"
        else:
            beta, source = found[0], f"threshold {found[1]:g}"
    a_b = alpha_beta(chain, beta, alphas)
    variances = per_step_variances(chain)
    sum_var = float(variances.sum())
    centered = _center_if_needed(chain)
    c_n = centered.c_n
    var_sn = backward_z(centered).var_Sn

    if variant == "consistent":
        denom = a_n * a_b ** 2 * sum_var
        t1 = c_n ** 2 / denom if denom > 0 else math.inf
    else:
        denom = a_b ** 2 * sum_var
        t1 = c_n ** 2 * a_n / denom if denom > 0 else math.inf
    return ConditionRecord(
        n=n,
        alpha_n=a_n,
        alpha_beta=a_b,
        sum_var=sum_var,
        variance_floor=float(variances.min()),
        C_n=c_n,
        var_Sn=var_sn,
        dobrushin_value=n ** (1.0 / 3.0) * a_n,
        theorem1_value=t1,
        corollary2_value=n * a_n * a_b ** 2,
        h_beta_ok=check_h_beta(beta, p, convention),
        beta_source=source,
        beta=beta.to_bitstring(),
    )


def _center_if_needed(chain: ChainSpec) -> ChainSpec:
    mus = marginal_array(chain)
    means = np.einsum("ij,ij->i", mus, chain.observable_matrix())
    return chain if np.max(np.abs(means)) <= 1e-15 else center_observables(chain)


def evaluate_conditions(scheme: ArrayScheme,
                        betas: Mapping[int, BetaSequence] | Callable[[int], BetaSequence] | None = None,
                        p: HBetaParams = HBetaParams(4, 0.25),
                        variant: str = "consistent",
                        convention: str = "prefix",
                        max_workers: int = 1) -> ConditionReport:
    """Evaluate every grid point of ``scheme``.

    ``betas`` overrides the scheme's own companion sequences; with neither,
    a witness is searched for per ``n``. Grid points are independent and may
    be evaluated on ``max_workers`` threads; the report is assembled in grid
    order regardless.
    """
    if betas is None:
        betas = scheme.beta

    def one(n: int) -> ConditionRecord:
        chain = scheme.chain(n)
        if betas is None:
            beta = None
        elif callable(betas):
            beta = betas(n)
        else:
            beta = betas.get(n)
        return evaluate_chain(chain, beta, p, variant, convention)

    grid = list(scheme.grid)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            by_n = dict(zip(grid, pool.map(one, grid)))
    else:
        by_n = {n: one(n) for n in grid}
    notes = [FOOTNOTES[variant],
             "limits are not decided; trends are strict monotonicity over the grid only"]
    return ConditionReport(scheme=scheme.name, variant=variant, kappa_convention=convention,
                           m0=p.m0, density_c=p.c, records=[by_n[n] for n in grid],
                           footnotes=notes)


def variance_lower_bound_check(chain: ChainSpec) -> tuple[float, float, bool]:
    """``(D(S_n), alpha_n / 4 * sum_i D(f_i), lhs >= rhs - 1e-10)``."""
    if chain.n < 2:
        raise ValidationError("needs n >= 2", "n")
    lhs = variance_of_sum(chain)
    rhs = float(step_alphas(chain).min()) / 4.0 * float(per_step_variances(chain).sum())
    return lhs, rhs, lhs >= rhs - 1e-10
