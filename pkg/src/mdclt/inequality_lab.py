"""Numerical checks of the auxiliary inequalities behind the variance bound and the CLT.

Each checker evaluates both sides exactly and returns a :class:`BoundRecord`;
``margin`` is positive when the inequality holds with room to spare.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .ergodic import BetaSequence, alpha_beta, delta, osc, weakened_exponent
from .gordin import _checked, conditional_variance_profile
from .markov_core import (ChainSpec, Distribution, Kernel, Observable, ValidationError,
                          compose_range, marginal_array)
from .randomized import random_beta, random_chain, random_joint_table
from .scheme import variance_lower_bound_check

__all__ = [
    "BoundRecord",
    "JointLaw",
    "TailProfile",
    "joint_law_from_step",
    "lemma1_bounds",
    "lemma41_check",
    "lemma42_check",
    "lemma33_tail_profile",
    "records_to_csv",
    "run_suite",
]

TOL = 1e-10
CENTER_TOL = 1e-9


@dataclass(frozen=True)
class BoundRecord:
    lemma: str
    indices: tuple[int, ...]
    lhs: float
    rhs: float
    margin: float
    ok: bool

    @classmethod
    def upper(cls, lemma, indices, lhs, rhs):
        """Record for ``lhs <= rhs``."""
        return cls(lemma, tuple(indices), float(lhs), float(rhs), float(rhs - lhs),
                   bool(lhs <= rhs + TOL))

    @classmethod
    def lower(cls, lemma, indices, lhs, rhs):
        """Record for ``lhs >= rhs``."""
        return cls(lemma, tuple(indices), float(lhs), float(rhs), float(lhs - rhs),
                   bool(lhs >= rhs - TOL))


@dataclass(frozen=True, eq=False)
class JointLaw:
    """A law on pairs with its two marginals and the kernels in both directions."""

    table: np.ndarray
    marginal_first: Distribution
    marginal_second: Distribution
    forward: Kernel
    backward: Kernel

    @classmethod
    def from_table(cls, table, forward: Kernel | None = None) -> "JointLaw":
        t = np.array(table, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValidationError(f"table must be square, got {t.shape}", "table")
        if np.any(t < 0) or abs(t.sum() - 1.0) > 1e-12:
            raise ValidationError("table must be a probability table", "table")
        t.setflags(write=False)
        first, second = t.sum(axis=1), t.sum(axis=0)
        if forward is None:
            forward = Kernel(_conditional_rows(t, first))
        backward = Kernel(_conditional_rows(t.T, second))
        return cls(t, Distribution(first), Distribution(second), forward, backward)


def _conditional_rows(t: np.ndarray, marginal: np.ndarray) -> np.ndarray:
    s = t.shape[0]
    out = np.full((s, s), 1.0 / s)
    live = marginal > 0
    out[live] = t[live] / marginal[live, None]
    return out / out.sum(axis=1, keepdims=True)


def joint_law_from_step(chain: ChainSpec, i: int) -> JointLaw:
    """Law of ``(X_i, X_{i+1})`` with the chain's kernel as the forward direction."""
    if not 1 <= i <= chain.n - 1:
        raise ValidationError(f"step {i} outside 1..{chain.n - 1}", "joint_law_from_step")
    mu = marginal_array(chain)[i - 1]
    k = chain.kernels[i - 1]
    table = mu[:, None] * k.rows
    return JointLaw.from_table(table / table.sum(), forward=k)


def _l2(f: np.ndarray, p: np.ndarray) -> float:
    return float(np.sqrt(p @ f ** 2))


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Observable) else np.asarray(f, dtype=float)


def lemma41_check(j: JointLaw, f, g) -> BoundRecord:
    """``|E f(x1) g(x2)| <= sqrt(delta(forward)) ||f||_2 ||g||_2`` for centered f, g."""
    f, g = _values(f), _values(g)
    a, b = j.marginal_first.probs, j.marginal_second.probs
    if abs(a @ f) > CENTER_TOL or abs(b @ g) > CENTER_TOL:
        raise ValidationError("f and g must be centered under their marginals", "lemma41_check")
    lhs = abs(f @ j.table @ g)
    rhs = np.sqrt(delta(j.forward)) * _l2(f, a) * _l2(g, b)
    return BoundRecord.upper("covariance", (), lhs, rhs)


def lemma42_check(j: JointLaw, f, g) -> BoundRecord:
    """``E (f(x1) - g(x2))^2 >= alpha(forward) max(D f, D g)``.

    Holding against the max is the same as holding against each variance
    separately.
    """
    f, g = _values(f), _values(g)
    a, b = j.marginal_first.probs, j.marginal_second.probs
    lhs = float((j.table * (f[:, None] - g[None, :]) ** 2).sum())
    var_f = max(float(a @ f ** 2 - (a @ f) ** 2), 0.0)
    var_g = max(float(b @ g ** 2 - (b @ g) ** 2), 0.0)
    rhs = (1.0 - delta(j.forward)) * max(var_f, var_g)
    return BoundRecord.lower("step_variance", (), lhs, rhs)


def _index_tuples(n: int, exhaustive_up_to: int, samples: int, seed: int):
    if n <= exhaustive_up_to:
        pairs = [(i, j) for j in range(1, n + 1) for i in range(1, j + 1)]
        triples = [(l, i, j) for (i, j) in pairs for l in range(1, i)]
        return pairs, triples
    rng = np.random.default_rng(seed)
    pairs, triples = [], []
    for _ in range(samples):
        i, j = sorted(int(x) for x in rng.integers(1, n + 1, size=2))
        pairs.append((i, j))
        if i > 1:
            triples.append((int(rng.integers(1, i)), i, j))
    return pairs, triples


def lemma1_bounds(chain: ChainSpec, beta: BetaSequence, exhaustive_up_to: int = 40,
                  samples: int = 2000, seed: int = 0) -> list[BoundRecord]:
    """The three geometric-decay bounds for a centered chain.

    With ``q = 1 - alpha_beta`` and ``e(i, j)`` the number of marked kernels
    among steps ``i..j-1``:

    * ``||P_{i,j} f_j||_B <= 2 C_n q^e(i,j)`` for ``i <= j``;
    * ``Osc(P_{i,j}(f_j^2)) <= 2 C_n^2 q^e(i,j)``;
    * ``Osc(P_{l,i}(f_i P_{i,j} f_j)) <= 6 C_n^2 q^e(l,i) q^e(i,j)`` for ``l < i <= j``.

    Index tuples are exhaustive up to ``n = exhaustive_up_to`` and a seeded
    sample of ``samples`` tuples beyond.
    """
    mus = marginal_array(chain)
    fs = chain.observable_matrix()
    if np.max(np.abs(np.einsum("ij,ij->i", mus, fs))) > CENTER_TOL:
        raise ValidationError("chain is not centered", "observables")
    q = 1.0 - alpha_beta(chain, beta)
    c = chain.c_n
    n = chain.n

    mats: dict[tuple[int, int], np.ndarray] = {}

    def transport(i: int, j: int, v: np.ndarray) -> np.ndarray:
        if i == j:
            return v
        if (i, j) not in mats:
            mats[(i, j)] = compose_range(chain, i, j).rows
        return mats[(i, j)] @ v

    pairs, triples = _index_tuples(n, exhaustive_up_to, samples, seed)
    # cache P_{i,j} f_j for the pairs in use
    pf = {}
    if n <= exhaustive_up_to:
        for j in range(1, n + 1):
            h = fs[j - 1]
            pf[(j, j)] = h
            for i in range(j - 1, 0, -1):
                h = chain.kernels[i - 1].rows @ h
                pf[(i, j)] = h
    else:
        for i, j in set(pairs) | {(i, j) for _, i, j in triples}:
            pf[(i, j)] = transport(i, j, fs[j - 1])

    out = []
    for i, j in pairs:
        decay = q ** weakened_exponent(beta, i, j)
        out.append(BoundRecord.upper("decay.sup", (i, j), np.abs(pf[(i, j)]).max(),
                                     2 * c * decay))
        out.append(BoundRecord.upper("decay.osc_sq", (i, j),
                                     osc(transport(i, j, fs[j - 1] ** 2)), 2 * c * c * decay))
    for l, i, j in triples:
        prod = fs[i - 1] * pf[(i, j)]
        rhs = 6 * c * c * q ** weakened_exponent(beta, l, i) * q ** weakened_exponent(beta, i, j)
        out.append(BoundRecord.upper("decay.osc_prod", (l, i, j),
                                     osc(transport(l, i, prod)), rhs))
    return out


@dataclass(frozen=True)
class TailProfile:
    expected_sum: float
    target: float
    sup_norm: float
    osc_tail_sup: float


def lemma33_tail_profile(chain: ChainSpec) -> TailProfile:
    """The hypotheses of the L2 law for ``Y_l = v_l`` as measured quantities.

    ``expected_sum`` is ``E sum_l Y_l`` (equal to ``1 - D(Z_1)/D(S_n)``),
    ``sup_norm`` is ``sup_l ||Y_l||_inf`` on the support of ``X_{l-1}``.
    """
    d = _checked(chain)
    v, osc_tail = conditional_variance_profile(chain)
    mus = marginal_array(chain)
    total = sum(float(mus[k] @ v[k].values) for k in range(len(v)))
    sup = max((float(v[k].values[mus[k] > 0].max()) for k in range(len(v))), default=0.0)
    return TailProfile(total, 1.0 - d.var_Z1 / d.var_Sn, sup, osc_tail)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lemma", "instance", "indices", "lhs", "rhs", "margin", "ok"])
    for inst, r in records:
        w.writerow([r.lemma, inst, " ".join(map(str, r.indices)), f"{r.lhs:.17g}",
                    f"{r.rhs:.17g}", f"{r.margin:.17g}", "true" if r.ok else "false"])
    return buf.getvalue()


def _tightest(records: list[BoundRecord]) -> list[BoundRecord]:
    best: dict[str, BoundRecord] = {}
    for r in records:
        if r.lemma not in best or r.margin < best[r.lemma].margin:
            best[r.lemma] = r
    return [best[k] for k in sorted(best)]


def run_suite(instances: int = 1000, seed: int = 0, max_n: int = 10,
              max_size: int = 5) -> list[tuple[int, BoundRecord]]:
    """Randomized instances of every bound, keeping the tightest record per kind.

    Returns ``(instance, record)`` pairs; each instance draws a fresh chain,
    beta-sequence and joint law from a generator keyed by ``(seed, instance)``.
    """
    out = []
    for inst in range(instances):
        rng = np.random.default_rng([seed, inst])
        size = int(rng.integers(2, max_size + 1))
        n = int(rng.integers(2, max_n + 1))
        chain = random_chain(rng, n, size)
        beta = random_beta(rng, n)
        if not beta.bits[: n - 1].any():
            bits = beta.bits.copy()
            bits[rng.integers(n - 1)] = 1
            beta = BetaSequence(bits)
        recs = lemma1_bounds(chain, beta)

        lhs, rhs, _ = variance_lower_bound_check(chain)
        recs.append(BoundRecord.lower("variance_lower", (), lhs, rhs))

        law = JointLaw.from_table(random_joint_table(rng, size))
        a, b = law.marginal_first.probs, law.marginal_second.probs
        f = rng.standard_normal(size)
        g = rng.standard_normal(size)
        recs.append(lemma41_check(law, f - a @ f, g - b @ g))
        recs.append(lemma42_check(law, f, g))
        out.extend((inst, r) for r in _tightest(recs))
    return out
