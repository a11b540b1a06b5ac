"""Finite state spaces, probability vectors, transition kernels and observables.

Everything is a thin immutable wrapper over a float64 ndarray. Rows of a
kernel index the source state, so ``rows[x, y]`` is the probability of
jumping from ``x`` to ``y``. Time indices of a chain are 1-based: the chain
starts at time 1 and ``kernels[i - 1]`` moves it from time ``i`` to ``i + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "ValidationError",
    "StateSpace",
    "Distribution",
    "Kernel",
    "Observable",
    "ChainSpec",
    "compose",
    "compose_range",
    "apply_to_function",
    "apply_to_measure",
    "marginals",
    "marginal_array",
    "center_observables",
    "identity_kernel",
    "constant_kernel",
    "chain_from_dict",
    "load_chain",
    "enumerate_paths",
]

SUM_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant.

    ``field`` names the offending input (e.g. ``"kernels[3]"``) so that the
    command line front end can report it verbatim.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


def _frozen(a, ndim: int, name: str) -> np.ndarray:
    try:
        arr = np.array(a, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"not numeric ({exc})", name) from None
    if arr.ndim != ndim:
        raise ValidationError(f"expected {ndim}-d array, got shape {arr.shape}", name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("contains non-finite entries", name)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValidationError(f"size must be a positive integer, got {self.size}", "states")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValidationError(
                    f"expected {self.size} labels, got {len(labels)}", "states")
            object.__setattr__(self, "labels", labels)


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs, 1, "distribution")
        if p.size == 0:
            raise ValidationError("empty probability vector", "distribution")
        if np.any(p < 0):
            raise ValidationError(f"negative entry at state {int(np.argmin(p))}", "distribution")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"entries sum to {p.sum():.17g}, not 1", "distribution")
        object.__setattr__(self, "probs", p)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def point_mass(cls, size: int, state: int) -> "Distribution":
        p = np.zeros(size)
        p[state] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, size: int) -> "Distribution":
        return cls(np.full(size, 1.0 / size))


@dataclass(frozen=True, eq=False)
class Kernel:
    rows: np.ndarray

    def __post_init__(self):
        k = _frozen(self.rows, 2, "kernel")
        if k.shape[0] != k.shape[1] or k.shape[0] == 0:
            raise ValidationError(f"kernel must be square and non-empty, got {k.shape}", "kernel")
        if np.any(k < 0):
            x, y = np.unravel_index(np.argmin(k), k.shape)
            raise ValidationError(f"negative entry at row {x}, column {y}", "kernel")
        sums = k.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise ValidationError(f"row {bad[0]} sums to {sums[bad[0]]:.17g}, not 1", "kernel")
        object.__setattr__(self, "rows", k)

    @property
    def size(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True, eq=False)
class Observable:
    values: np.ndarray
    sup_norm: float = field(init=False)

    def __post_init__(self):
        v = _frozen(self.values, 1, "observable")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sup_norm", float(np.max(np.abs(v))) if v.size else 0.0)

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """One row of an array scheme: law of ``X_1``, step kernels and summands."""

    space: StateSpace
    initial: Distribution
    kernels: tuple[Kernel, ...]
    observables: tuple[Observable, ...]

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "observables", tuple(self.observables))
        s = self.space.size
        if len(self.observables) < 1:
            raise ValidationError("at least one observable is required", "observables")
        if len(self.kernels) != len(self.observables) - 1:
            raise ValidationError(
                f"expected {len(self.observables) - 1} kernels for n={len(self.observables)}, "
                f"got {len(self.kernels)}", "kernels")
        if self.initial.size != s:
            raise ValidationError(f"length {self.initial.size} != {s} states", "initial")
        for i, k in enumerate(self.kernels):
            if k.size != s:
                raise ValidationError(f"shape {k.rows.shape} != ({s}, {s})", f"kernels[{i}]")
        for i, f in enumerate(self.observables):
            if f.size != s:
                raise ValidationError(f"length {f.size} != {s} states", f"observables[{i}]")

    @property
    def n(self) -> int:
        return len(self.observables)

    @cached_property
    def _marginals(self) -> np.ndarray:
        out = np.empty((self.n, self.size))
        out[0] = self.initial.probs
        for i, k in enumerate(self.kernels):
            out[i + 1] = out[i] @ k.rows
        out.setflags(write=False)
        return out

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def c_n(self) -> float:
        """Uniform bound on the summands, ``max_i sup_x |f_i(x)|``."""
        return max(f.sup_norm for f in self.observables)

    def kernel(self, i: int) -> Kernel:
        """One-step kernel from time ``i`` to ``i + 1`` (1-based)."""
        if not 1 <= i <= self.n - 1:
            raise ValidationError(f"step {i} outside 1..{self.n - 1}", "kernels")
        return self.kernels[i - 1]

    def observable(self, i: int) -> Observable:
        if not 1 <= i <= self.n:
            raise ValidationError(f"time {i} outside 1..{self.n}", "observables")
        return self.observables[i - 1]

    def observable_matrix(self) -> np.ndarray:
        """Observables stacked into an ``(n, size)`` array."""
        return np.stack([f.values for f in self.observables])

    def to_dict(self) -> dict:
        labels = self.space.labels or tuple(str(x) for x in range(self.size))
        return {
            "n": self.n,
            "states": list(labels),
            "initial": self.initial.probs.tolist(),
            "kernels": [k.rows.tolist() for k in self.kernels],
            "observables": [f.values.tolist() for f in self.observables],
        }

    @classmethod
    def build(cls, initial, kernels: Sequence, observables: Sequence, labels=None) -> "ChainSpec":
        """Convenience constructor from plain arrays."""
        init = initial if isinstance(initial, Distribution) else Distribution(initial)
        ks = [k if isinstance(k, Kernel) else Kernel(k) for k in kernels]
        fs = [f if isinstance(f, Observable) else Observable(f) for f in observables]
        return cls(StateSpace(init.size, labels), init, tuple(ks), tuple(fs))


def identity_kernel(size: int) -> Kernel:
    return Kernel(np.eye(size))


def constant_kernel(p) -> Kernel:
    """Kernel whose every row is ``p`` (an independence step)."""
    p = np.asarray(p, dtype=float)
    return Kernel(np.tile(p, (p.size, 1)))


def _check_same(a: int, b: int, what: str):
    if a != b:
        raise ValidationError(f"dimension mismatch: {a} vs {b}", what)


def compose(a: Kernel, b: Kernel) -> Kernel:
    """Two-step kernel ``a`` then ``b``."""
    _check_same(a.size, b.size, "compose")
    return Kernel(a.rows @ b.rows)


def compose_range(chain: ChainSpec, i: int, j: int) -> Kernel:
    """Kernel from time ``i`` to time ``j`` (``1 <= i < j <= n``)."""
    if not 1 <= i < j <= chain.n:
        raise ValidationError(f"need 1 <= i < j <= {chain.n}, got i={i}, j={j}", "compose_range")
    if j == i + 1:
        return chain.kernels[i - 1]
    m = chain.kernels[i - 1].rows
    for k in chain.kernels[i:j - 1]:
        m = m @ k.rows
    return Kernel(m)


def apply_to_function(k: Kernel, f: Observable) -> Observable:
    """``(k f)(x) = sum_y k[x, y] f(y)``."""
    _check_same(k.size, f.size, "apply_to_function")
    return Observable(k.rows @ f.values)


def apply_to_measure(mu: Distribution, k: Kernel) -> Distribution:
    """``(mu k)(y) = sum_x mu(x) k[x, y]``."""
    _check_same(mu.size, k.size, "apply_to_measure")
    return Distribution(mu.probs @ k.rows)


def marginal_array(chain: ChainSpec) -> np.ndarray:
    """Laws of ``X_1..X_n`` as rows of a read-only ``(n, size)`` array."""
    return chain._marginals


def marginals(chain: ChainSpec) -> list[Distribution]:
    return [Distribution(p) for p in marginal_array(chain)]


def center_observables(chain: ChainSpec) -> ChainSpec:
    """Subtract from each ``f_i`` its mean under the law of ``X_i``."""
    mus = marginal_array(chain)
    means = np.einsum("ij,ij->i", mus, chain.observable_matrix())
    made: dict[tuple[int, float], Observable] = {}
    centered = []
    for f, m in zip(chain.observables, means):
        if m == 0.0:
            centered.append(f)
            continue
        key = (id(f), float(m))
        if key not in made:
            made[key] = Observable(f.values - m)
        centered.append(made[key])
    return ChainSpec(chain.space, chain.initial, chain.kernels, tuple(centered))


def enumerate_paths(chain: ChainSpec, max_paths: int = 10**7):
    """Yield ``(path, probability)`` for every positive-probability trajectory.

    Brute force over ``size**n`` paths; used as an oracle in tests and in
    :func:`mdclt.gordin.verify_martingale_representation`.
    """
    if chain.size ** chain.n > max_paths:
        raise ValidationError(
            f"{chain.size}**{chain.n} paths exceed the enumeration guard {max_paths}",
            "enumerate_paths")
    init = chain.initial.probs
    ks = [k.rows for k in chain.kernels]
    for path in product(range(chain.size), repeat=chain.n):
        p = init[path[0]]
        for t in range(chain.n - 1):
            if p == 0.0:
                break
            p *= ks[t][path[t], path[t + 1]]
        if p > 0.0:
            yield path, p


def chain_from_dict(d: dict) -> ChainSpec:
    """Build a chain from the JSON schema used by the command line.

    ``{"n": int, "states": [labels], "initial": [...], "kernels": [[[...]]],
    "observables": [[...]]}``. Errors name the offending field and index.
    """
    if not isinstance(d, dict):
        raise ValidationError("top-level value must be an object", "chain")
    for key in ("n", "initial", "kernels", "observables"):
        if key not in d:
            raise ValidationError("missing field", key)
    n = d["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"must be a positive integer, got {n!r}", "n")
    labels = d.get("states")
    init = _wrap(Distribution, d["initial"], "initial")
    size = init.size
    if labels is not None and len(labels) != size:
        raise ValidationError(f"expected {size} labels, got {len(labels)}", "states")
    kernels, observables = d["kernels"], d["observables"]
    if not isinstance(kernels, list) or len(kernels) != n - 1:
        raise ValidationError(f"expected a list of {n - 1} kernels", "kernels")
    if not isinstance(observables, list) or len(observables) != n:
        raise ValidationError(f"expected a list of {n} observables", "observables")
    ks = [_wrap(Kernel, k, f"kernels[{i}]") for i, k in enumerate(kernels)]
    fs = [_wrap(Observable, f, f"observables[{i}]") for i, f in enumerate(observables)]
    return ChainSpec(StateSpace(size, labels), init, tuple(ks), tuple(fs))


def _wrap(cls, value, name: str):
    try:
        return cls(value)
    except ValidationError as exc:
        msg = str(exc).split(": ", 1)[-1] if exc.field else str(exc)
        raise ValidationError(msg, name) from None


def load_chain(path: str | Path) -> ChainSpec:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON ({exc})", str(path)) from None
    return chain_from_dict(d)
