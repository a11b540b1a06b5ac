"""Seeded trajectory sampling and the Kolmogorov-Smirnov distance to N(0, 1).

Randomness is counter based: the uniform that drives replicate ``r`` at time
``k`` is the ``r``-th double of a Philox stream keyed by ``(seed, k)``. A
replicate's path therefore depends on nothing but ``(seed, r)``, and splitting
the replicates into chunks or threads cannot change any output bit.
"""

from __future__ import annotations

import json
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .gordin import DEGENERATE_VAR, DegenerateChainError
from .markov_core import ChainSpec, ValidationError, center_observables
from .scheme import expected_sum, variance_of_sum

__all__ = [
    "SimulationResult",
    "normal_cdf",
    "ks_distance",
    "uniforms",
    "sample_paths",
    "sample_path",
    "sample_statistic",
    "standardization",
    "write_samples",
    "read_samples",
    "default_workers",
]

_MASK64 = (1 << 64) - 1
_CHUNK_ALIGN = 4  # Philox.advance(d) skips 4*d doubles


def default_workers() -> int:
    """Thread cap from ``MDCLT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("MDCLT_THREADS", "1")))
    except ValueError:
        return 1


def normal_cdf(x):
    """Standard normal distribution function; accepts scalars or arrays."""
    out = ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def ks_distance(samples) -> float:
    """``max_i max(|i/N - Phi(s_i)|, |(i-1)/N - Phi(s_i)|)`` over the sorted sample."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    n = s.size
    if n == 0:
        raise ValidationError("empty sample", "ks_distance")
    cdf = ndtr(s)
    i = np.arange(1, n + 1)
    d = max(np.abs(i / n - cdf).max(), np.abs((i - 1) / n - cdf).max())
    return float(min(max(d, 0.0), 1.0))


def uniforms(seed: int, step: int, start: int, stop: int) -> np.ndarray:
    """Uniforms for replicates ``start..stop-1`` at time ``step``."""
    if start % _CHUNK_ALIGN:
        raise ValueError(f"chunk start {start} must be a multiple of {_CHUNK_ALIGN}")
    bg = np.random.Philox(key=[seed & _MASK64, step])
    if start:
        bg.advance(start // _CHUNK_ALIGN)
    return np.random.Generator(bg).random(stop - start)


def _cumulative(rows: np.ndarray) -> np.ndarray:
    cum = np.cumsum(rows, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _draw(cum_rows: np.ndarray, state: np.ndarray | None, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF step: next state is the number of cumulative levels ``<= u``."""
    out = np.zeros(u.size, dtype=np.intp)
    for c in range(cum_rows.shape[-1] - 1):
        level = cum_rows[c] if state is None else cum_rows[state, c]
        out += u >= level
    return out


def _run_chunk(chain: ChainSpec, seed: int, start: int, stop: int, keep_paths: bool):
    fs = chain.observable_matrix()
    state = _draw(_cumulative(chain.initial.probs), None, uniforms(seed, 1, start, stop))
    total = fs[0][state].copy()
    paths = None
    if keep_paths:
        paths = np.empty((stop - start, chain.n), dtype=np.intp)
        paths[:, 0] = state
    cums: dict[int, np.ndarray] = {}
    for k in range(1, chain.n):
        kern = chain.kernels[k - 1]
        cum = cums.get(id(kern))
        if cum is None:
            cum = cums[id(kern)] = _cumulative(kern.rows)
        state = _draw(cum, state, uniforms(seed, k + 1, start, stop))
        total += fs[k][state]
        if keep_paths:
            paths[:, k] = state
    return total, paths


def _chunks(replicates: int, chunk_size: int | None):
    if chunk_size is None or chunk_size >= replicates:
        return [(0, replicates)]
    if chunk_size < 1 or chunk_size % _CHUNK_ALIGN:
        raise ValueError(f"chunk_size must be a positive multiple of {_CHUNK_ALIGN}")
    return [(a, min(a + chunk_size, replicates)) for a in range(0, replicates, chunk_size)]


def _simulate(chain, replicates, seed, keep_paths, chunk_size, workers):
    if replicates < 1:
        raise ValidationError(f"replicates must be >= 1, got {replicates}", "replicates")
    parts = _chunks(replicates, chunk_size)
    job = lambda ab: _run_chunk(chain, seed, ab[0], ab[1], keep_paths)  # noqa: E731
    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, parts))
    else:
        results = [job(ab) for ab in parts]
    sums = np.concatenate([r[0] for r in results])
    paths = np.concatenate([r[1] for r in results]) if keep_paths else None
    return sums, paths


def sample_paths(chain: ChainSpec, replicates: int, seed: int, chunk_size: int | None = None,
                 workers: int = 1) -> np.ndarray:
    """``(replicates, n)`` array of 0-based state indices."""
    return _simulate(chain, replicates, seed, True, chunk_size, workers)[1]


def sample_path(chain: ChainSpec, seed: int, replicate: int = 0) -> np.ndarray:
    """Trajectory ``X_1..X_n`` of a single replicate."""
    start = replicate - replicate % _CHUNK_ALIGN
    _, paths = _run_chunk(chain, seed, start, replicate + 1, True)
    return paths[-1]


def standardization(chain: ChainSpec) -> tuple[float, float]:
    """Exact ``(E S_n, D(S_n))``."""
    return expected_sum(chain), variance_of_sum(center_observables(chain))


@dataclass(frozen=True, eq=False)
class SimulationResult:
    n: int
    replicates: int
    seed: int
    samples: np.ndarray
    ks_distance: float
    mean: float
    variance: float

    def to_dict(self, include_samples: bool = True) -> dict:
        d = {"n": self.n, "replicates": self.replicates, "seed": self.seed,
             "ks_distance": self.ks_distance, "mean": self.mean, "variance": self.variance}
        if include_samples:
            d["samples"] = self.samples.tolist()
        return d

    def to_json(self, include_samples: bool = True) -> str:
        return json.dumps(self.to_dict(include_samples), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationResult":
        s = np.asarray(d.get("samples", []), dtype=float)
        s.setflags(write=False)
        return cls(d["n"], d["replicates"], d["seed"], s, d["ks_distance"], d["mean"],
                   d["variance"])


def sample_statistic(chain: ChainSpec, replicates: int, seed: int,
                     chunk_size: int | None = None, workers: int | None = None
                     ) -> SimulationResult:
    """Sample ``(S_n - E S_n) / sqrt(D(S_n))`` with exact centring and scaling."""
    mean, var = standardization(chain)
    if var <= DEGENERATE_VAR:
        raise DegenerateChainError(f"D(S_n) = {var:.3g} is degenerate", "chain")
    if workers is None:
        workers = default_workers()
    sums, _ = _simulate(chain, replicates, seed, False, chunk_size, workers)
    z = np.sort((sums - mean) / np.sqrt(var))
    z.setflags(write=False)
    return SimulationResult(
        n=chain.n,
        replicates=replicates,
        seed=seed,
        samples=z,
        ks_distance=ks_distance(z),
        mean=float(z.mean()),
        variance=float(z.var(ddof=1)) if replicates > 1 else 0.0,
    )


def write_samples(path: str | Path, samples) -> None:
    """Little-endian: uint64 count, then that many float64 values."""
    a = np.asarray(samples, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", a.size))
        fh.write(a.tobytes())


def read_samples(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    (count,) = struct.unpack_from("<Q", data)
    a = np.frombuffer(data, dtype="<f8", offset=8)
    if a.size != count:
        raise ValidationError(f"header says {count} values, file holds {a.size}", str(path))
    return a.astype(np.float64)
