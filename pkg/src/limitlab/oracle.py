"""Ground truth for the trial statistics: exhaustive enumeration and simulation.

Enumeration walks all ``2**n`` outcome strings of ``n`` independent trials
and adds up exact string probabilities, so it checks the closed-form pmfs
without sharing any code with them. Simulation draws the same statistics
from a seeded NumPy generator; each worker gets its own child stream, which
makes results depend only on ``(seed, workers)``.
"""

from __future__ import annotations

import csv
import io
import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional

import numpy as np

from limitlab.errors import CapacityError, ParameterError
from limitlab.events import apply_rule, ray_growth
from limitlab.extreal import EXACT, DiscreteMeasure, measure_of_event
from limitlab.families import _check_n, _check_q, bernoulli_marginal, record_index, running_max

MAX_ENUMERATION_N = 20
SIM_CHUNK_ROWS = 1 << 16


@dataclass(frozen=True)
class TrialString:
    bits: tuple[int, ...]
    probability: Fraction

    @property
    def last(self) -> int:
        return self.bits[-1]

    @property
    def running_max(self) -> int:
        return max(self.bits)

    @property
    def record_index(self) -> int:
        top = max(self.bits)
        return max(j for j, b in enumerate(self.bits, start=1) if b == top)


def trial_strings(q, n: int, prefix: tuple[int, ...] = ()) -> Iterator[TrialString]:
    """All outcome strings of ``n`` trials (optionally with a fixed prefix)."""
    q = _check_q(q)
    powers_q = [q**k for k in range(n + 1)]
    powers_p = [(1 - q) ** k for k in range(n + 1)]
    for rest in itertools.product((0, 1), repeat=n - len(prefix)):
        bits = prefix + rest
        ones = sum(bits)
        yield TrialString(bits, powers_q[n - ones] * powers_p[ones])


class ExactPmfs(NamedTuple):
    x: DiscreteMeasure
    y: DiscreteMeasure
    z: DiscreteMeasure


def _tally(args) -> tuple[dict, dict, dict]:
    q, n, prefix = args
    xs, ys, zs = Counter(), Counter(), Counter()
    for s in trial_strings(q, n, prefix):
        xs[s.last] += s.probability
        ys[s.running_max] += s.probability
        zs[s.record_index] += s.probability
    return dict(xs), dict(ys), dict(zs)


def _merge(parts) -> tuple[Counter, Counter, Counter]:
    total = (Counter(), Counter(), Counter())
    for part in parts:
        for acc, d in zip(total, part):
            for k, v in d.items():
                acc[k] += v
    return total


def enumerate_exact(q, n: int, workers: int = 1, max_n: int = MAX_ENUMERATION_N) -> ExactPmfs:
    """Exact pmfs of ``X_n``, ``Y_n`` and ``Z_n`` by summing over all strings.

    ``Z_n`` follows its definition literally: the largest index at which the
    running maximum is attained, so the all-failure string gives ``Z_n = n``.
    With ``workers > 1`` the strings are sharded by leading bits.
    """
    q = _check_q(q)
    n = _check_n(n)
    if n > max_n:
        raise CapacityError(f"enumeration of 2**{n} strings exceeds the bound n <= {max_n}")
    if workers <= 1:
        parts = [_tally((q, n, ()))]
    else:
        depth = min(n, max(1, (workers - 1).bit_length()))
        jobs = [(q, n, pre) for pre in itertools.product((0, 1), repeat=depth)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_tally, jobs))
    xs, ys, zs = _merge(parts)
    return ExactPmfs(DiscreteMeasure(xs, EXACT), DiscreteMeasure(ys, EXACT), DiscreteMeasure(zs, EXACT))


def check_partition(q, n: int) -> int:
    """Count strings violating ``{X_n=0} = {Z_n<n} u {Y_n=0}`` as a disjoint union."""
    bad = 0
    for s in trial_strings(q, n):
        fails_last = s.last == 0
        early_record = s.record_index < n
        all_fail = s.running_max == 0
        if fails_last != (early_record or all_fail) or (early_record and all_fail):
            bad += 1
    return bad


def check_identity(q, n: int, method: str = "closed_form") -> Fraction:
    """``lambda_n({0}) - gamma_n({0}) - mu_n((-inf, n))``, exactly.

    ``method="oracle"`` reads the three pmfs off the enumeration instead of
    the closed forms.
    """
    q = _check_q(q)
    n = _check_n(n)
    if method == "oracle":
        lam, gam, mu = enumerate_exact(q, n)
    elif method == "closed_form":
        lam, gam, mu = bernoulli_marginal(q, n), running_max(q, n), record_index(q, n)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return lam.mass_at(0) - gam.mass_at(0) - measure_of_event(mu, apply_rule(ray_growth(), n))


@dataclass(frozen=True)
class EmpiricalPmf:
    counts: dict
    trials: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.trials:
            raise ValueError("counts do not add up to the number of trials")

    @property
    def frequencies(self) -> dict:
        return {k: self.counts[k] / self.trials for k in sorted(self.counts)}

    def frequency(self, value) -> float:
        return self.counts.get(value, 0) / self.trials

    def to_dict(self) -> dict:
        return {
            "counts": {str(k): self.counts[k] for k in sorted(self.counts)},
            "trials": self.trials,
            "seed": self.seed,
        }


class Simulation(NamedTuple):
    x: EmpiricalPmf
    y: EmpiricalPmf
    z: EmpiricalPmf


def _simulate_share(args) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    q, n, trials, seed_seq = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    cx = np.zeros(2, dtype=np.int64)
    cy = np.zeros(2, dtype=np.int64)
    cz = np.zeros(n + 1, dtype=np.int64)
    done = 0
    while done < trials:
        rows = min(SIM_CHUNK_ROWS, trials - done)
        bits = (rng.random((rows, n)) >= q).astype(np.int8)  # 0 = failure, prob q
        y = bits.max(axis=1)
        hit = bits == y[:, None]
        z = n - np.argmax(hit[:, ::-1], axis=1)
        cx += np.bincount(bits[:, -1], minlength=2)
        cy += np.bincount(y, minlength=2)
        cz += np.bincount(z, minlength=n + 1)
        done += rows
    return cx, cy, cz


def simulate(q, n: int, trials: int, seed: int = 42, workers: int = 1) -> Simulation:
    """Empirical pmfs of ``X_n``, ``Y_n``, ``Z_n`` from ``trials`` runs."""
    q = float(_check_q(q))
    n = _check_n(n)
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    workers = max(1, int(workers))
    streams = np.random.SeedSequence(seed).spawn(workers)
    shares = [trials // workers + (1 if i < trials % workers else 0) for i in range(workers)]
    jobs = [(q, n, k, ss) for k, ss in zip(shares, streams) if k]
    if workers == 1:
        parts = [_simulate_share(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_share, jobs))
    cx = sum(p[0] for p in parts)
    cy = sum(p[1] for p in parts)
    cz = sum(p[2] for p in parts)

    def pmf(counts, values):
        return EmpiricalPmf({v: int(counts[v]) for v in values if counts[v]}, trials, seed)

    return Simulation(pmf(cx, (0, 1)), pmf(cy, (0, 1)), pmf(cz, range(1, n + 1)))


CSV_FIELDS = ("value", "exact", "closed_form", "empirical", "abs_err")


def pmf_rows(
    exact: DiscreteMeasure, closed: DiscreteMeasure, empirical: Optional[EmpiricalPmf] = None
) -> list[dict]:
    """One row per support point; ``abs_err`` is empirical against exact."""
    values = sorted(set(exact.points) | set(closed.points))
    rows = []
    for v in values:
        ex = exact.mass_at(v)
        emp = empirical.frequency(int(v.value)) if empirical is not None else None
        rows.append(
            {
                "value": str(v),
                "exact": str(ex),
                "closed_form": str(closed.mass_at(v)),
                "empirical": "" if emp is None else repr(emp),
                "abs_err": "" if emp is None else repr(abs(emp - float(ex))),
            }
        )
    return rows


def pmf_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
