"""Closed-form measure sequences built from repeated Bernoulli trials.

Trial ``j`` is ``X_j``: it fails (``X_j = 0``) with probability ``q`` and
succeeds with probability ``1 - q``. From the trials we get the running
maximum ``Y_n`` and the record index ``Z_n``, the last index at which the
running maximum is attained. Their pmfs, together with a few degenerate
sequences and the binomial/Poisson pair, are exposed both as plain
constructors and as :class:`MeasureFamily` objects indexed by ``n``.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from scipy import stats

from limitlab.errors import ParameterError
from limitlab.extreal import (
    EXACT,
    FLOAT,
    MODES,
    PLUS_INF,
    DiscreteMeasure,
    as_rational,
    dirac,
)

POISSON_TAIL_TARGET = 1e-15
LUMP = "lump_at_kmax"
RENORMALIZE = "renormalize"


def _check_q(q) -> Fraction:
    try:
        q = as_rational(q)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"q must be a rational number, got {q!r}") from exc
    if not 0 < q < 1:
        raise ParameterError(f"q must lie in (0, 1), got {q}")
    return q


def _check_n(n) -> int:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParameterError(f"index n must be an integer >= 1, got {n!r}")
    return n


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _num(q: Fraction, mode: str):
    return q if mode == EXACT else float(q)


def bernoulli_marginal(q, n: int = 1, mode: str = EXACT) -> DiscreteMeasure:
    """pmf of a single trial ``X_n``: ``{0: q, 1: 1 - q}`` whatever ``n`` is."""
    q = _num(_check_q(q), _check_mode(mode))
    _check_n(n)
    return DiscreteMeasure([(0, q), (1, 1 - q)], mode=mode)


def running_max(q, n: int, mode: str = EXACT) -> DiscreteMeasure:
    """pmf of ``Y_n = max(X_1..X_n)``: ``{0: q^n, 1: 1 - q^n}``."""
    q = _num(_check_q(q), _check_mode(mode))
    n = _check_n(n)
    all_fail = q**n
    return DiscreteMeasure([(0, all_fail), (1, 1 - all_fail)], mode=mode)


def record_index(q, n: int, mode: str = EXACT) -> DiscreteMeasure:
    """pmf of the record index ``Z_n``.

    ``Z_n = j < n`` needs a success at ``j`` followed by ``n - j`` failures,
    mass ``(1 - q) q^(n-j)``. ``Z_n = n`` collects a success at ``n`` and the
    all-failure string, mass ``1 - q + q^n``.
    """
    q = _check_q(q)
    n = _check_n(n)
    if _check_mode(mode) == EXACT:
        # integer numerators over b^n, with q = a/b
        a, b = q.numerator, q.denominator
        nums, power = [], b ** (n - 1) * (b - a)  # (1-q) q^k scaled by b^n, k = 1 first
        for _ in range(1, n):
            power = power // b * a
            nums.append(power)
        denom = b**n
        masses = [Fraction(x, denom) for x in reversed(nums)]
        masses.append(Fraction(denom - b ** (n - 1) * a + a**n, denom))
        return DiscreteMeasure(zip(range(1, n + 1), masses), mode=EXACT)
    qf = float(q)
    masses = {}
    power = qf  # q^(n-j), starting from j = n - 1
    for j in range(n - 1, 0, -1):
        masses[j] = (1 - qf) * power
        power *= qf
    masses[n] = 1 - qf + qf**n
    return DiscreteMeasure(masses, mode=mode)


def dirac_walk(n: int, mode: str = EXACT) -> DiscreteMeasure:
    return dirac(_check_n(n), mode=_check_mode(mode))


def dirac_recip(n: int, mode: str = EXACT) -> DiscreteMeasure:
    n = _check_n(n)
    point = Fraction(1, n) if _check_mode(mode) == EXACT else 1.0 / n
    return dirac(point, mode=mode)


def _binomial_exact(n: int, p: Fraction) -> dict:
    comp = 1 - p
    return {k: math.comb(n, k) * p**k * comp ** (n - k) for k in range(n + 1)}


def binomial(n: int, p, mode: Optional[str] = None) -> DiscreteMeasure:
    """Binomial(n, p). Exact for rational ``p`` unless ``mode="float"``."""
    n = _check_n(n)
    if mode is None:
        mode = FLOAT if isinstance(p, float) else EXACT
    _check_mode(mode)
    try:
        p_exact = as_rational(p)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"p must be a number, got {p!r}") from exc
    if not 0 <= p_exact <= 1:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if mode == EXACT:
        return DiscreteMeasure(_binomial_exact(n, p_exact), mode=EXACT)
    pf = float(p_exact)
    if pf in (0.0, 1.0):
        return dirac(0 if pf == 0.0 else n, mode=FLOAT)
    pmf = stats.binom.pmf(range(n + 1), n, pf)
    return DiscreteMeasure(zip(range(n + 1), (float(x) for x in pmf)), mode=FLOAT)


def poisson_tail(c, k_max: int) -> float:
    """Poisson(c) mass strictly above ``k_max``."""
    return float(stats.poisson.sf(k_max, float(c)))


def default_k_max(c, target: float = POISSON_TAIL_TARGET) -> int:
    """Smallest cut-off whose Poisson tail is below ``target``."""
    c = float(c)
    k = max(1, int(c))
    while poisson_tail(c, k) >= target:
        k += 1
    return k


def poisson_pmf(c, k_max: int) -> list[float]:
    """Untruncated Poisson(c) masses for ``k = 0..k_max`` (they sum to < 1)."""
    c = float(c)
    out, term = [], math.exp(-c)
    for k in range(k_max + 1):
        if k:
            term *= c / k
        out.append(term)
    return out


def poisson_truncated(c, k_max: Optional[int] = None, tail_policy: str = LUMP) -> DiscreteMeasure:
    """Poisson(c) cut at ``k_max`` with the tail mass handled explicitly.

    ``lump_at_kmax`` moves the tail onto ``k_max``; ``renormalize`` rescales
    the kept masses. The default cut-off keeps the tail below 1e-15.
    """
    try:
        c_val = float(as_rational(c))
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"c must be a number, got {c!r}") from exc
    if not c_val > 0:
        raise ParameterError(f"c must be positive, got {c}")
    if k_max is None:
        k_max = default_k_max(c_val)
    if k_max < 1:
        raise ParameterError(f"k_max must be >= 1, got {k_max}")
    masses = poisson_pmf(c_val, k_max)
    tail = poisson_tail(c_val, k_max)
    if tail_policy == LUMP:
        masses[-1] += tail
    elif tail_policy == RENORMALIZE:
        kept = math.fsum(masses)
        masses = [m / kept for m in masses]
    else:
        raise ParameterError(f"unknown tail policy {tail_policy!r}")
    return DiscreteMeasure(zip(range(k_max + 1), masses), mode=FLOAT)


@dataclass(frozen=True)
class MeasureFamily:
    """An indexed sequence ``n -> rho_n`` with its declared limits.

    Declared limits record what the sequence is claimed to converge to;
    :mod:`limitlab.convergence` checks them rather than trusting them.
    """

    name: str
    params: Mapping[str, object]
    generator: Callable[[int], DiscreteMeasure] = field(repr=False)
    declared_limit_on_R: Optional[DiscreteMeasure] = None
    declared_limit_on_Rbar: Optional[DiscreteMeasure] = None
    mode: str = EXACT

    def __call__(self, n: int) -> DiscreteMeasure:
        return self.generator(_check_n(n))

    def measures(self, N: int, start: int = 1) -> list[DiscreteMeasure]:
        return [self(n) for n in range(max(1, start), N + 1)]

    def describe(self) -> dict:
        return {"name": self.name, "params": {k: str(v) for k, v in self.params.items()}, "mode": self.mode}


def _memo(fn):
    return functools.lru_cache(maxsize=2048)(fn)


def bernoulli_family(q, mode: str = EXACT) -> MeasureFamily:
    q = _check_q(q)
    lam = bernoulli_marginal(q, 1, mode=_check_mode(mode))
    return MeasureFamily(
        "bernoulli_marginal", {"q": q}, _memo(lambda n: bernoulli_marginal(q, n, mode)), lam, lam, mode
    )


def running_max_family(q, mode: str = EXACT) -> MeasureFamily:
    q = _check_q(q)
    one = dirac(1, mode=_check_mode(mode))
    return MeasureFamily("running_max", {"q": q}, _memo(lambda n: running_max(q, n, mode)), one, one, mode)


def record_index_family(q, mode: str = EXACT) -> MeasureFamily:
    q = _check_q(q)
    return MeasureFamily(
        "record_index",
        {"q": q},
        _memo(lambda n: record_index(q, n, mode)),
        None,
        dirac(PLUS_INF, mode=_check_mode(mode)),
        mode,
    )


def dirac_walk_family(mode: str = EXACT) -> MeasureFamily:
    return MeasureFamily(
        "dirac_walk", {}, _memo(lambda n: dirac_walk(n, mode)), None, dirac(PLUS_INF, mode=_check_mode(mode)), mode
    )


def dirac_recip_family(mode: str = EXACT) -> MeasureFamily:
    zero = dirac(0, mode=_check_mode(mode))
    return MeasureFamily("dirac_recip", {}, _memo(lambda n: dirac_recip(n, mode)), zero, zero, mode)


def binomial_poisson_family(c=1, k_max: Optional[int] = None) -> MeasureFamily:
    """``n -> Binomial(n, c/n)`` with its Poisson(c) limit.

    For ``n < c`` the success probability is capped at 1 so every index
    yields a valid measure.
    """
    try:
        c = as_rational(c)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"c must be a rational number, got {c!r}") from exc
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")
    limit = poisson_truncated(c, k_max)
    return MeasureFamily(
        "binomial_poisson",
        {"c": c},
        _memo(lambda n: binomial(n, min(Fraction(1), c / n), mode=FLOAT)),
        limit,
        limit,
        FLOAT,
    )


FAMILIES: dict[str, Callable[..., MeasureFamily]] = {
    "bernoulli_marginal": bernoulli_family,
    "running_max": running_max_family,
    "record_index": record_index_family,
    "dirac_walk": dirac_walk_family,
    "dirac_recip": dirac_recip_family,
    "binomial_poisson": binomial_poisson_family,
}

_ACCEPTED = {
    "bernoulli_marginal": {"q", "mode"},
    "running_max": {"q", "mode"},
    "record_index": {"q", "mode"},
    "dirac_walk": {"mode"},
    "dirac_recip": {"mode"},
    "binomial_poisson": {"c", "k_max"},
}


def make_family(name: str, params: Mapping | str | None = None) -> MeasureFamily:
    """Build a registered family from a parameter mapping or JSON blob.

    >>> make_family("record_index", '{"q": "1/2"}')(3).mass_at(3)
    Fraction(5, 8)
    """
    if name not in FAMILIES:
        raise ParameterError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    if isinstance(params, str):
        params = json.loads(params) if params.strip() else {}
    params = dict(params or {})
    unknown = set(params) - _ACCEPTED[name]
    if unknown:
        raise ParameterError(f"family {name!r} does not take {sorted(unknown)}")
    if "q" in params:
        params["q"] = _check_q(params["q"])
    if "k_max" in params and params["k_max"] is not None:
        params["k_max"] = int(params["k_max"])
    return FAMILIES[name](**params)
