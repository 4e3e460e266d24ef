"""Exact win probability of alternative A under conventional weighted voting.

Every voter independently supports A with probability ``p`` and casts a
vote equal to their integer weight.  A wins when the A-side weight is
strictly more than half the total, and an exact half split counts as a
coin flip (share 1/2).

All weight comparisons are done on exact integers (``2 * A_side`` against
the total), so fractional stakes must be expressed in fixed-point units.
"""

from __future__ import annotations

import enum
import math
import operator
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from functools import lru_cache

import numpy as np

from .errors import CapacityError, ValidationError

ENUM_CAP = 25
DP_WEIGHT_CAP = 10**7

MAX_TOTAL_WEIGHT = 2**64 - 1
# 2 * subset sum must stay inside int64 for the vectorised path.
_INT64_SAFE_TOTAL = 2**62 - 1
# Voters handled by one precomputed membership table.
_BLOCK_BITS = 16
# Bound on the number of subset sums materialised at once.
_CHUNK_ELEMENTS = 1 << 22


def _as_int(value, what: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{what} must be an integer, got bool")
    try:
        return operator.index(value)
    except TypeError:
        raise ValidationError(f"{what} must be an integer, got {value!r}") from None


def check_weights(values: Iterable, what: str = "weight", allow_empty: bool = False) -> tuple[int, ...]:
    """Validate a sequence of non-negative integer weights and return it as a tuple."""
    out = tuple(_as_int(v, what) for v in values)
    if not out and not allow_empty:
        raise ValidationError(f"at least one {what} is required")
    for v in out:
        if v < 0:
            raise ValidationError(f"{what} must be non-negative, got {v}")
    if sum(out) > MAX_TOTAL_WEIGHT:
        raise ValidationError(f"total {what} {sum(out)} does not fit in 64 bits")
    return out


def to_fixed_point(values: Iterable, denominator: int) -> tuple[int, ...]:
    """Convert decimal stakes to integer units of ``1/denominator``.

    Stakes that are not an exact multiple of the unit are rejected
    rather than rounded.
    """
    denominator = _as_int(denominator, "denominator")
    if denominator < 1:
        raise ValidationError("fixed-point denominator must be >= 1")
    units = []
    for v in values:
        try:
            scaled = Decimal(str(v)) * denominator
        except InvalidOperation:
            raise ValidationError(f"not a decimal stake: {v!r}") from None
        if not scaled.is_finite() or scaled != scaled.to_integral_value():
            raise ValidationError(f"stake {v} is not a multiple of 1/{denominator}")
        units.append(int(scaled))
    return check_weights(units, allow_empty=True)


@dataclass(frozen=True)
class WeightVector:
    """Exact non-negative integer voting weights, in voter order."""

    weights: tuple[int, ...]

    def __post_init__(self):
        weights = check_weights(self.weights)
        if not any(weights):
            raise ValidationError("at least one weight must be positive")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_fixed_point(cls, values: Iterable, denominator: int) -> "WeightVector":
        return cls(to_fixed_point(values, denominator))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> int:
        return sum(self.weights)

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i):
        return self.weights[i]


def as_weight_vector(weights) -> WeightVector:
    if isinstance(weights, WeightVector):
        return weights
    return WeightVector(tuple(weights))


def check_probability(p) -> float:
    """Validate a support probability and return it as a float."""
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise ValidationError(f"probability must be a real number, got {p!r}") from None
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p}")
    return p


def subset_members(subset, n: int) -> tuple[int, ...]:
    """Normalise a voter subset to sorted 0-based indices.

    ``subset`` is either an iterable of indices or an ``int`` bitmask
    (bit ``j`` set means voter ``j`` is a member).
    """
    if isinstance(subset, (int, np.integer)) and not isinstance(subset, bool):
        mask = int(subset)
        if mask < 0 or mask >> n:
            raise ValidationError(f"bitmask {mask:#x} has bits outside {n} voters")
        return tuple(j for j in range(n) if mask >> j & 1)
    members = sorted({_as_int(j, "voter index") for j in subset})
    for j in members:
        if not 0 <= j < n:
            raise ValidationError(f"voter index {j} out of range for {n} voters")
    return tuple(members)


def total_weight(subset, weights) -> int:
    """Exact total weight held by the members of ``subset``."""
    w = as_weight_vector(weights)
    return sum(w[j] for j in subset_members(subset, w.n))


def outcome_share(subset, weights) -> float:
    """Probability that A wins when exactly ``subset`` supports A: 1, 1/2 or 0."""
    w = as_weight_vector(weights)
    doubled = 2 * total_weight(subset, w)
    if doubled > w.total:
        return 1.0
    if doubled == w.total:
        return 0.5
    return 0.0


class DistributionKind(enum.Enum):
    EQUAL_WEIGHT = "equal_weight"
    DOMINANT_WEIGHT = "dominant_weight"
    OTHER = "other"


@dataclass(frozen=True)
class DistributionClass:
    kind: DistributionKind
    dominant: int | None = None

    def __str__(self):
        if self.kind is DistributionKind.DOMINANT_WEIGHT:
            return f"{self.kind.value}({self.dominant})"
        return self.kind.value


def classify(weights) -> DistributionClass:
    """Classify a weight vector as equal-weight, dominant-weight or other.

    A dominant voter holds strictly more than half of the total weight.  A
    single voter is always dominant, which takes precedence over equality.
    """
    w = as_weight_vector(weights)
    total = w.total
    for i, wi in enumerate(w):
        if 2 * wi > total:
            return DistributionClass(DistributionKind.DOMINANT_WEIGHT, i)
    if len(set(w.weights)) == 1:
        return DistributionClass(DistributionKind.EQUAL_WEIGHT)
    return DistributionClass(DistributionKind.OTHER)


# --- subset enumeration -------------------------------------------------


@lru_cache(maxsize=None)
def _membership(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Membership matrix, subset sizes and size one-hot for all 2**n subsets."""
    masks = np.arange(1 << n, dtype=np.int64)
    members = ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)
    sizes = members.sum(axis=1)
    onehot = np.zeros((1 << n, n + 1), dtype=np.int64)
    onehot[np.arange(1 << n), sizes] = 1
    for arr in (members, sizes, onehot):
        arr.setflags(write=False)
    return members, sizes, onehot


def _score(sums: np.ndarray, total: int) -> np.ndarray:
    # Twice G: 2 for a win, 1 for a tie, 0 for a loss.
    doubled = 2 * sums
    return 2 * (doubled > total).astype(np.int64) + (doubled == total).astype(np.int64)


def doubled_tallies_batch(matrix: Sequence[Sequence[int]]) -> np.ndarray:
    """Per-size sums of ``2 * G(S, w)`` for several weight vectors of equal length.

    Returns an integer array of shape ``(rows, n + 1)`` whose entry ``[r, k]``
    is the sum of ``2 * G`` over every subset of size ``k`` for row ``r``.
    Rows must have at most 16 voters.
    """
    rows = [tuple(r) for r in matrix]
    n = len(rows[0])
    if n > _BLOCK_BITS:
        raise ValueError("batch tallies support at most 16 voters per row")
    members, _, onehot = _membership(n)
    totals = [sum(r) for r in rows]
    dtype = np.int64 if max(totals) <= _INT64_SAFE_TOTAL else object
    W = np.array(rows, dtype=dtype)
    out = np.zeros((len(rows), n + 1), dtype=np.int64)
    step = max(1, _CHUNK_ELEMENTS >> n)
    for start in range(0, len(rows), step):
        block = W[start:start + step]
        sums = block @ members.T.astype(dtype)
        doubled = 2 * sums
        tot = np.array(totals[start:start + step], dtype=dtype)[:, None]
        score = 2 * (doubled > tot).astype(np.int64) + (doubled == tot).astype(np.int64)
        out[start:start + step] = score @ onehot
    return out


def _tallies_large(weights: tuple[int, ...], threads: int) -> np.ndarray:
    n = len(weights)
    total = sum(weights)
    dtype = np.int64 if total <= _INT64_SAFE_TOTAL else object
    low_members, low_sizes, _ = _membership(_BLOCK_BITS)
    high_members, high_sizes, _ = _membership(n - _BLOCK_BITS)
    # Order low subsets by size so per-size sums become contiguous slices.
    order = np.argsort(low_sizes, kind="stable")
    bounds = np.searchsorted(low_sizes[order], np.arange(_BLOCK_BITS + 1))
    low_sums = (low_members.astype(dtype) @ np.array(weights[:_BLOCK_BITS], dtype=dtype))[order]
    high_sums = high_members.astype(dtype) @ np.array(weights[_BLOCK_BITS:], dtype=dtype)
    step = max(1, _CHUNK_ELEMENTS >> _BLOCK_BITS)
    starts = range(0, len(high_sums), step)

    def chunk(start: int) -> np.ndarray:
        hs = high_sums[start:start + step]
        hk = high_sizes[start:start + step]
        score = _score(hs[:, None] + low_sums[None, :], total)
        per_low_size = np.add.reduceat(score, bounds, axis=1)  # (rows, 17)
        tally = np.zeros(n + 1, dtype=np.int64)
        for k_high, row in zip(hk, per_low_size):
            tally[k_high:k_high + _BLOCK_BITS + 1] += row
        return tally

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(s) for s in starts]
    # Integer reduction: identical for any thread count.
    return np.sum(parts, axis=0)


def doubled_tallies(weights, threads: int = 1) -> np.ndarray:
    """Per-size sums of ``2 * G(S, w)`` over all subsets of voters."""
    w = as_weight_vector(weights)
    if w.n <= _BLOCK_BITS:
        return doubled_tallies_batch([w.weights])[0]
    return _tallies_large(w.weights, threads)


def iter_subset_sums(weights):
    """Yield ``(sums, sizes)`` array pairs that together cover all 2**n subsets."""
    w = as_weight_vector(weights)
    dtype = np.int64 if w.total <= _INT64_SAFE_TOTAL else object
    if w.n <= _BLOCK_BITS:
        members, sizes, _ = _membership(w.n)
        yield members.astype(dtype) @ np.array(w.weights, dtype=dtype), sizes
        return
    low_members, low_sizes, _ = _membership(_BLOCK_BITS)
    high_members, high_sizes, _ = _membership(w.n - _BLOCK_BITS)
    low_sums = low_members.astype(dtype) @ np.array(w.weights[:_BLOCK_BITS], dtype=dtype)
    high_sums = high_members.astype(dtype) @ np.array(w.weights[_BLOCK_BITS:], dtype=dtype)
    step = max(1, _CHUNK_ELEMENTS >> _BLOCK_BITS)
    for start in range(0, len(high_sums), step):
        hs = high_sums[start:start + step]
        hk = high_sizes[start:start + step]
        yield (hs[:, None] + low_sums[None, :]).ravel(), (hk[:, None] + low_sizes[None, :]).ravel()


def size_coefficients(n: int, p: float) -> list[float]:
    """``p**k * (1-p)**(n-k)`` for k = 0..n."""
    q = 1.0 - p
    return [p**k * q ** (n - k) for k in range(n + 1)]


def probability_from_tallies(tally: Sequence[int], p: float) -> float:
    n = len(tally) - 1
    coefs = size_coefficients(n, p)
    return math.fsum(c * int(t) for c, t in zip(coefs, tally)) / 2.0


def win_probability_enum(weights, p, cap: int = ENUM_CAP, threads: int = 1) -> float:
    """P(A wins) by summing over all 2**n sets of A-supporters.

    Subsets are grouped by size, so the only floating-point work is one
    compensated sum of ``n + 1`` terms; the win/tie counting is exact.
    The result does not depend on ``threads``.
    """
    w = as_weight_vector(weights)
    p = check_probability(p)
    if w.n > cap:
        raise CapacityError(
            f"instance too large for enumeration: {w.n} voters exceeds cap {cap}; "
            "use the dynamic program (method='dp') or Monte Carlo"
        )
    return probability_from_tallies(doubled_tallies(w, threads=threads), p)


def win_probability_dp(weights, p, cap: int = DP_WEIGHT_CAP) -> float:
    """P(A wins) via the distribution of total A-side weight.

    Runs in O(n * total weight) by folding each voter into a probability
    table indexed by A-side weight.
    """
    w = as_weight_vector(weights)
    p = check_probability(p)
    total = w.total
    if total > cap:
        raise CapacityError(
            f"total weight {total} exceeds dynamic-program cap {cap}; "
            "use enumeration (few voters) or Monte Carlo"
        )
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    reach = 0
    for wi in w:
        if wi == 0:
            continue
        head = dist[: reach + 1].copy()
        dist[: reach + 1] *= 1.0 - p
        dist[wi : wi + reach + 1] += p * head
        reach += wi
    half = total // 2
    terms = dist[half + 1 :].tolist()
    if total % 2 == 0:
        terms.append(0.5 * dist[half])
    return math.fsum(terms)


def ew_win_probability(n: int, p) -> float:
    """Closed form for ``n`` equal-weight voters (binomial majority, ties halved)."""
    n = _as_int(n, "voter count")
    if n < 1:
        raise ValidationError("voter count must be >= 1")
    p = check_probability(p)
    if n > 1000 and 0.0 < p < 1.0:
        lp, lq = math.log(p), math.log1p(-p)

        def term(k):
            return math.exp(
                math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + k * lp + (n - k) * lq
            )
    else:

        def term(k):
            return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)

    terms = [term(k) for k in range(n // 2 + 1, n + 1)]
    if n % 2 == 0:
        terms.append(0.5 * term(n // 2))
    return math.fsum(terms)


def dw_win_probability(p) -> float:
    """With a dominant voter, A wins exactly when that voter supports A."""
    return check_probability(p)


def win_probability(weights, p, method: str = "auto", threads: int = 1) -> float:
    """Dispatch to the cheapest exact route.

    ``auto`` returns ``p`` directly for dominant-weight vectors, enumerates
    up to ``ENUM_CAP`` voters and otherwise falls back to the dynamic program.
    """
    w = as_weight_vector(weights)
    if method == "enum":
        return win_probability_enum(w, p, threads=threads)
    if method == "dp":
        return win_probability_dp(w, p)
    if method != "auto":
        raise ValidationError(f"unknown method {method!r}")
    if classify(w).kind is DistributionKind.DOMINANT_WEIGHT:
        return dw_win_probability(p)
    if w.n <= ENUM_CAP:
        return win_probability_enum(w, p, threads=threads)
    return win_probability_dp(w, p)
