"""Reproducible studies: imbalance vs. win probability, convergence in the
number of delegators and in ``p``, and randomized inequality sweeps.

Every random draw comes from a substream keyed by ``(seed, index)``, so
outputs depend only on the configuration, never on execution order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .delegation import (
    DelegationScenario,
    adversarial_delegator_weights,
    equalweight_delegation_probability,
    post_delegation_win_probability,
)
from .errors import ValidationError
from .imbalance import imbalance_measures, pearson
from .model import (
    ENUM_CAP,
    _as_int,
    as_weight_vector,
    check_probability,
    dw_win_probability,
    ew_win_probability,
    win_probability_enum,
)
from .montecarlo import block_generator

DEFAULT_M_GRID = (0, 1, 2, 5, 10, 25, 50, 100, 200, 400)
DEFAULT_P_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999, 1.0)
MEASURES = ("gini", "variance", "theil", "hoover")
STUDY_HEADER = ("trial", "weights", "gini", "variance", "theil", "hoover", "p_win")


def sig12(x: float) -> float:
    """Round to 12 significant digits (the precision of all emitted numbers)."""
    return float(f"{x:.12g}")


def dumps(payload) -> str:
    """Compact JSON with 12-significant-digit floats and stable key order."""

    def fix(obj):
        if isinstance(obj, float):
            return sig12(obj) if math.isfinite(obj) else obj
        if isinstance(obj, dict):
            return {k: fix(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [fix(v) for v in obj]
        return obj

    return json.dumps(fix(payload), separators=(",", ":"))


# --- imbalance study ----------------------------------------------------


@dataclass(frozen=True)
class StudyConfig:
    n_voters: int = 10
    p: float = 0.7
    trials: int = 400
    seed: int = 0
    weight_grid: int = 10**6
    csv_path: str | None = None
    json_path: str | None = None
    standardized_theil: bool = False

    def __post_init__(self):
        if _as_int(self.trials, "trials") < 1:
            raise ValidationError("trials must be >= 1")
        if _as_int(self.weight_grid, "weight_grid") < 2:
            raise ValidationError("weight_grid must be >= 2")
        if not 1 <= _as_int(self.n_voters, "n_voters") <= ENUM_CAP:
            raise ValidationError(f"n_voters must be in [1, {ENUM_CAP}]")
        if _as_int(self.seed, "seed") < 0:
            raise ValidationError("seed must be non-negative")
        object.__setattr__(self, "p", check_probability(self.p))


@dataclass(frozen=True)
class StudyRecord:
    trial: int
    grid_weights: tuple[int, ...]
    weights: tuple[float, ...]
    gini: float
    variance: float
    theil: float
    hoover: float
    p_win: float

    def csv_row(self) -> list[str]:
        return [
            str(self.trial),
            ";".join(str(w) for w in self.grid_weights),
            *(f"{getattr(self, k):.12g}" for k in MEASURES),
            f"{self.p_win:.12g}",
        ]


@dataclass(frozen=True)
class ImbalanceStudy:
    config: StudyConfig
    records: tuple[StudyRecord, ...]
    correlations: dict[str, float]

    def summary(self) -> dict:
        c = self.config
        return {
            "n": c.n_voters,
            "p": c.p,
            "trials": c.trials,
            "seed": c.seed,
            "correlations": {k: self.correlations[k] for k in MEASURES},
        }


def sample_study_record(config: StudyConfig, trial: int) -> StudyRecord:
    rng = block_generator(config.seed, trial)
    grid = tuple(int(v) for v in rng.integers(1, config.weight_grid, size=config.n_voters, endpoint=True))
    reals = tuple(g / config.weight_grid for g in grid)
    m = imbalance_measures(reals, standardized_theil=config.standardized_theil)
    return StudyRecord(
        trial=trial,
        grid_weights=grid,
        weights=reals,
        gini=m.gini,
        variance=m.variance,
        theil=m.theil,
        hoover=m.hoover,
        p_win=win_probability_enum(grid, config.p),
    )


def sample_study_records(config: StudyConfig) -> list[StudyRecord]:
    return [sample_study_record(config, t) for t in range(config.trials)]


def study_correlations(records) -> dict[str, float]:
    probs = [r.p_win for r in records]
    return {k: pearson([getattr(r, k) for r in records], probs) for k in MEASURES}


def write_study_csv(records, out) -> None:
    """Write study records to a path or a text stream."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_study_csv(records, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(STUDY_HEADER)
    for r in records:
        writer.writerow(r.csv_row())


def study_csv_text(records) -> str:
    buf = io.StringIO()
    write_study_csv(records, buf)
    return buf.getvalue()


def run_imbalance_study(config: StudyConfig) -> ImbalanceStudy:
    """Sample ``trials`` weight vectors, score them and correlate with P(A wins).

    Weights are uniform on ``{1..grid}/grid``; the exact win probability uses
    the integer grid values while the indices use the real values.  Raises
    :class:`UndefinedCorrelationError` when a correlation is undefined (one
    trial, or constant probabilities such as ``p = 0.5``).
    """
    records = sample_study_records(config)
    if config.csv_path:
        write_study_csv(records, config.csv_path)
    study = ImbalanceStudy(config, tuple(records), study_correlations(records))
    if config.json_path:
        Path(config.json_path).write_text(dumps(study.summary()) + "\n")
    return study


# --- convergence studies ------------------------------------------------


@dataclass(frozen=True)
class ConvergenceSeries:
    points: tuple[tuple[float, float], ...]
    target: float

    @property
    def xs(self) -> list[float]:
        return [x for x, _ in self.points]

    @property
    def probabilities(self) -> list[float]:
        return [y for _, y in self.points]

    def gaps(self) -> list[float]:
        return [abs(y - self.target) for _, y in self.points]

    def csv_text(self) -> str:
        lines = ["x,probability,target"]
        for x, y in self.points:
            lines.append(f"{x:.12g},{y:.12g},{self.target:.12g}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        Path(path).write_text(self.csv_text())


def run_convergence_study(voters, p, m_grid=DEFAULT_M_GRID) -> ConvergenceSeries:
    """Win probability as the number of unit-weight delegators grows.

    The target is the equal-weight closed form; convergence is only
    established for an odd number of voters, so even counts are rejected.
    """
    w = as_weight_vector(voters)
    p = check_probability(p)
    if w.n % 2 == 0:
        raise ValidationError(
            f"convergence study needs an odd number of voters (got {w.n}); "
            "with even n a subset can hold exactly half the voters and the limit is not established"
        )
    grid = [_as_int(m, "m") for m in m_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("m_grid must be strictly increasing")
    points = tuple((m, equalweight_delegation_probability(w, m, p)) for m in grid)
    return ConvergenceSeries(points, ew_win_probability(w.n, p))


def run_p_limit_study(voters, delegators, p_grid=DEFAULT_P_GRID) -> ConvergenceSeries:
    """Post-delegation win probability across ``p``; tends to 1 as p -> 1."""
    points = tuple(
        (check_probability(p), post_delegation_win_probability(DelegationScenario(voters, delegators, p)))
        for p in p_grid
    )
    return ConvergenceSeries(points, 1.0)


# --- inequality sweeps ---------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    dw_scenarios: int = 200
    ew_scenarios: int = 200
    max_n: int = 6
    max_m: int = 4
    max_weight: int = 20
    ps: tuple[float, ...] = (0.6, 0.7, 0.9)
    seed: int = 0
    tolerance: float = 1e-10
    claim_ns: tuple[int, ...] = (11, 51, 101)
    claim_p: float = 0.7

    def __post_init__(self):
        if self.max_n < 2 or self.max_m < 1 or self.max_weight < 2:
            raise ValidationError("sweep needs max_n >= 2, max_m >= 1, max_weight >= 2")
        if any(check_probability(p) <= 0.5 for p in (*self.ps, self.claim_p)):
            raise ValidationError("inequality sweeps require p > 0.5")


@dataclass(frozen=True)
class ClaimResult:
    n: int
    p: float
    delegator_weight: int
    conventional: float
    post_delegation: float
    gap: float
    ceiling: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SweepReport:
    dw_checked: int = 0
    ew_checked: int = 0
    violations: list[dict] = field(default_factory=list)
    claims: list[ClaimResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "dw_checked": self.dw_checked,
            "ew_checked": self.ew_checked,
            "violations": self.violations,
            "claims": [c.to_dict() for c in self.claims],
        }


def claim_gap(n: int, p, delegator_weight: int | None = None) -> ClaimResult:
    """One heavy delegator against ``n`` unit-weight voters.

    The delegator's weight defaults to the smallest that makes its
    recipient dominant.  Conventional voting follows the equal-weight
    closed form; after delegation the recipient decides alone.
    """
    voters = (1,) * n
    p = check_probability(p)
    if delegator_weight is None:
        (delegator_weight,) = adversarial_delegator_weights(voters, 1)
    conventional = ew_win_probability(n, p)
    post = post_delegation_win_probability(DelegationScenario(voters, (delegator_weight,), p))
    return ClaimResult(n, p, delegator_weight, conventional, post, conventional - post, 1.0 - p)


def random_dw_scenario(rng: np.random.Generator, cfg: SweepConfig) -> DelegationScenario:
    n = int(rng.integers(2, cfg.max_n + 1))
    dominant = int(rng.integers(1, cfg.max_weight + 1))
    rest = rng.multinomial(int(rng.integers(0, dominant)), [1.0 / (n - 1)] * (n - 1)).tolist()
    rest.insert(int(rng.integers(0, n)), dominant)
    m = int(rng.integers(1, cfg.max_m + 1))
    delegators = rng.integers(1, cfg.max_weight + 1, size=m).tolist()
    return DelegationScenario(rest, delegators, float(rng.choice(cfg.ps)))


def random_ew_scenario(rng: np.random.Generator, cfg: SweepConfig) -> DelegationScenario:
    n = int(rng.integers(2, cfg.max_n + 1))
    weight = int(rng.integers(1, cfg.max_weight + 1))
    m = int(rng.integers(1, cfg.max_m + 1))
    delegators = rng.integers(1, cfg.max_weight + 1, size=m).tolist()
    return DelegationScenario((weight,) * n, delegators, float(rng.choice(cfg.ps)))


_EW_STREAM_OFFSET = 1 << 32


def run_theorem_sweep(cfg: SweepConfig = SweepConfig()) -> SweepReport:
    """Check both delegation inequalities on random scenarios and tabulate the claim gap.

    Dominant-weight voters: post-delegation P(A) >= p.  Equal-weight voters:
    post-delegation P(A) <= the equal-weight closed form.  Each violation is
    recorded with its serialized scenario.
    """
    report = SweepReport()
    for i in range(cfg.dw_scenarios):
        s = random_dw_scenario(block_generator(cfg.seed, i), cfg)
        post = post_delegation_win_probability(s, method="enum")
        bound = dw_win_probability(s.p)
        report.dw_checked += 1
        if post < bound - cfg.tolerance:
            report.violations.append(
                {"kind": "dominant_weight", "scenario": s.to_dict(), "post_delegation": post, "bound": bound}
            )
    for i in range(cfg.ew_scenarios):
        s = random_ew_scenario(block_generator(cfg.seed, _EW_STREAM_OFFSET + i), cfg)
        post = post_delegation_win_probability(s, method="enum")
        bound = ew_win_probability(s.n, s.p)
        report.ew_checked += 1
        if post > bound + cfg.tolerance:
            report.violations.append(
                {"kind": "equal_weight", "scenario": s.to_dict(), "post_delegation": post, "bound": bound}
            )
    report.claims = [claim_gap(n, cfg.claim_p) for n in cfg.claim_ns]
    return report
