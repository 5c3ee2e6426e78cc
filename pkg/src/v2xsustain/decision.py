"""Operational decision layer: constraint checks, factor score, fail-safe
extraction, and the utility log.

The decision order is fixed: a scale parameter at or below the operability
floor forces reconfiguration no matter what else holds; otherwise threshold
breaches demand key updates; otherwise the network continues. The factor
score G_f is advisory context attached to the rationale, never the decider.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .csvio import write_csv
from .errors import DomainError, OrderingError
from .predict import SCALE_FLOOR
from .sustain import NetworkParams, RateParams, TimeWindow

CONTINUE = "continue"
UPDATE_KEYS = "update_keys"
RECONFIGURE = "reconfigure"
DECISIONS = frozenset({CONTINUE, UPDATE_KEYS, RECONFIGURE})


@dataclass(frozen=True)
class FactorInputs:
    """Raw vehicle observables feeding the factorized score.

    speed in m/s, location and associativity already normalized to [0,1],
    last_update in seconds since the last key refresh, shared_sessions and
    total_keys as counts, refresh_rate per second, zone_traversals as a
    count. deltas are the per-group distribution constants, thetas the
    priority weights, w how many groups participate (first w of three).
    """

    speed: float = 0.0
    location: float = 0.0
    last_update: float = 0.0
    shared_sessions: float = 0.0
    refresh_rate: float = 0.0
    total_keys: float = 0.0
    zone_traversals: float = 0.0
    associativity: float = 0.0
    deltas: tuple[float, float, float] = (1.0 / 3, 1.0 / 3, 1.0 / 3)
    thetas: tuple[float, float, float] = (1.0, 1.0, 1.0)
    w: int = 3

    def __post_init__(self):
        for name in ("location", "associativity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must be in [0, 1], got {v!r}")
        for name in ("speed", "last_update", "shared_sessions", "refresh_rate",
                     "total_keys", "zone_traversals"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {v!r}")
        if len(self.deltas) != 3 or len(self.thetas) != 3:
            raise DomainError("deltas and thetas must have three entries")
        for d in self.deltas:
            if not 0.0 <= d <= 1.0:
                raise DomainError(f"delta must be in [0, 1], got {d!r}")
        if not 0.0 < sum(self.deltas) <= 1.0:
            raise DomainError(
                f"delta sum must be in (0, 1], got {sum(self.deltas)!r}"
            )
        for t in self.thetas:
            if not 0.0 <= t <= 1.0 or not math.isfinite(t):
                raise DomainError(f"theta must be in [0, 1], got {t!r}")
        if not isinstance(self.w, int) or not 1 <= self.w <= 3:
            raise DomainError(f"w must be an integer in [1, 3], got {self.w!r}")


@dataclass(frozen=True)
class FactorBounds:
    """Min-max normalization ranges for the unbounded observables.

    Values outside a range clamp to it, so a runaway input saturates its
    group instead of blowing up the score.
    """

    speed: tuple[float, float] = (0.0, 50.0)
    last_update: tuple[float, float] = (0.0, 3600.0)
    shared_sessions: tuple[float, float] = (0.0, 100.0)
    refresh_rate: tuple[float, float] = (0.0, 1.0)
    total_keys: tuple[float, float] = (0.0, 100.0)
    zone_traversals: tuple[float, float] = (0.0, 50.0)

    def __post_init__(self):
        for name in ("speed", "last_update", "shared_sessions", "refresh_rate",
                     "total_keys", "zone_traversals"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise DomainError(f"{name} bounds must satisfy hi > lo, got ({lo!r}, {hi!r})")


DEFAULT_BOUNDS = FactorBounds()


def _norm(value: float, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


def combine_factors(g: Sequence[float], thetas: Sequence[float]) -> float:
    """Priority-weighted mean of group scores, clamped to [0, 1]."""
    if len(g) == 0 or len(g) > 3:
        raise DomainError(f"between 1 and 3 group scores expected, got {len(g)}")
    if len(g) != len(thetas):
        raise DomainError("g and thetas must have equal length")
    total = sum(thetas)
    if total <= 0.0:
        raise DomainError("theta sum must be positive")
    score = sum(gi * ti for gi, ti in zip(g, thetas)) / total
    return min(1.0, max(0.0, score))


def factor_score(inputs: FactorInputs, bounds: FactorBounds = DEFAULT_BOUNDS) -> float:
    """Factorized decision score G_f in [0, 1].

    Three groups: mobility (speed, location), key usage (last update age,
    shared sessions, refresh rate, total keys), and zone behavior
    (traversals, associativity). Each group is the arithmetic mean of its
    min-max normalized members scaled by its delta; the first w groups are
    combined by theta-weighted mean.
    """
    g1 = inputs.deltas[0] * (
        (_norm(inputs.speed, bounds.speed) + inputs.location) / 2.0
    )
    g2 = inputs.deltas[1] * (
        (
            _norm(inputs.last_update, bounds.last_update)
            + _norm(inputs.shared_sessions, bounds.shared_sessions)
            + _norm(inputs.refresh_rate, bounds.refresh_rate)
            + _norm(inputs.total_keys, bounds.total_keys)
        )
        / 4.0
    )
    g3 = inputs.deltas[2] * (
        (_norm(inputs.zone_traversals, bounds.zone_traversals) + inputs.associativity)
        / 2.0
    )
    groups = (g1, g2, g3)[: inputs.w]
    return combine_factors(groups, inputs.thetas[: inputs.w])


@dataclass(frozen=True)
class Thresholds:
    """Operating thresholds: sustainability floor, overhead ceiling,
    mandatory update quota, and initial-authentication overhead."""

    S_N_TH: float
    M_O_TH: float
    U_prime_N: int = 1
    O_b: float = 1.0

    def __post_init__(self):
        if not self.S_N_TH > 0.0:
            raise DomainError(f"S_N_TH must be positive, got {self.S_N_TH!r}")
        if not self.M_O_TH > 0.0:
            raise DomainError(f"M_O_TH must be positive, got {self.M_O_TH!r}")
        if not isinstance(self.U_prime_N, int) or self.U_prime_N < 1:
            raise DomainError(
                f"U_prime_N must be a positive integer, got {self.U_prime_N!r}"
            )
        if not self.O_b > 0.0:
            raise DomainError(f"O_b must be positive, got {self.O_b!r}")


class Violation(NamedTuple):
    constraint: str
    detail: str


def check_constraints(
    net: NetworkParams,
    rates: RateParams,
    window: TimeWindow,
    U_k: float,
    D: float,
    thresholds: Thresholds,
) -> list[Violation]:
    """Evaluate the optimization constraints; violations come back as data.

    Five named clauses: the update quota U_k >= U'_N, the in-range count
    0 < D <= N, the hop-pair bound 0 < n_inv(n_inv - 1)/2 <= E(E - 1)/2,
    the hop/capacity distinctness n_inv != E, and the key-use timing
    t_use < t_min_hold (reported with its slack). An empty list means the
    configuration is admissible.
    """
    del rates  # rate positivity is structural, enforced by RateParams itself
    violations = []
    if U_k < thresholds.U_prime_N:
        violations.append(
            Violation(
                "U_k >= U'_N",
                f"update count {U_k!r} is below the quota {thresholds.U_prime_N!r}",
            )
        )
    if not 0.0 < D <= net.N:
        violations.append(
            Violation("0 < D <= N", f"in-range count {D!r} outside (0, {net.N}]")
        )
    pairs = net.n_inv * (net.n_inv - 1) / 2
    cap_pairs = net.E * (net.E - 1) / 2
    if not 0.0 < pairs <= cap_pairs:
        violations.append(
            Violation(
                "0 < n_inv(n_inv-1)/2 <= E(E-1)/2",
                f"hop pairs {pairs!r} outside (0, {cap_pairs!r}]",
            )
        )
    if net.n_inv == net.E:
        violations.append(
            Violation("n_inv != E", f"hop count equals capacity ({net.E!r})")
        )
    slack = window.t_min_hold - window.t_use
    if not slack > 0.0:
        violations.append(
            Violation(
                "t_use < t_min_hold",
                f"key in use {window.t_use!r}s with hold floor "
                f"{window.t_min_hold!r}s (slack {slack!r}s)",
            )
        )
    return violations


@dataclass(frozen=True)
class FailSafeReport:
    """Outcome of a fail-safe evaluation.

    F_S is the end of the maximal safe prefix (absent when the first
    sample already breaches), tau and mu the likelihood context when
    known, decision one of continue/update_keys/reconfigure.
    """

    F_S: float | None
    tau: float | None
    mu: float | None
    decision: str
    rationale: str

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise DomainError(f"unknown decision {self.decision!r}")
        if self.mu is not None and self.mu <= SCALE_FLOOR and self.decision != RECONFIGURE:
            raise DomainError(
                f"mu={self.mu!r} at or below {SCALE_FLOOR} requires reconfigure"
            )


def failsafe_point(
    trace: Sequence[tuple[float, float, float]],
    thresholds: Thresholds,
    t1_known: bool = True,
) -> FailSafeReport:
    """Fail-safe instant from a metric trace of (t, S_N, M_O) samples.

    With t1 known the criterion is S_N >= S_N_TH; otherwise M_O <= M_O_TH.
    F_S is the time of the last sample in the initial run of satisfying
    samples (a duration, not just any qualifying instant). Equality with
    the threshold counts as safe.
    """
    if len(trace) == 0:
        raise DomainError("trace must be nonempty")
    last_t = None
    for t, _, _ in trace:
        if last_t is not None and t <= last_t:
            raise DomainError(f"trace times must be strictly increasing at t={t!r}")
        last_t = t
    f_s = None
    for t, s_n, m_o in trace:
        ok = s_n >= thresholds.S_N_TH if t1_known else m_o <= thresholds.M_O_TH
        if not ok:
            break
        f_s = t
    criterion = "S_N >= threshold" if t1_known else "M_O <= threshold"
    if f_s is None:
        return FailSafeReport(
            F_S=None,
            tau=None,
            mu=None,
            decision=UPDATE_KEYS,
            rationale=f"no safe prefix under {criterion}; keys need updating",
        )
    whole = f_s == trace[-1][0]
    return FailSafeReport(
        F_S=f_s,
        tau=None,
        mu=None,
        decision=CONTINUE if whole else UPDATE_KEYS,
        rationale=(
            f"safe prefix under {criterion} ends at t={f_s:g}s"
            + ("; entire window safe" if whole else "; breach follows")
        ),
    )


def decide(
    s_n: float,
    m_o: float,
    mu: float,
    g_f: float | None,
    thresholds: Thresholds,
    tau: float | None = None,
    f_s: float | None = None,
) -> FailSafeReport:
    """Operational decision from current metrics.

    Reconfiguration wins whenever mu is at or below the operability floor;
    then threshold breaches force key updates; otherwise continue. The
    factor score only annotates the rationale.
    """
    advisory = f"; advisory G_f={g_f:.3f}" if g_f is not None else ""
    if mu <= SCALE_FLOOR:
        return FailSafeReport(
            F_S=f_s,
            tau=0.0 if tau is None else tau,
            mu=mu,
            decision=RECONFIGURE,
            rationale=f"scale parameter {mu:g} at or below {SCALE_FLOOR:g}: "
            f"network not operable without reconfiguration{advisory}",
        )
    if s_n < thresholds.S_N_TH or m_o > thresholds.M_O_TH:
        breaches = []
        if s_n < thresholds.S_N_TH:
            breaches.append(f"S_N {s_n:g} < {thresholds.S_N_TH:g}")
        if m_o > thresholds.M_O_TH:
            breaches.append(f"M_O {m_o:g} > {thresholds.M_O_TH:g}")
        return FailSafeReport(
            F_S=f_s,
            tau=tau,
            mu=mu,
            decision=UPDATE_KEYS,
            rationale="; ".join(breaches) + advisory,
        )
    return FailSafeReport(
        F_S=f_s,
        tau=tau,
        mu=mu,
        decision=CONTINUE,
        rationale=f"S_N and M_O within thresholds{advisory}",
    )


class LogEntry(NamedTuple):
    timestamp_s: float
    S_N: float
    M_O: float
    mu: float | None
    G_f: float | None
    decision: str


@dataclass
class UtilityLog:
    """Append-only decision log, queryable by window and decision kind."""

    entries: list[LogEntry] = field(default_factory=list)

    def append(
        self,
        timestamp_s: float,
        s_n: float,
        m_o: float,
        mu: float | None,
        g_f: float | None,
        decision: str,
    ) -> LogEntry:
        if decision not in DECISIONS:
            raise DomainError(f"unknown decision {decision!r}")
        if self.entries and timestamp_s < self.entries[-1].timestamp_s:
            raise OrderingError(
                f"timestamp {timestamp_s!r} precedes last entry "
                f"{self.entries[-1].timestamp_s!r}"
            )
        entry = LogEntry(timestamp_s, s_n, m_o, mu, g_f, decision)
        self.entries.append(entry)
        return entry

    def query(
        self,
        t_lo: float | None = None,
        t_hi: float | None = None,
        decision: str | None = None,
    ) -> list[LogEntry]:
        """Entries inside the inclusive window, optionally one decision kind."""
        out = []
        for e in self.entries:
            if t_lo is not None and e.timestamp_s < t_lo:
                continue
            if t_hi is not None and e.timestamp_s > t_hi:
                continue
            if decision is not None and e.decision != decision:
                continue
            out.append(e)
        return out

    def export_csv(self, path: str | Path) -> None:
        write_csv(
            path,
            ("timestamp_s", "S_N", "M_O", "mu", "G_f", "decision"),
            self.entries,
        )
