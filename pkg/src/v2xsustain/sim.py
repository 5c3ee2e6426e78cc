"""Continuous-time Monte Carlo oracle for the analytical model.

Vehicles arrive as a Poisson stream (rate beta) on top of an initial
cohort, stay for exponential lifetimes (rate gamma'), refresh their key
pair as a per-vehicle Poisson process (rate alpha, one event refreshes
both keys of the pair), and spend Q authentication passes per session
establishment. Every random draw comes from one of four seed-split
streams (arrivals, lifetimes, updates, positions) so changing one rate
never perturbs another stream's draws.

Slot metrics use the (previous boundary, boundary] convention; the
initial cohort's t = 0 passes therefore belong to the event totals but to
no slot. Empirical sustainability is computed directly from the defining
ratio, without the model-side admissibility guard D <= N, because the
observed in-range count is an output here, not a constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .csvio import write_csv
from .decision import Thresholds, check_constraints
from .errors import DomainError, SimulationTruncated
from .keychain import build_hierarchy, establish_session
from .sustain import (
    NetworkParams,
    RangeParams,
    RateParams,
    TimeWindow,
    loss_probability_model,
    sustainability_window,
)

KIND_ARRIVAL = "arrival"
KIND_DEPARTURE = "departure"
KIND_KEY_UPDATE = "key_update"
KIND_AUTH_PASS = "auth_pass"
_KIND_ORDER = {KIND_ARRIVAL: 0, KIND_AUTH_PASS: 1, KIND_KEY_UPDATE: 2, KIND_DEPARTURE: 3}


class Event(NamedTuple):
    t_s: float
    kind: str
    entity_id: int


@dataclass(frozen=True)
class Scenario:
    net: NetworkParams
    rates: RateParams
    window: TimeWindow
    range_params: RangeParams
    thresholds: Thresholds
    seed: int
    event_cap: int = 2_000_000
    count_reauth_passes: bool = True
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not isinstance(self.event_cap, int) or self.event_cap < 1:
            raise DomainError(f"event_cap must be positive, got {self.event_cap!r}")


@dataclass(frozen=True)
class SlotMetrics:
    t_s: float
    active: int
    E_prime: int
    P_empirical: float
    U_k: int
    D: int
    passes: int
    S_N_emp: float | None
    M_O_emp: float | None
    cohort_fraction: float | None


@dataclass
class SimTrace:
    scenario: Scenario
    seed: int
    events: list[Event]
    slots: list[SlotMetrics]
    arrivals_total: int = 0
    poisson_arrivals: int = 0
    cohort_size: int = 0
    departures_total: int = 0
    key_updates_total: int = 0
    passes_total: int = 0

    def export_events_csv(self, path: str | Path) -> None:
        write_csv(path, ("t_s", "kind", "entity_id"), self.events)

    def export_metrics_csv(self, path: str | Path) -> None:
        write_csv(
            path,
            ("t_s", "E_active", "P_empirical", "U_k", "D", "passes",
             "S_N_emp", "M_O_emp"),
            [
                (s.t_s, s.E_prime, s.P_empirical, s.U_k, s.D, s.passes,
                 s.S_N_emp, s.M_O_emp)
                for s in self.slots
            ],
        )


def _slot_boundaries(window: TimeWindow) -> list[float]:
    out = []
    k = 1
    while True:
        b = k * window.t_x_step
        if b > window.T * (1.0 + 1e-12):
            break
        out.append(b)
        k += 1
    return out


def run_simulation(
    scenario: Scenario,
    position_sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
) -> SimTrace:
    """Simulate [0, T] and extract per-slot empirical metrics.

    position_sampler(rng, n) may replace the default uniform-in-range
    placement; positions falling outside [r1, r2] simply do not count
    toward the in-range total D.

    Raises SimulationTruncated (carrying the partial trace) if the event
    count exceeds the scenario's cap.
    """
    net, rates, window = scenario.net, scenario.rates, scenario.window
    rp = scenario.range_params
    violations = check_constraints(
        net, rates, window,
        U_k=scenario.thresholds.U_prime_N, D=net.N, thresholds=scenario.thresholds,
    )
    if violations:
        names = ", ".join(v.constraint for v in violations)
        raise DomainError(f"scenario fails constraint check: {names}")

    ss = np.random.SeedSequence(scenario.seed)
    s_arr, s_life, s_upd, s_pos, s_keys = ss.spawn(5)
    rng_arr = np.random.default_rng(s_arr)
    rng_life = np.random.default_rng(s_life)
    rng_upd = np.random.default_rng(s_upd)
    rng_pos = np.random.default_rng(s_pos)
    rng_keys = np.random.default_rng(s_keys)

    root = bytes(rng_keys.integers(1, 256, size=32, dtype=np.uint8))
    hierarchy = build_hierarchy(root)

    T = window.T
    arrive_times: list[float] = [0.0] * net.E_zero
    t = 0.0
    while True:
        t += rng_arr.exponential(1.0 / rates.beta)
        if t > T:
            break
        arrive_times.append(t)
    n = len(arrive_times)

    if rates.gamma_prime > 0.0:
        lifetimes = rng_life.exponential(1.0 / rates.gamma_prime, size=n)
    else:
        lifetimes = np.full(n, np.inf)
    arrive = np.asarray(arrive_times)
    depart = arrive + lifetimes
    if position_sampler is None:
        positions = rng_pos.uniform(rp.r1, rp.r2, size=n)
    else:
        positions = np.asarray(position_sampler(rng_pos, n), dtype=float)
        if positions.shape != (n,):
            raise DomainError(
                f"position sampler must return {n} positions, got {positions.shape}"
            )

    events: list[Event] = []
    update_times: list[float] = []
    pass_times: list[float] = []

    def emit(t_ev: float, kind: str, entity: int) -> None:
        events.append(Event(t_ev, kind, entity))
        if len(events) > scenario.event_cap:
            events.sort(key=lambda e: (e.t_s, _KIND_ORDER[e.kind], e.entity_id))
            partial = SimTrace(
                scenario=scenario, seed=scenario.seed, events=events, slots=[],
            )
            raise SimulationTruncated(
                f"event cap {scenario.event_cap} exceeded", partial
            )

    for i in range(n):
        t_in = float(arrive[i])
        t_out = float(depart[i])
        emit(t_in, KIND_ARRIVAL, i)
        establish_session(hierarchy, "short_range", f"veh{i}", net.Q, at=t_in)
        for _ in range(net.Q):
            pass_times.append(t_in)
            emit(t_in, KIND_AUTH_PASS, i)
        if t_out <= T:
            emit(t_out, KIND_DEPARTURE, i)
        if rates.alpha > 0.0:
            horizon = min(t_out, T)
            u = t_in
            while True:
                u += float(rng_upd.exponential(1.0 / rates.alpha))
                if u > horizon:
                    break
                update_times.append(u)
                emit(u, KIND_KEY_UPDATE, i)
                if scenario.count_reauth_passes:
                    for _ in range(net.Q):
                        pass_times.append(u)
                        emit(u, KIND_AUTH_PASS, i)

    events.sort(key=lambda e: (e.t_s, _KIND_ORDER[e.kind], e.entity_id))

    depart_sorted = np.sort(depart)
    cohort_depart_sorted = np.sort(depart[: net.E_zero]) if net.E_zero else None
    update_arr = np.sort(np.asarray(update_times)) if update_times else np.empty(0)
    pass_arr = np.sort(np.asarray(pass_times)) if pass_times else np.empty(0)
    in_range = (positions >= rp.r1) & (positions <= rp.r2)

    slots: list[SlotMetrics] = []
    prev = 0.0
    for b in _slot_boundaries(window):
        arrived = int(np.searchsorted(arrive, b, side="right"))
        departed = int(np.searchsorted(depart_sorted, b, side="right"))
        active = arrived - departed
        e_prime = min(active, net.E)
        p_emp = 1.0 - e_prime / net.E
        u_k = int(
            np.searchsorted(update_arr, b, side="right")
            - np.searchsorted(update_arr, prev, side="right")
        )
        passes = int(
            np.searchsorted(pass_arr, b, side="right")
            - np.searchsorted(pass_arr, prev, side="right")
        )
        alive_mask = (arrive <= b) & (depart > b)
        d_count = int(np.count_nonzero(alive_mask & in_range))
        s_n = None
        m_o = None
        if d_count > 0 and p_emp > 0.0:
            s_n = (u_k / net.n_inv) / (d_count * p_emp * net.Q)
        if p_emp > 0.0:
            m_o = passes * (1.0 - p_emp) / (net.E * p_emp)
        cohort_frac = None
        if net.E_zero:
            still = net.E_zero - int(
                np.searchsorted(cohort_depart_sorted, b, side="right")
            )
            cohort_frac = still / net.E_zero
        slots.append(
            SlotMetrics(
                t_s=b, active=active, E_prime=e_prime, P_empirical=p_emp,
                U_k=u_k, D=d_count, passes=passes, S_N_emp=s_n, M_O_emp=m_o,
                cohort_fraction=cohort_frac,
            )
        )
        prev = b

    return SimTrace(
        scenario=scenario,
        seed=scenario.seed,
        events=events,
        slots=slots,
        arrivals_total=n,
        poisson_arrivals=n - net.E_zero,
        cohort_size=net.E_zero,
        departures_total=sum(1 for e in events if e.kind == KIND_DEPARTURE),
        key_updates_total=len(update_times),
        passes_total=len(pass_times),
    )


@dataclass(frozen=True)
class SlotComparison:
    t_s: float
    S_N_emp: float | None
    S_N_model: float | None
    S_N_rel_dev: float | None
    P_emp: float
    P_model: float
    P_abs_dev: float
    survivor_emp: float | None
    survivor_model: float | None
    survivor_abs_dev: float | None


@dataclass
class ComparisonReport:
    rows: list[SlotComparison]
    p_model: float
    survivor_mad: float | None
    passes_observed: int
    passes_expected: int
    pass_identity_ok: bool
    s_n_mean_rel_dev: float | None = None

    def export_csv(self, path: str | Path) -> None:
        write_csv(
            path,
            ("t_s", "S_N_emp", "S_N_model", "S_N_rel_dev", "P_emp", "P_model",
             "P_abs_dev", "survivor_emp", "survivor_model", "survivor_abs_dev"),
            [
                (r.t_s, r.S_N_emp, r.S_N_model, r.S_N_rel_dev, r.P_emp,
                 r.P_model, r.P_abs_dev, r.survivor_emp, r.survivor_model,
                 r.survivor_abs_dev)
                for r in self.rows
            ],
        )


def compare_to_model(trace: SimTrace, scenario: Scenario) -> ComparisonReport:
    """Slot-by-slot empirical vs closed-form comparison.

    Model sustainability for a slot integrates the closed form over that
    slot's window; the first slot has no model value because its window
    starts at t = 0. Survivor fractions compare the initial cohort against
    exponential decay. The pass identity counts Q passes per arrival plus,
    when the scenario counts them, Q per key update.
    """
    if trace.scenario != scenario:
        raise DomainError("trace was not produced from this scenario")
    net, rates, window = scenario.net, scenario.rates, scenario.window
    p_model = loss_probability_model(net)
    model_ok = rates.alpha > 0.0 and rates.beta > rates.alpha

    rows = []
    survivor_devs = []
    s_n_devs = []
    prev = 0.0
    for slot in trace.slots:
        s_n_model = None
        s_n_rel = None
        slot_t2 = min(slot.t_s, window.T)
        if model_ok and 0.0 < prev < slot_t2:
            slot_window = TimeWindow(
                t1=prev, t2=slot_t2, T=window.T, t_x_step=window.t_x_step
            )
            s_n_model = sustainability_window(rates, net, slot_window)
            if slot.S_N_emp is not None and s_n_model != 0.0:
                s_n_rel = (slot.S_N_emp - s_n_model) / abs(s_n_model)
                s_n_devs.append(abs(s_n_rel))
        survivor_model = None
        survivor_dev = None
        if slot.cohort_fraction is not None:
            survivor_model = math.exp(-rates.gamma_prime * slot.t_s)
            survivor_dev = abs(slot.cohort_fraction - survivor_model)
            survivor_devs.append(survivor_dev)
        rows.append(
            SlotComparison(
                t_s=slot.t_s,
                S_N_emp=slot.S_N_emp,
                S_N_model=s_n_model,
                S_N_rel_dev=s_n_rel,
                P_emp=slot.P_empirical,
                P_model=p_model,
                P_abs_dev=abs(slot.P_empirical - p_model),
                survivor_emp=slot.cohort_fraction,
                survivor_model=survivor_model,
                survivor_abs_dev=survivor_dev,
            )
        )
        prev = slot.t_s

    expected = net.Q * trace.arrivals_total
    if scenario.count_reauth_passes:
        expected += net.Q * trace.key_updates_total
    return ComparisonReport(
        rows=rows,
        p_model=p_model,
        survivor_mad=(sum(survivor_devs) / len(survivor_devs)) if survivor_devs else None,
        passes_observed=trace.passes_total,
        passes_expected=expected,
        pass_identity_ok=trace.passes_total == expected,
        s_n_mean_rel_dev=(sum(s_n_devs) / len(s_n_devs)) if s_n_devs else None,
    )
