"""Decision-layer tests: factor score, constraint clauses, fail-safe
extraction, decision priority, and the utility log."""

import pytest

from v2xsustain import (
    CONTINUE,
    RECONFIGURE,
    UPDATE_KEYS,
    FactorBounds,
    FactorInputs,
    FailSafeReport,
    NetworkParams,
    RateParams,
    Thresholds,
    TimeWindow,
    UtilityLog,
    check_constraints,
    combine_factors,
    decide,
    factor_score,
    failsafe_point,
)
from v2xsustain.errors import DomainError, OrderingError

NET = NetworkParams(N=10, E=10, E_zero=10, n_inv=5, Q=1)
RATES = RateParams(alpha=1.0, beta=2.0)
WINDOW = TimeWindow(t1=5.0, t2=105.0, T=110.0)
TH = Thresholds(S_N_TH=50.0, M_O_TH=1000.0)


def test_combine_factors():
    assert combine_factors([0.2, 0.4, 0.6], [1.0, 1.0, 1.0]) == pytest.approx(0.4)
    assert combine_factors([1.0, 0.0], [3.0, 1.0]) == pytest.approx(0.75)
    assert combine_factors([2.0], [1.0]) == 1.0  # clamped
    with pytest.raises(DomainError):
        combine_factors([], [])
    with pytest.raises(DomainError):
        combine_factors([0.1] * 4, [1.0] * 4)
    with pytest.raises(DomainError):
        combine_factors([0.1, 0.2], [1.0])
    with pytest.raises(DomainError):
        combine_factors([0.1], [0.0])


def test_factor_score_extremes():
    assert factor_score(FactorInputs()) == 0.0
    saturated = FactorInputs(
        speed=50.0,
        location=1.0,
        last_update=3600.0,
        shared_sessions=100.0,
        refresh_rate=1.0,
        total_keys=100.0,
        zone_traversals=50.0,
        associativity=1.0,
    )
    # each group maxes out at its delta = 1/3
    assert factor_score(saturated) == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_factor_score_hand_values():
    mobility = FactorInputs(speed=25.0, location=0.5, w=1)
    assert factor_score(mobility) == pytest.approx(1.0 / 6.0, rel=1e-12)
    usage = FactorInputs(
        last_update=1800.0,
        shared_sessions=50.0,
        refresh_rate=0.5,
        total_keys=50.0,
        w=2,
    )
    # g1 = 0, g2 = (1/3)(0.5); theta-mean over two groups halves it
    assert factor_score(usage) == pytest.approx(1.0 / 12.0, rel=1e-12)


def test_factor_score_clamps_runaway_inputs():
    assert factor_score(FactorInputs(speed=5000.0, w=1)) == pytest.approx(
        1.0 / 6.0, rel=1e-12
    )
    tight = FactorBounds(speed=(0.0, 10.0))
    assert factor_score(FactorInputs(speed=25.0, w=1), tight) == pytest.approx(
        1.0 / 6.0, rel=1e-12
    )


def test_factor_score_w_truncates_groups():
    inputs = FactorInputs(zone_traversals=50.0, associativity=1.0, w=2)
    assert factor_score(inputs) == 0.0  # zone group excluded
    full = FactorInputs(zone_traversals=50.0, associativity=1.0, w=3)
    assert factor_score(full) == pytest.approx(1.0 / 9.0, rel=1e-12)


def test_factor_inputs_validation():
    with pytest.raises(DomainError):
        FactorInputs(location=1.5)
    with pytest.raises(DomainError):
        FactorInputs(speed=-1.0)
    with pytest.raises(DomainError):
        FactorInputs(deltas=(0.5, 0.5, 0.5))
    with pytest.raises(DomainError):
        FactorInputs(deltas=(0.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        FactorInputs(thetas=(1.0, 1.0, 1.5))
    with pytest.raises(DomainError):
        FactorInputs(w=0)
    with pytest.raises(DomainError):
        FactorBounds(speed=(10.0, 10.0))


def test_thresholds_validation():
    with pytest.raises(DomainError):
        Thresholds(S_N_TH=0.0, M_O_TH=1.0)
    with pytest.raises(DomainError):
        Thresholds(S_N_TH=1.0, M_O_TH=-1.0)
    with pytest.raises(DomainError):
        Thresholds(S_N_TH=1.0, M_O_TH=1.0, U_prime_N=0)
    with pytest.raises(DomainError):
        Thresholds(S_N_TH=1.0, M_O_TH=1.0, O_b=0.0)


def test_check_constraints_admissible_defaults():
    assert check_constraints(NET, RATES, WINDOW, U_k=1.0, D=10.0, thresholds=TH) == []


@pytest.mark.parametrize(
    "name,kwargs",
    [
        ("U_k >= U'_N", {"U_k": 0.0}),
        ("0 < D <= N", {"D": 11.0}),
        ("0 < D <= N", {"D": 0.0}),
        (
            "0 < n_inv(n_inv-1)/2 <= E(E-1)/2",
            {"net": NetworkParams(N=10, E=10, E_zero=10, n_inv=20)},
        ),
        (
            "0 < n_inv(n_inv-1)/2 <= E(E-1)/2",
            {"net": NetworkParams(N=10, E=10, E_zero=10, n_inv=1)},
        ),
        ("n_inv != E", {"net": NetworkParams(N=10, E=10, E_zero=10, n_inv=10)}),
        (
            "t_use < t_min_hold",
            {"window": TimeWindow(t1=5.0, t2=105.0, T=110.0, t_use=120.0)},
        ),
    ],
)
def test_check_constraints_single_clause(name, kwargs):
    args = {
        "net": NET,
        "rates": RATES,
        "window": WINDOW,
        "U_k": 1.0,
        "D": 10.0,
        "thresholds": TH,
    }
    args.update(kwargs)
    violations = check_constraints(**args)
    assert len(violations) == 1
    assert violations[0].constraint == name


def test_check_constraints_multiple():
    bad_net = NetworkParams(N=10, E=10, E_zero=10, n_inv=10)
    violations = check_constraints(bad_net, RATES, WINDOW, U_k=0.0, D=0.0, thresholds=TH)
    names = {v.constraint for v in violations}
    assert names == {"U_k >= U'_N", "0 < D <= N", "n_inv != E"}


def test_failsafe_point_prefix_end():
    trace = [(1.0, 10.0, 0.0), (2.0, 8.0, 0.0), (3.0, 6.0, 0.0), (4.0, 4.0, 0.0)]
    th = Thresholds(S_N_TH=5.0, M_O_TH=1000.0)
    report = failsafe_point(trace, th)
    assert report.F_S == 3.0
    assert report.decision == UPDATE_KEYS
    assert "breach follows" in report.rationale


def test_failsafe_point_whole_window():
    trace = [(1.0, 10.0, 0.0), (2.0, 8.0, 0.0)]
    report = failsafe_point(trace, Thresholds(S_N_TH=5.0, M_O_TH=1.0))
    assert report.F_S == 2.0
    assert report.decision == CONTINUE
    assert "entire window safe" in report.rationale
    # threshold equality counts as safe
    eq = failsafe_point([(1.0, 5.0, 0.0)], Thresholds(S_N_TH=5.0, M_O_TH=1.0))
    assert eq.F_S == 1.0 and eq.decision == CONTINUE


def test_failsafe_point_no_safe_prefix():
    report = failsafe_point([(1.0, 1.0, 0.0)], Thresholds(S_N_TH=5.0, M_O_TH=1.0))
    assert report.F_S is None
    assert report.decision == UPDATE_KEYS


def test_failsafe_point_overhead_criterion():
    trace = [(1.0, 0.0, 100.0), (2.0, 0.0, 900.0), (3.0, 0.0, 1200.0)]
    report = failsafe_point(trace, TH, t1_known=False)
    assert report.F_S == 2.0
    assert report.decision == UPDATE_KEYS
    assert "M_O" in report.rationale


def test_failsafe_point_trace_validation():
    with pytest.raises(DomainError):
        failsafe_point([], TH)
    with pytest.raises(DomainError):
        failsafe_point([(1.0, 1.0, 1.0), (1.0, 1.0, 1.0)], TH)


def test_decide_scale_floor_wins():
    # even perfect metrics cannot override an inoperable scale parameter
    for mu in (2.0, 1.0, 0.5):
        report = decide(s_n=1e6, m_o=0.0, mu=mu, g_f=None, thresholds=TH)
        assert report.decision == RECONFIGURE
        assert report.tau == 0.0
    breached = decide(s_n=0.0, m_o=1e9, mu=1.0, g_f=0.9, thresholds=TH)
    assert breached.decision == RECONFIGURE


def test_decide_threshold_breaches():
    low = decide(s_n=10.0, m_o=0.0, mu=5.0, g_f=None, thresholds=TH)
    assert low.decision == UPDATE_KEYS and "S_N" in low.rationale
    high = decide(s_n=100.0, m_o=2000.0, mu=5.0, g_f=None, thresholds=TH)
    assert high.decision == UPDATE_KEYS and "M_O" in high.rationale
    both = decide(s_n=10.0, m_o=2000.0, mu=5.0, g_f=None, thresholds=TH)
    assert "S_N" in both.rationale and "M_O" in both.rationale


def test_decide_continue_with_advisory():
    report = decide(
        s_n=100.0, m_o=10.0, mu=5.0, g_f=0.25, thresholds=TH, tau=0.01, f_s=42.0
    )
    assert report.decision == CONTINUE
    assert report.tau == 0.01 and report.F_S == 42.0
    assert "G_f=0.250" in report.rationale


def test_failsafe_report_validation():
    with pytest.raises(DomainError):
        FailSafeReport(F_S=None, tau=None, mu=None, decision="panic", rationale="")
    with pytest.raises(DomainError):
        FailSafeReport(F_S=None, tau=None, mu=1.5, decision=CONTINUE, rationale="")
    FailSafeReport(F_S=None, tau=None, mu=1.5, decision=RECONFIGURE, rationale="")


def test_utility_log_ordering_and_query():
    log = UtilityLog()
    log.append(1.0, 80.0, 10.0, 5.0, 0.1, CONTINUE)
    log.append(2.0, 40.0, 10.0, 5.0, None, UPDATE_KEYS)
    log.append(2.0, 40.0, 10.0, None, None, UPDATE_KEYS)  # ties allowed
    log.append(3.0, 40.0, 10.0, 1.0, None, RECONFIGURE)
    with pytest.raises(OrderingError):
        log.append(2.5, 1.0, 1.0, None, None, CONTINUE)
    with pytest.raises(DomainError):
        log.append(9.0, 1.0, 1.0, None, None, "panic")
    assert len(log.entries) == 4
    assert [e.timestamp_s for e in log.query(t_lo=2.0, t_hi=2.0)] == [2.0, 2.0]
    assert [e.decision for e in log.query(decision=UPDATE_KEYS)] == [UPDATE_KEYS] * 2
    assert log.query(t_lo=10.0) == []


def test_utility_log_export(tmp_path):
    log = UtilityLog()
    log.append(1.0, 83.083201638809925, 627.5, 5.0, None, CONTINUE)
    out = tmp_path / "log.csv"
    log.export_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "timestamp_s,S_N,M_O,mu,G_f,decision"
    assert lines[1] == "1,83.0832016,627.5,5,,continue"
