"""Sustainability of key management under backhaul loss.

The sustainability metric counts key updates that survive hop-by-hop
delivery, normalized by the vehicles served and the passes each session
costs. Closed forms below come from integrating Poisson arrival and
key-update densities over an observation window; each one has a quadrature
twin used by the test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError
from .specfun import QuadSpec, expint_ei, integrate


@dataclass(frozen=True)
class NetworkParams:
    """Topology and session-count parameters.

    N: backhaul hop budget per delivery path.
    E: edge (hub) capacity in vehicles.
    E_prime: vehicles currently served, 0 <= E' <= E.
    E_zero: initially connected cohort, 0 <= E0 <= E.
    n_inv: hop count whose inverse n = 1/n_inv weighs the update count.
    Q: authentication passes per session establishment.

    Relations between n_inv and E (the hop-pair bound, n_inv != E) are
    deliberately not enforced here; they are the job of
    decision.check_constraints, which must be able to hold violating
    values as data.
    """

    N: int
    E: int
    E_prime: int = 0
    E_zero: int = 0
    n_inv: int = 5
    Q: int = 1

    def __post_init__(self):
        for name in ("N", "E", "n_inv", "Q"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        for name in ("E_prime", "E_zero"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {v!r}")
            if v > self.E:
                raise DomainError(f"{name}={v!r} exceeds capacity E={self.E!r}")


@dataclass(frozen=True)
class RateParams:
    """Process rates per unit time.

    alpha: key updates per vehicle, beta: vehicle arrivals, gamma and
    gamma_prime: incoming and outgoing connection rates. The window
    closed form additionally needs beta > alpha > 0; that is checked at
    the point of use because the asymptote and the simulator are both
    well defined without it.
    """

    alpha: float
    beta: float
    gamma: float = 0.0
    gamma_prime: float = 0.0

    def __post_init__(self):
        if not self.beta > 0.0:
            raise DomainError(f"beta must be positive, got {self.beta!r}")
        for name in ("alpha", "gamma", "gamma_prime"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class TimeWindow:
    """Observation window and key-timing bounds, in seconds.

    t1/t2 bound the integration window, T is the full observation span,
    t_x_step the reporting slot width. t_attack is the estimated time an
    adversary needs to recover a key, t_min_hold the minimum interval a
    key must be held before rotation, t_use the actual time in use.
    The ordering t_use < t_min_hold is an optimization constraint checked
    by decision.check_constraints, not a structural one, so it is not
    enforced here.
    """

    t1: float
    t2: float
    T: float
    t_x_step: float = 5.0
    t_attack: float | None = None
    t_min_hold: float | None = None
    t_use: float | None = None
    U_prime_N: int = 1

    def __post_init__(self):
        if not 0.0 < self.t1 < self.t2:
            raise DomainError(
                f"window requires 0 < t1 < t2, got t1={self.t1!r} t2={self.t2!r}"
            )
        if self.T < self.t2:
            raise DomainError(f"T={self.T!r} must cover t2={self.t2!r}")
        if not self.t_x_step > 0.0:
            raise DomainError(f"t_x_step must be positive, got {self.t_x_step!r}")
        if self.t_attack is None:
            object.__setattr__(self, "t_attack", self.T)
        if self.t_min_hold is None:
            object.__setattr__(self, "t_min_hold", self.t_attack)
        if self.t_use is None:
            object.__setattr__(self, "t_use", self.t_x_step)
        if self.t_attack <= 0.0:
            raise DomainError(f"t_attack must be positive, got {self.t_attack!r}")
        if self.t_min_hold > self.t_attack:
            raise DomainError(
                f"t_min_hold={self.t_min_hold!r} exceeds t_attack={self.t_attack!r}"
            )
        if self.t_use < 0.0:
            raise DomainError(f"t_use must be >= 0, got {self.t_use!r}")
        if not isinstance(self.U_prime_N, int) or self.U_prime_N < 0:
            raise DomainError(
                f"U_prime_N must be a non-negative integer, got {self.U_prime_N!r}"
            )


@dataclass(frozen=True)
class RangeParams:
    """Radio ranges in meters: short-range r1, long-range r2, zone span R."""

    r1: float
    r2: float
    R: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.r1) and self.r1 >= 0.0):
            raise DomainError(f"r1 must be finite and >= 0, got {self.r1!r}")
        if not self.r2 > self.r1:
            raise DomainError(f"r2={self.r2!r} must exceed r1={self.r1!r}")
        if self.R is not None and not self.R > 0.0:
            raise DomainError(f"R must be positive when given, got {self.R!r}")


def loss_probability_model(net: NetworkParams) -> float:
    """Per-delivery loss probability P = (1 - n_inv/E)^N.

    Each of the N backhaul hops independently fails to shed the update
    with probability 1 - n_inv/E. Requires n_inv < E.
    """
    if net.n_inv >= net.E:
        raise DomainError(
            f"loss model requires n_inv < E, got n_inv={net.n_inv!r} E={net.E!r}"
        )
    return (1.0 - net.n_inv / net.E) ** net.N


def empirical_loss_probability(net: NetworkParams) -> float:
    """Observed loss share 1 - E'/E."""
    return 1.0 - net.E_prime / net.E


def sustainability_point(
    U_k: float,
    D: float,
    P: float | None,
    net: NetworkParams,
    R: float | None = None,
) -> float:
    """Point sustainability n*U_k / (D * P * Q), or the range variant with R.

    U_k is the surviving key-update count, D the vehicles in range, P the
    loss probability (replaced by the zone span R when given), and
    n = 1/n_inv. Zero denominators and D outside (0, N] are domain errors.
    """
    if U_k < 0.0:
        raise DomainError(f"U_k must be >= 0, got {U_k!r}")
    if not 0.0 < D <= net.N:
        raise DomainError(f"D must satisfy 0 < D <= N={net.N!r}, got {D!r}")
    if R is not None:
        if not R > 0.0:
            raise DomainError(f"R must be positive, got {R!r}")
        denom_factor = R
    else:
        if P is None:
            raise DomainError("either P or R must be given")
        if not 0.0 < P <= 1.0:
            raise DomainError(f"P must be in (0, 1], got {P!r}")
        denom_factor = P
    return (U_k / net.n_inv) / (D * denom_factor * net.Q)


def window_integrand(rates: RateParams) -> Callable[[float], float]:
    """Density ratio integrand of the windowed sustainability integral.

    At time t the expected surviving updates per vehicle follow
    e^{-alpha/t} (alpha/t)^2 / 2 against arrivals e^{-beta/t} (beta/t);
    the ratio reduces to e^{(beta-alpha)/t} * alpha^2 / (2 beta t).
    """
    a = rates.alpha
    b = rates.beta

    def f(t: float) -> float:
        return math.exp((b - a) / t) * a * a / (2.0 * b * t)

    return f


def sustainability_window(
    rates: RateParams, net: NetworkParams, window: TimeWindow
) -> float:
    """Sustainability integrated over [t1, t2], closed form.

    The window integral of the density ratio has the exponential-integral
    antiderivative -Ei((beta-alpha)/t), giving

        S_N = alpha^2 / (2 beta N (1 - n_inv/E)^N Q)
              * (Ei((beta-alpha)/t1) - Ei((beta-alpha)/t2)).

    Requires beta > alpha > 0 so the Ei arguments stay positive.
    """
    if not rates.alpha > 0.0:
        raise DomainError(f"window form requires alpha > 0, got {rates.alpha!r}")
    if not rates.beta > rates.alpha:
        raise DomainError(
            f"window form requires beta > alpha, got beta={rates.beta!r} "
            f"alpha={rates.alpha!r}"
        )
    P = loss_probability_model(net)
    d = rates.beta - rates.alpha
    prefactor = rates.alpha**2 / (2.0 * rates.beta * net.N * P * net.Q)
    return prefactor * (expint_ei(d / window.t1) - expint_ei(d / window.t2))


def sustainability_window_quadrature(
    rates: RateParams,
    net: NetworkParams,
    window: TimeWindow,
    rel_tol: float = 1e-10,
) -> float:
    """Same quantity as sustainability_window, via adaptive quadrature.

    Kept as an independent route for cross-validation; the closed form and
    this one must agree to the quadrature tolerance.
    """
    if not rates.alpha > 0.0 or not rates.beta > rates.alpha:
        raise DomainError("quadrature form requires beta > alpha > 0")
    P = loss_probability_model(net)
    result = integrate(
        window_integrand(rates), QuadSpec(window.t1, window.t2, rel_tol=rel_tol)
    )
    return result.value / (net.N * P * net.Q)


def sustainability_asymptote(rates: RateParams) -> float:
    """Large-window limit alpha/beta of the sustainability ratio.

    Well defined for any alpha >= 0; alpha == beta gives 1 even though the
    window form itself requires beta > alpha.
    """
    return rates.alpha / rates.beta


def signaling_overhead_raw(O_b: float, alpha_prime: float, t: float) -> float:
    """Instantaneous signaling load O_b (1 - alpha')^t at time t."""
    if not 0.0 < alpha_prime < 1.0:
        raise DomainError(f"alpha_prime must be in (0, 1), got {alpha_prime!r}")
    if O_b < 0.0:
        raise DomainError(f"O_b must be >= 0, got {O_b!r}")
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    return O_b * (1.0 - alpha_prime) ** t


def signaling_time_factor(alpha_prime: float, window: TimeWindow) -> float:
    """Windowed decay factor: integral of (1-alpha')^t over [t1, t2].

    Antiderivative form ((1-a')^{t2} - (1-a')^{t1}) / ln(1-a').
    """
    if not 0.0 < alpha_prime < 1.0:
        raise DomainError(f"alpha_prime must be in (0, 1), got {alpha_prime!r}")
    base = 1.0 - alpha_prime
    return (base**window.t2 - base**window.t1) / math.log(base)


def signaling_overhead(
    O_b: float, alpha_prime: float, net: NetworkParams, window: TimeWindow
) -> float:
    """Signaling overhead of unreceived updates over the window.

    O_S = O_b (n_inv/E)^N / (E (1 - n_inv/E)^N) * time factor. The hop
    prefactor divides by capacity here and the message-overhead composition
    divides through E*P again; that asymmetry is a modeling convention of
    the source analysis and is kept as printed.
    """
    if O_b < 0.0:
        raise DomainError(f"O_b must be >= 0, got {O_b!r}")
    P = loss_probability_model(net)
    ratio = (net.n_inv / net.E) ** net.N
    prefactor = O_b * ratio / (net.E * P)
    return prefactor * signaling_time_factor(alpha_prime, window)


def message_overhead(O_S: float, P: float, E: int) -> float:
    """Per-vehicle message overhead M_O = O_S (1 - P) / (E P)."""
    if O_S < 0.0:
        raise DomainError(f"O_S must be >= 0, got {O_S!r}")
    if not 0.0 < P <= 1.0:
        raise DomainError(f"P must be in (0, 1], got {P!r}")
    if E <= 0:
        raise DomainError(f"E must be positive, got {E!r}")
    return O_S * (1.0 - P) / (E * P)


def vehicles_in_range(
    density: Callable[[float], float],
    rng: RangeParams,
    rel_tol: float = 1e-10,
) -> float:
    """Expected vehicle count D: integral of a density over [r1, r2].

    The density must be non-negative on the interval; the D <= N check
    belongs to the caller, which knows the hop budget.
    """

    def guarded(x: float) -> float:
        v = density(x)
        if v < 0.0:
            raise DomainError(f"density is negative at x={x!r}: {v!r}")
        return v

    result = integrate(guarded, QuadSpec(rng.r1, rng.r2, rel_tol=rel_tol))
    return result.value
