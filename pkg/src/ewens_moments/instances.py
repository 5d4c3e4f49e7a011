"""Constructions of additive functions with prescribed limit laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from scipy import stats

from .core import AdditiveSpec, EwensParams, to_fraction
from .errors import DomainError, UnsupportedParameterError
from .laws import DiscreteLaw, binomial_law, bernoulli_law, factorial_moments_to_pmf, poisson_law
from .transform import ThetaTransform, interval_upsilon_limit

__all__ = [
    "PoissonLongCycleConstruction",
    "poisson_longcycle_construction",
    "build_poisson_longcycle_spec",
    "build_bernoulli_subset",
    "binomial2_parameters",
    "build_binomial2_subset",
    "LugoInstance",
    "build_lugo_interval",
    "BINOMIAL2_P_MAX",
    "INSTANCE_KINDS",
    "describe_instance",
]

# alpha <= log 2 and beta <= log(3/2) both hold iff p <= log(3/2)
BINOMIAL2_P_MAX = math.log(1.5)
_MAX_LEVELS = 200
_TAIL_STOP = 1e-15


def _iv(lo, hi, value=1) -> dict:
    return {"lo": lo, "hi": hi, "value": value}


def _require_theta_ge_1(params: EwensParams, what: str) -> None:
    if params.theta_float < 1:
        raise UnsupportedParameterError(f"{what} needs theta >= 1, got {params.theta}")


@dataclass(frozen=True)
class PoissonLongCycleConstruction:
    """Breakpoints d_0 = 1/2 < d_1 < ... and the resulting step weights.

    ``a_j = m`` on (n d_{m-1}, n d_m]; ``remaining_mass`` is the Poisson
    mass of the levels that were not placed.
    """

    mu: float
    breakpoints: tuple
    targets: tuple
    spec: AdditiveSpec
    remaining_mass: float
    stop_reason: str


def poisson_longcycle_construction(params: EwensParams, mu: float) -> PoissonLongCycleConstruction:
    _require_theta_ge_1(params, "the long-cycle Poisson construction")
    tr = ThetaTransform(params.theta_float)
    bound = tr.mu_bound
    if not 0 < mu <= bound:
        raise DomainError(f"mu must lie in (0, {bound:.12g}] for theta = {params.theta}, got {mu!r}")
    n = params.n
    po = stats.poisson(mu)
    d = [0.5]
    targets = [0.0]
    intervals = []
    reason = "level cap"
    for m in range(1, _MAX_LEVELS + 1):
        target = math.exp(-mu) * sum(mu ** k / math.factorial(k) for k in range(1, m + 1))
        x = d[-1]
        cell = params.theta_float * (1 - x) ** (params.theta_float - 1) / (n * x)
        if target - targets[-1] < 0.5 * cell:
            # under half a cell: the level rounds away on the 1/n grid
            reason = "level mass below half a grid cell"
            break
        if target > tr.t1 - 1e-12:
            reason = "target reached t_theta(1)"
            break
        dm = tr.inverse(target)
        d.append(dm)
        targets.append(target)
        intervals.append(_iv(d[m - 1], dm, m))
        if 1 - dm < 1 / n:
            reason = "breakpoint within 1/n of 1"
            break
        if po.sf(m) < _TAIL_STOP:
            reason = "remaining Poisson mass below 1e-15"
            break
    spec = AdditiveSpec.from_intervals(n, intervals,
                                       description={"kind": "poisson-longcycles", "mu": mu})
    placed = len(d) - 1
    return PoissonLongCycleConstruction(mu, tuple(d), tuple(targets), spec,
                                        float(po.sf(placed)), reason)


def build_poisson_longcycle_spec(params: EwensParams, mu: float) -> AdditiveSpec:
    """a_j = m on (n d_{m-1}, n d_m] with t_theta(d_m) = e^-mu sum_{k<=m} mu^k/k!."""
    return poisson_longcycle_construction(params, mu).spec


def build_bernoulli_subset(params: EwensParams, p: float) -> AdditiveSpec:
    """Indicator of (n/2, alpha n] with t_theta(alpha) = p; limit law Be(p)."""
    _require_theta_ge_1(params, "the Bernoulli instance")
    tr = ThetaTransform(params.theta_float)
    if not 0 < p <= tr.t1:
        raise DomainError(f"p must lie in (0, t_theta(1) = {tr.t1:.12g}], got {p!r}")
    alpha = tr.inverse(p)
    return AdditiveSpec.from_intervals(params.n, [_iv(Fraction(1, 2), alpha)],
                                       description={"kind": "bernoulli", "p": p, "alpha": alpha})


def binomial2_parameters(p: float) -> tuple[float, float]:
    """(alpha, beta) = (sqrt(2) p, (2 - sqrt(2)) p)."""
    if not 0 < p <= BINOMIAL2_P_MAX:
        raise DomainError(f"p must lie in (0, log(3/2) = {BINOMIAL2_P_MAX:.12g}], got {p!r}")
    alpha = math.sqrt(2) * p
    beta = (2 - math.sqrt(2)) * p
    if alpha > math.log(2) or beta > math.log(1.5):
        raise DomainError(f"alpha={alpha} or beta={beta} exceeds its admissible bound")
    return alpha, beta


def _binomial2_intervals(p: float):
    alpha, beta = binomial2_parameters(p)
    return [(Fraction(1, 3), math.exp(alpha) / 3), (Fraction(2, 3), 2 * math.exp(beta) / 3)]


def build_binomial2_subset(params: EwensParams, p: float) -> AdditiveSpec:
    """Indicator of (n/3, (n/3)e^alpha] U (2n/3, (2n/3)e^beta] at theta = 1."""
    if params.theta_float != 1:
        raise UnsupportedParameterError(f"the binomial instance needs theta = 1, got {params.theta}")
    ivs = _binomial2_intervals(p)
    return AdditiveSpec.from_intervals(params.n, [_iv(lo, hi) for lo, hi in ivs],
                                       description={"kind": "binomial2", "p": p})


@dataclass(frozen=True)
class LugoInstance:
    spec: AdditiveSpec
    gamma: float
    delta: float
    upsilon1: float
    upsilon2: float

    @property
    def gap(self) -> float:
        """upsilon(1)^2 - upsilon(2); zero for a quasi-Poisson limit."""
        return self.upsilon1 ** 2 - self.upsilon2


def build_lugo_interval(params: EwensParams, gamma: float, delta: float) -> LugoInstance:
    """Indicator of (gamma n, delta n] with the predicted limits of upsilon(1), upsilon(2).

    Endpoints may be strings such as ``"1/3"`` for exact boundaries.
    """
    gq, dq = to_fraction(gamma), to_fraction(delta)
    if not 0 < gq < dq <= 1:
        raise DomainError(f"need 0 < gamma < delta <= 1, got ({gamma!r}, {delta!r})")
    spec = AdditiveSpec.from_intervals(params.n, [_iv(gq, dq)],
                                       description={"kind": "lugo"})
    th = params.theta_float
    gamma, delta = float(gq), float(dq)
    return LugoInstance(spec, gamma, delta,
                        interval_upsilon_limit(th, [(gamma, delta)], 1),
                        interval_upsilon_limit(th, [(gamma, delta)], 2))


INSTANCE_KINDS = ("poisson-longcycles", "bernoulli", "binomial2", "lugo")


@dataclass
class InstanceReport:
    kind: str
    spec: AdditiveSpec
    parameters: dict
    predicted_moments: list
    predicted_law: DiscreteLaw | None
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        law = self.predicted_law
        return {
            "kind": self.kind,
            "parameters": self.parameters,
            "spec": self.spec.to_json(),
            "predicted_moments": self.predicted_moments,
            "predicted_law": None if law is None else {
                "name": law.name, "pmf": [float(x) for x in law.pmf], "tail": law.tail},
            "checks": self.checks,
        }


def describe_instance(kind: str, params: EwensParams, mu: float | None = None,
                      p: float | None = None, gamma: float | None = None,
                      delta: float | None = None) -> InstanceReport:
    """Build an instance together with its predicted limit behaviour."""
    def need(name, value):
        if value is None:
            raise DomainError(f"instance kind {kind!r} needs --{name}")
        return value

    th = params.theta_float
    if kind == "poisson-longcycles":
        mu = need("mu", mu)
        c = poisson_longcycle_construction(params, mu)
        return InstanceReport(
            kind, c.spec,
            {"mu": mu, "breakpoints": list(c.breakpoints), "stop_reason": c.stop_reason},
            [mu ** l for l in range(1, 5)], poisson_law(mu),
            {"mu_bound": ThetaTransform(th).mu_bound, "remaining_mass": c.remaining_mass,
             "short_cycles_unused": not any(j <= params.n / 2 for j in c.spec.support)})
    if kind == "bernoulli":
        p = need("p", p)
        spec = build_bernoulli_subset(params, p)
        tr = ThetaTransform(th)
        return InstanceReport(kind, spec, {"p": p, "alpha": tr.inverse(p)},
                              [p, 0.0, 0.0], bernoulli_law(p), {"t_theta_1": tr.t1})
    if kind == "binomial2":
        p = need("p", p)
        spec = build_binomial2_subset(params, p)
        alpha, beta = binomial2_parameters(p)
        ivs = _binomial2_intervals(p)
        u1 = interval_upsilon_limit(th, ivs, 1)
        u2 = interval_upsilon_limit(th, ivs, 2)
        law = factorial_moments_to_pmf([u1, u2], 2, name="predicted limit")
        return InstanceReport(
            kind, spec, {"p": p, "alpha": alpha, "beta": beta},
            [u1, u2, 0.0], law,
            {"binomial_moments": [2 * p, 2 * p * p, 0.0],
             "tv_to_binomial": float(sum(abs(law.prob(i) - binomial_law(2, p).prob(i))
                                         for i in range(3)) / 2),
             "p_max": BINOMIAL2_P_MAX})
    if kind == "lugo":
        inst = build_lugo_interval(params, need("gamma", gamma), need("delta", delta))
        return InstanceReport(kind, inst.spec, {"gamma": inst.gamma, "delta": inst.delta},
                              [inst.upsilon1, inst.upsilon2], None,
                              {"gap": inst.gap, "quasi_poisson_limit": abs(inst.gap) <= 1e-8})
    raise DomainError(f"unknown instance kind {kind!r}; choose from {', '.join(INSTANCE_KINDS)}")
