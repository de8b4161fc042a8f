"""Theoretical limit values for the scaled site frequency spectrum.

Three independent routes to the same numbers, kept deliberately separate so
they can cross-check each other:

* closed-form series for binary-fission (birth-death) models,
* adaptive quadrature of the equivalent integral representation,
* numerical integration of the truncated Kolmogorov forward equations for
  arbitrary offspring distributions.

Every numerical result travels as a LimitValue carrying a rigorous bound on
its truncation error, never a bare float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, sparse

from .model import InvalidConfigError, ModelParams, derive


class LimitsError(Exception):
    """Base class for limit-evaluation failures."""


class NotBirthDeathError(LimitsError):
    """Closed forms were requested for an offspring law that is not binary fission."""


class BudgetExceededError(LimitsError):
    """The truncated state space hit its cap before the value stabilized."""


@dataclass(frozen=True)
class LimitValue:
    """A numerical limit plus a bound on how far it can sit from the exact value."""

    value: float
    tail_bound: float
    terms_used: int

    def __post_init__(self):
        if self.tail_bound < 0:
            raise InvalidConfigError("tail_bound must be nonnegative")


@dataclass(frozen=True)
class BirthDeathSpec:
    """Parameter bundle for binary-fission closed forms.

    extinction_prob may be 0 (pure birth) but not 1; growth and mutation
    rates must be positive. Series evaluation loses accuracy for
    extinction_prob above 0.999, which is rejected as out of scope.
    """

    extinction_prob: float
    growth_rate: float
    mutation_rate: float

    def __post_init__(self):
        p = self.extinction_prob
        if not (isinstance(p, (int, float)) and 0 <= p < 1):
            raise InvalidConfigError("extinction_prob must lie in [0, 1)")
        if p > 0.999:
            raise InvalidConfigError("extinction_prob above 0.999 is outside the supported range")
        for name in ("growth_rate", "mutation_rate"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidConfigError(f"{name} must be a finite positive number")

    @property
    def survival_prob(self) -> float:
        return 1.0 - self.extinction_prob

    @classmethod
    def from_params(cls, params: ModelParams) -> "BirthDeathSpec":
        if not params.offspring.is_binary_fission():
            raise NotBirthDeathError(
                "closed forms need offspring support within {0, 2}; "
                "use the ODE route for general offspring laws"
            )
        d = derive(params)
        return cls(
            extinction_prob=d.extinction_prob,
            growth_rate=d.growth_rate,
            mutation_rate=params.mutation_rate,
        )


def bd_transition_prob(spec: BirthDeathSpec, j: int, t: float) -> float:
    """Probability the binary-fission population has size j at time t.

    Written in terms of w = e^{-growth_rate * t} so large t stays
    overflow-safe: size 0 has probability p(1-w)/(1-pw) and size j >= 1 has
    q^2 w (1-w)^{j-1} / (1-pw)^{j+1}, a geometric profile in j.
    """
    if not isinstance(j, int) or isinstance(j, bool) or j < 0:
        raise InvalidConfigError("size j must be a nonnegative integer")
    if not (isinstance(t, (int, float)) and math.isfinite(t) and t >= 0):
        raise InvalidConfigError("time t must be finite and nonnegative")
    p = spec.extinction_prob
    q = spec.survival_prob
    w = math.exp(-spec.growth_rate * t)
    denom = 1.0 - p * w
    if j == 0:
        return p * (1.0 - w) / denom
    # (1-w)/(1-pw) <= 1, so the geometric factor underflows to 0 at large j
    # instead of tripping intermediate overflow
    ratio = (1.0 - w) / denom
    return q * q * w / (denom * denom) * ratio ** (j - 1)


def _raw_sfs_series(p: float, j: int, tol: float) -> tuple[float, float, int]:
    """Sum_k p^k / ((j+k)(j+k+1)) with a geometric tail bound below tol.

    Returns (partial sum, tail bound actually achieved, terms used). The tail
    after K terms is bounded by p^{K+1} / ((1-p)(j+K+1)(j+K+2)).
    """
    total = 0.0
    pk = 1.0
    k = 0
    while True:
        total += pk / ((j + k) * (j + k + 1))
        pk *= p
        bound = pk / ((1.0 - p) * (j + k + 1) * (j + k + 2))
        if bound < tol:
            return total, bound, k + 1
        k += 1


def bd_sfs_limit(spec: BirthDeathSpec, j: int, tol: float = 1e-10) -> LimitValue:
    """Limit of the per-capita number of mutations at multiplicity j.

    nu * q / growth_rate times sum_k p^k / ((j+k)(j+k+1)); the series is cut
    once its geometric tail bound drops below tol.
    """
    if not isinstance(j, int) or isinstance(j, bool) or j < 1:
        raise InvalidConfigError("multiplicity j must be an integer >= 1")
    if not (tol > 0):
        raise InvalidConfigError("tol must be positive")
    scale = spec.mutation_rate * spec.survival_prob / spec.growth_rate
    raw, bound, terms = _raw_sfs_series(spec.extinction_prob, j, tol)
    return LimitValue(value=scale * raw, tail_bound=scale * bound, terms_used=terms)


def bd_sfs_limit_quadrature(spec: BirthDeathSpec, j: int) -> LimitValue:
    """Same limit by adaptive quadrature of (q/lambda) * (1-py)^{-1} (1-y) y^{j-1} on [0,1].

    Independent of the series route on purpose; the two must agree to within
    their combined error bounds.
    """
    if not isinstance(j, int) or isinstance(j, bool) or j < 1:
        raise InvalidConfigError("multiplicity j must be an integer >= 1")
    p = spec.extinction_prob
    scale = spec.mutation_rate * spec.survival_prob / spec.growth_rate

    def integrand(y):
        return (1.0 - y) * y ** (j - 1) / (1.0 - p * y)

    val, abserr, info = integrate.quad(integrand, 0.0, 1.0,
                                       epsabs=1e-13, epsrel=1e-13, full_output=1)
    return LimitValue(value=scale * val, tail_bound=scale * abserr,
                      terms_used=int(info["neval"]))


def bd_total_mut_limit(spec: BirthDeathSpec) -> float:
    """Limit of the per-capita total mutation count.

    nu/lambda for a pure-birth model, otherwise -nu q log(q) / (lambda p);
    the two branches meet continuously as p -> 0.
    """
    p = spec.extinction_prob
    base = spec.mutation_rate / spec.growth_rate
    if p == 0:
        return base
    # log1p keeps q log q accurate for p near 0
    return -base * spec.survival_prob * math.log1p(-p) / p


def proportion_limit(p: float, j: int) -> float:
    """Limiting share of all mutations that sit at multiplicity exactly j.

    1/(j(j+1)) for p = 0; otherwise -p/log(1-p) times the multiplicity-j
    series. Sums to 1 over j >= 1.
    """
    if not (isinstance(p, (int, float)) and 0 <= p < 1):
        raise InvalidConfigError("extinction probability must lie in [0, 1)")
    if not isinstance(j, int) or isinstance(j, bool) or j < 1:
        raise InvalidConfigError("multiplicity j must be an integer >= 1")
    if p == 0:
        return 1.0 / (j * (j + 1))
    raw, _, _ = _raw_sfs_series(p, j, 1e-14)
    return -p / math.log1p(-p) * raw


@dataclass(frozen=True)
class LimitOptions:
    """Budget and accuracy knobs for the ODE route.

    state_cap: largest allowed population-size truncation level.
    horizon: integration end time; None picks one making the analytic
        time-tail at most a quarter of tol.
    ode_tol: relative tolerance handed to the stiff integrator.
    tol: stabilization target for the truncation-doubling loop.
    """

    state_cap: int = 1 << 14
    horizon: float | None = None
    ode_tol: float = 1e-10
    tol: float = 1e-8

    def __post_init__(self):
        if not isinstance(self.state_cap, int) or self.state_cap < 16:
            raise InvalidConfigError("state_cap must be an integer >= 16")
        if self.horizon is not None and not (
            isinstance(self.horizon, (int, float)) and self.horizon > 0
        ):
            raise InvalidConfigError("horizon must be positive when given")
        if not (0 < self.ode_tol <= 1e-3):
            raise InvalidConfigError("ode_tol must lie in (0, 1e-3]")
        if not (0 < self.tol <= 1e-2):
            raise InvalidConfigError("tol must lie in (0, 1e-2]")


def _return_log_prob(n_from: int, j_to: int, p: float) -> float:
    """log of a bound on P(population ever drops to j_to | current size n_from).

    Reaching j_to or below forces at least n_from - j_to of the current
    independent lines extinct; a union bound over which lines gives
    C(n_from, j_to) p^{n_from - j_to}.
    """
    if p == 0:
        return -math.inf
    if n_from <= j_to:
        return 0.0
    return math.lgamma(n_from + 1) - math.lgamma(j_to + 1) - math.lgamma(n_from - j_to + 1) \
        + (n_from - j_to) * math.log(p)


def _solve_truncated(params: ModelParams, js: tuple[int, ...], level: int,
                     horizon: float, ode_tol: float):
    """Integrate the truncated forward equations up to the horizon.

    States 0..level plus one absorbing overflow bucket; the solution vector
    is augmented with the discounted integrals of every requested size
    probability, of 1 - P_0, and of the overflow mass. Returns
    (integrals per j, total-mutation integral, overflow integral).
    """
    a = params.lifetime_rate
    probs = params.offspring.probs
    d = derive(params)
    lam = d.growth_rate

    n_states = level + 2  # sizes 0..level, then overflow
    over = level + 1
    rows, cols, vals = [], [], []
    for n in range(1, level + 1):
        out = 0.0
        for k, u_k in enumerate(probs):
            if u_k == 0.0 or k == 1:
                continue
            rate = a * n * u_k
            m = n + k - 1
            rows.append(m if m <= level else over)
            cols.append(n)
            vals.append(rate)
            out += rate
        rows.append(n)
        cols.append(n)
        vals.append(-out)
    gen = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_states, n_states), dtype=np.float64
    )

    n_aug = len(js) + 2  # per-j integrals, then total-mutation, then overflow
    dim = n_states + n_aug
    js_arr = np.asarray(js, dtype=np.int64)

    def rhs(s, y):
        prob = y[:n_states]
        out = np.empty(dim)
        out[:n_states] = gen @ prob
        w = math.exp(-lam * s)
        out[n_states:n_states + len(js)] = w * prob[js_arr]
        out[n_states + len(js)] = w * (1.0 - prob[0])
        out[n_states + len(js) + 1] = w * prob[over]
        return out

    base_jac = sparse.bmat(
        [[gen, None], [None, sparse.csr_matrix((n_aug, n_aug))]], format="csr"
    )
    aug_rows = list(range(n_states, dim))
    aug_cols = list(js_arr) + [0, over]
    aug_signs = np.array([1.0] * len(js) + [-1.0, 1.0])

    def jac(s, y):
        w = math.exp(-lam * s)
        aug = sparse.coo_matrix((w * aug_signs, (aug_rows, aug_cols)), shape=(dim, dim))
        return base_jac + aug.tocsr()

    y0 = np.zeros(dim)
    y0[1] = 1.0  # one founder individual
    sol = integrate.solve_ivp(
        rhs, (0.0, horizon), y0, method="BDF", jac=jac,
        rtol=ode_tol, atol=ode_tol * 1e-2, t_eval=[horizon],
    )
    if not sol.success:
        raise BudgetExceededError(f"stiff integration failed: {sol.message}")
    yT = sol.y[:, -1]
    per_j = {int(j): float(yT[n_states + i]) for i, j in enumerate(js)}
    total = float(yT[n_states + len(js)])
    leak = float(yT[n_states + len(js) + 1])
    return per_j, total, leak


def _ode_limits(params: ModelParams, js: tuple[int, ...], opts: LimitOptions):
    """Shared driver: doubles the truncation level until everything stabilizes."""
    d = derive(params)
    lam = d.growth_rate
    nu = params.mutation_rate
    p = d.extinction_prob
    if opts.horizon is not None:
        horizon = float(opts.horizon)
    else:
        horizon = max(math.log(4.0 * nu / (lam * opts.tol)) / lam, 1.0 / lam)
    analytic_tail = nu * math.exp(-lam * horizon) / lam

    max_j = max(js) if js else 0
    level = 128
    while level < 4 * (max_j + params.offspring.max_offspring):
        level *= 2
    if level > opts.state_cap:
        raise BudgetExceededError(
            f"state_cap {opts.state_cap} cannot hold the initial level {level}"
        )

    prev = None
    while True:
        per_j, total, leak = _solve_truncated(params, js, level, horizon, opts.ode_tol)
        cur = [per_j[j] for j in js] + [total]
        if prev is not None and max(
            abs(c - q) for c, q in zip(cur, prev)
        ) < opts.tol:
            break
        if level * 2 > opts.state_cap:
            raise BudgetExceededError(
                f"value did not stabilize to {opts.tol} within state_cap {opts.state_cap}"
            )
        prev = cur
        level *= 2

    def bundle(raw_integral: float, j_target: int) -> LimitValue:
        # mass that escaped past the truncation can only re-enter size
        # j_target by dropping all the way back down; bound that return
        ret = math.exp(min(_return_log_prob(level + 1, j_target, p), 0.0))
        leak_bound = nu * leak * ret
        # allowance for the integrator's own error on top of the two
        # rigorous truncation terms
        ode_allow = 10.0 * opts.ode_tol * nu * (1.0 + horizon)
        return LimitValue(
            value=nu * raw_integral,
            tail_bound=analytic_tail + leak_bound + ode_allow,
            terms_used=level,
        )

    return {j: bundle(per_j[j], j) for j in js}, bundle(total, 0), level


def general_sfs_limit(params: ModelParams, j: int,
                      opts: LimitOptions = LimitOptions()) -> LimitValue:
    """ODE-route limit of the per-capita multiplicity-j mutation count."""
    return general_sfs_limits(params, (j,), opts)[j]


def general_sfs_limits(params: ModelParams, js, opts: LimitOptions = LimitOptions()
                       ) -> dict[int, LimitValue]:
    """Batch form of general_sfs_limit sharing one sequence of ODE solves."""
    js = tuple(js)
    if not js:
        raise InvalidConfigError("at least one multiplicity is required")
    for j in js:
        if not isinstance(j, int) or isinstance(j, bool) or j < 1:
            raise InvalidConfigError("multiplicities must be integers >= 1")
    if len(set(js)) != len(js):
        raise InvalidConfigError("multiplicities must be distinct")
    per_j, _, _ = _ode_limits(params, js, opts)
    return per_j


def general_total_mut_limit(params: ModelParams,
                            opts: LimitOptions = LimitOptions()) -> LimitValue:
    """ODE-route limit of the per-capita total mutation count."""
    _, total, _ = _ode_limits(params, (), opts)
    return total
