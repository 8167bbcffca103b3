"""Alternating renewal ("switch") process and its stationary version.

A switch path takes values +/-1, starting from +1 at the origin and
flipping at the cumulative sums of iid positive switching times.  Its
time-varying mean E(t) relates to the switching-time transform Psi by

    L E(s) = (1/s) (1 - Psi(s)) / (1 + Psi(s)),

and the stationary (delayed) version - started inside an interval that
covers the origin, with forward delay A, backward delay B and a symmetric
initial sign - has covariance R with R'(t) = -(2/mu) E(t).  The delayed
interval is size-biased (density x f(x) / mu, the inspection paradox), and
A given A+B is uniform on the interval.

These relations cross-check the exceedance construction from an entirely
independent direction: simulated paths against analytic transforms.

Only the forward half (t >= 0) of the stationary representation is
simulated; the backward branch adds nothing testable for stationarity on
the positive axis.  Paths use the left-closed convention: the state at an
exact switch instant is the value before the flip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, stats

from .samplers import DivisorSampler, RngStream, sample_excursions
from .covariance import CovarianceModel
from .slepian import mean_excursion

__all__ = [
    "SwitchingTimeDistribution",
    "SwitchPath",
    "StationaryDelay",
    "exponential_switching",
    "gamma_switching",
    "point_mass_switching",
    "divisor_switching",
    "excursion_switching",
    "simulate_switch",
    "sample_stationary_delay",
    "simulate_stationary_switch",
    "laplace_expectation",
    "laplace_state_probability",
    "laplace_stationary_covariance",
    "covariance_from_expectation",
    "estimate_expectation",
    "estimate_stationary_covariance",
]


@dataclass(frozen=True)
class SwitchingTimeDistribution:
    """Positive switching-time law with the pieces the simulators need.

    ``size_biased_draw`` samples the interval covering the origin
    (density x f(x)/mean); it is None for laws without a density, in
    which case the stationary construction refuses.
    """

    label: str
    mean: float
    draw: Callable  # (rng, size) -> array
    density: Optional[Callable] = None
    cdf: Optional[Callable] = None
    size_biased_draw: Optional[Callable] = None  # (rng, size) -> array of A+B


def exponential_switching(rate: float = 1.0) -> SwitchingTimeDistribution:
    lam = float(rate)
    if lam <= 0:
        raise ValueError("rate must be positive")

    def draw(rng: RngStream, size=None):
        return -np.log(rng.uniform01(size)) / lam

    def size_biased(rng: RngStream, size=None):
        # size-biased exponential is Gamma(2, rate): sum of two draws
        return -(np.log(rng.uniform01(size)) + np.log(rng.uniform01(size))) / lam

    return SwitchingTimeDistribution(
        label=f"exp:{lam:g}",
        mean=1.0 / lam,
        draw=draw,
        density=lambda t: lam * np.exp(-lam * np.asarray(t, float)),
        cdf=lambda t: -np.expm1(-lam * np.asarray(t, float)),
        size_biased_draw=size_biased,
    )


def gamma_switching(shape: float, rate: float = 1.0) -> SwitchingTimeDistribution:
    k, lam = float(shape), float(rate)
    if k <= 0 or lam <= 0:
        raise ValueError("shape and rate must be positive")
    dist = stats.gamma(a=k, scale=1.0 / lam)

    return SwitchingTimeDistribution(
        label=f"gamma:{k:g},{lam:g}",
        mean=k / lam,
        draw=lambda rng, size=None: rng.gen.gamma(k, 1.0 / lam, size),
        density=dist.pdf,
        cdf=dist.cdf,
        # size-biased Gamma(k) is Gamma(k+1)
        size_biased_draw=lambda rng, size=None: rng.gen.gamma(k + 1.0, 1.0 / lam, size),
    )


def point_mass_switching(c: float) -> SwitchingTimeDistribution:
    """Deterministic switching times; usable for origin-attached paths only
    (the stationary construction needs a non-lattice law with a density)."""
    c = float(c)
    if c <= 0:
        raise ValueError("point mass must be positive")

    def draw(rng: RngStream, size=None):
        return c if size is None else np.full(size, c)

    return SwitchingTimeDistribution(label=f"point:{c:g}", mean=c, draw=draw)


def divisor_switching(model: CovarianceModel, sb_mass_tol: float = 1e-13) -> SwitchingTimeDistribution:
    """Switching times drawn from a model's geometric divisor.

    The size-biased draw uses weighted rejection: proposals from the
    divisor itself accepted with probability x / T_trunc, where T_trunc is
    grown until the survival drops below ``sb_mass_tol`` (the capped
    acceptance beyond T_trunc biases by at most that tail mass).
    """
    sampler = DivisorSampler(model)
    mu = sampler.mean

    t_trunc = 1.0
    while float(np.asarray(sampler.survival(t_trunc))) > sb_mass_tol and t_trunc < 1e6:
        t_trunc *= 2.0

    def density(t, h=1e-6):
        t = np.asarray(t, dtype=float)
        hh = np.minimum(h, 0.5 * np.maximum(t, h))
        return -(sampler.survival(t + hh) - sampler.survival(t - hh)) / (2.0 * hh)

    def size_biased(rng: RngStream, size=None):
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = max(int((n - filled) * t_trunc / mu * 1.1) + 16, 64)
            x = np.atleast_1d(sampler.draw(rng, m))
            u = rng.uniform01(m)
            take = x[u <= x / t_trunc][: n - filled]
            out[filled : filled + take.size] = take
            filled += take.size
        return float(out[0]) if size is None else out

    return SwitchingTimeDistribution(
        label=f"divisor:{model.spec_string()}",
        mean=mu,
        draw=sampler.draw,
        density=density,
        cdf=lambda t: 1.0 - np.asarray(sampler.survival(t)),
        size_biased_draw=size_biased,
    )


def excursion_switching(model: CovarianceModel) -> SwitchingTimeDistribution:
    """Switching times drawn from a model's compound exceedance law.

    By construction the origin-attached switch expectation then equals the
    clipped expectation E0, so the stationary covariance of this process
    reproduces the clipped autocovariance (2/pi) arcsin r(t) - the
    strongest end-to-end cross-check the simulator offers.

    The size-biased draw uses the same weighted rejection as the divisor
    case; lacking a closed survival, the truncation point is four times
    the maximum of a pilot sample, beyond which the capped acceptance
    bias is negligible for exponential-class tails.
    """
    sampler = DivisorSampler(model)
    mu = mean_excursion(model)

    def draw(rng: RngStream, size=None):
        values, _ = sample_excursions(sampler, rng, 1 if size is None else int(size))
        return float(values[0]) if size is None else values

    pilot, _ = sample_excursions(sampler, RngStream(0x5EED, 917), 4096)
    t_trunc = 4.0 * float(pilot.max())

    def size_biased(rng: RngStream, size=None):
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = max(int((n - filled) * t_trunc / mu * 1.1) + 16, 64)
            x, _ = sample_excursions(sampler, rng, m)
            u = rng.uniform01(m)
            take = x[u <= x / t_trunc][: n - filled]
            out[filled : filled + take.size] = take
            filled += take.size
        return float(out[0]) if size is None else out

    return SwitchingTimeDistribution(
        label=f"excursion:{model.spec_string()}",
        mean=mu,
        draw=draw,
        size_biased_draw=size_biased,
    )


@dataclass(frozen=True)
class SwitchPath:
    """Piecewise +/-1 trajectory: alternating states over switch instants.

    The state at exactly a switch instant is the pre-switch value
    (intervals are left-open, right-closed).
    """

    initial_state: int
    instants: np.ndarray
    horizon: float

    def __post_init__(self):
        inst = np.asarray(self.instants, dtype=float)
        if inst.size and (np.any(np.diff(inst) <= 0) or inst[0] <= 0):
            raise ValueError("switch instants must be strictly increasing and positive")
        object.__setattr__(self, "instants", inst)

    def state_at(self, t):
        t = np.asarray(t, dtype=float)
        flips = np.searchsorted(self.instants, t, side="left")
        out = self.initial_state * np.where(flips % 2 == 0, 1, -1)
        return out if out.ndim else int(out)

    def states(self) -> np.ndarray:
        """State on each of the len(instants)+1 segments."""
        signs = np.ones(self.instants.size + 1, dtype=int)
        signs[1::2] = -1
        return self.initial_state * signs


@dataclass(frozen=True)
class StationaryDelay:
    """Forward delay A, backward delay B and initial sign of the delayed path."""

    A: float
    B: float
    delta: int


def _cumulative_draws(dist: SwitchingTimeDistribution, horizon: float, rng: RngStream) -> np.ndarray:
    """Cumulative switch instants until the first sum exceeding horizon."""
    total = 0.0
    out = []
    for _ in range(100000):
        block = np.atleast_1d(dist.draw(rng, 16))
        cums = total + np.cumsum(block)
        beyond = np.flatnonzero(cums > horizon)
        if beyond.size:
            out.append(cums[: beyond[0]])
            return np.concatenate(out) if out else np.empty(0)
        out.append(cums)
        total = float(cums[-1])
    raise RuntimeError("horizon not reached; switching times may be degenerate at 0")


def simulate_switch(dist: SwitchingTimeDistribution, horizon: float, rng: RngStream) -> SwitchPath:
    """Origin-attached path: state +1 from t=0, flips at iid cumulative sums."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    instants = _cumulative_draws(dist, horizon, rng)
    return SwitchPath(initial_state=1, instants=instants, horizon=float(horizon))


def sample_stationary_delay(dist: SwitchingTimeDistribution, rng: RngStream) -> StationaryDelay:
    """Draw (A, B, delta): A+B size-biased, A uniform given the total,
    sign symmetric.  The conditional uniformity holds because the joint
    density of the delays is constant on a + b = s."""
    if dist.size_biased_draw is None:
        raise ValueError(
            f"distribution {dist.label!r} has no size-biased sampler; "
            "the stationary construction requires a switching-time density"
        )
    s = float(np.asarray(dist.size_biased_draw(rng, None)))
    a = float(rng.uniform01(None)) * s
    delta = 1 if float(rng.uniform01(None)) < 0.5 else -1
    return StationaryDelay(A=a, B=s - a, delta=delta)


def simulate_stationary_switch(dist: SwitchingTimeDistribution, horizon: float, rng: RngStream) -> SwitchPath:
    """Forward half of the stationary path: state -delta on [0, A), then an
    origin-attached path scaled by delta from t = A on."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    delay = sample_stationary_delay(dist, rng)
    if delay.A > horizon:
        return SwitchPath(initial_state=-delay.delta, instants=np.empty(0), horizon=float(horizon))
    rest = _cumulative_draws(dist, horizon - delay.A, rng)
    instants = np.concatenate(([delay.A], delay.A + rest))
    return SwitchPath(initial_state=-delay.delta, instants=instants, horizon=float(horizon))


# ---------------------------------------------------------------------------
# transform-side identities


def laplace_expectation(psi_f: Callable, s: float) -> float:
    """L E(s) = (1/s)(1 - Psi(s))/(1 + Psi(s)) for the origin-attached path."""
    psi = float(psi_f(s))
    return (1.0 - psi) / (s * (1.0 + psi))


def laplace_state_probability(psi_f: Callable, mu: float, s: float, delta: int) -> float:
    """Transform of P(D_s(t) = 1 | D_s(0) = delta) for the stationary path."""
    core = laplace_expectation(psi_f, s) / mu
    if delta == 1:
        return (1.0 - core) / s
    if delta == -1:
        return core / s
    raise ValueError("delta must be +1 or -1")


def laplace_stationary_covariance(psi_f: Callable, mu: float, s: float) -> float:
    """Transform of the stationary covariance:
    L R(s) = (2/(s mu)) (mu/2 - (1/s)(1 - Psi)/(1 + Psi))."""
    return 2.0 / (s * mu) * (0.5 * mu - laplace_expectation(psi_f, s))


def covariance_from_expectation(expectation: Callable, mu: float, grid) -> np.ndarray:
    """R(t) = 1 - (2/mu) * int_0^t E(u) du by cumulative adaptive quadrature.

    Returns an array of (t, R(t)) rows over the grid.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise ValueError("grid must be increasing and start at or after 0")
    acc = 0.0
    prev = 0.0
    rows = np.empty((grid.size, 2))
    for i, t in enumerate(grid):
        if t > prev:
            part, _ = integrate.quad(expectation, prev, t, epsabs=1e-12, epsrel=1e-10, limit=200)
            acc += part
            prev = t
        rows[i] = (t, 1.0 - 2.0 / mu * acc)
    return rows


# ---------------------------------------------------------------------------
# ensemble estimators (ensemble over paths at fixed time points, which keeps
# the standard-error formulas elementary)


def _instant_matrix(dist: SwitchingTimeDistribution, n: int, beyond: float, rng: RngStream) -> np.ndarray:
    """(n, m) cumulative switch instants per path, covering [0, beyond].

    Draws are taken flat and reshaped row-major, so the draw contract only
    needs integer sizes."""
    mu = dist.mean
    m0 = int(beyond / mu + 6.0 * math.sqrt(beyond / mu + 1.0) + 8)
    block = np.asarray(dist.draw(rng, n * m0), dtype=float).reshape(n, m0)
    cums = np.cumsum(block, axis=1)
    while float(cums[:, -1].min()) <= beyond:
        extra = np.cumsum(np.asarray(dist.draw(rng, n * 8), dtype=float).reshape(n, 8), axis=1)
        cums = np.concatenate([cums, cums[:, -1:] + extra], axis=1)
    return cums


def estimate_expectation(dist: SwitchingTimeDistribution, grid, n: int, rng: RngStream):
    """Ensemble estimate of E(t) for the origin-attached path.

    Returns (E_hat, SE) arrays over the grid.
    """
    grid = np.asarray(grid, dtype=float)
    cums = _instant_matrix(dist, n, float(grid.max()), rng)
    e_hat = np.empty(grid.size)
    se = np.empty(grid.size)
    for i, t in enumerate(grid):
        states = np.where(((cums < t).sum(axis=1) % 2) == 0, 1.0, -1.0)
        e_hat[i] = states.mean()
        se[i] = states.std(ddof=1) / math.sqrt(n)
    return e_hat, se


def estimate_stationary_covariance(
    dist: SwitchingTimeDistribution, grid, n: int, rng: RngStream, base_time: float = 0.0
):
    """Ensemble estimates for the stationary path.

    Returns (E_hat, E_se, R_hat, R_se) where E_hat is the mean state at
    each grid time and R_hat the covariance between the state at
    ``base_time`` and at ``base_time + t`` for each lag t in the grid.
    """
    if dist.size_biased_draw is None:
        raise ValueError(f"distribution {dist.label!r} has no size-biased sampler")
    grid = np.asarray(grid, dtype=float)
    horizon = base_time + float(grid.max())
    s_tot = np.atleast_1d(dist.size_biased_draw(rng, n))
    a = rng.uniform01(n) * s_tot
    delta = np.where(rng.uniform01(n) < 0.5, 1.0, -1.0)
    cums = _instant_matrix(dist, n, horizon, rng)

    def states_at(t: float) -> np.ndarray:
        flips = (cums < (t - a)[:, None]).sum(axis=1)
        after = delta * np.where(flips % 2 == 0, 1.0, -1.0)
        return np.where(t < a, -delta, after)

    s0 = states_at(base_time)
    e_hat = np.empty(grid.size)
    e_se = np.empty(grid.size)
    r_hat = np.empty(grid.size)
    r_se = np.empty(grid.size)
    for i, t in enumerate(grid):
        st = states_at(base_time + t)
        e_hat[i] = st.mean()
        e_se[i] = st.std(ddof=1) / math.sqrt(n)
        prod = s0 * st
        r_hat[i] = prod.mean() - s0.mean() * st.mean()
        r_se[i] = prod.std(ddof=1) / math.sqrt(n)
    return e_hat, e_se, r_hat, r_se
