"""Numerical Laplace transform of the divisor survival and pole search.

The transform  L(s) = int_0^inf E0(t) e^{-st} dt  is computed as adaptive
quadrature on [0, t_max] plus an analytic completion of the truncated
tail, because bare truncation biases the transform exactly at the negative
s values where persistency poles live.  The completion parameters are
fitted to log E0 over the final decade before t_max (exponential form for
exponentially decaying survivals, log-log form for power tails).

From the transform:

* divisor transform        Psi_div(s) = 1 - s L(s)  (integration by parts),
* exceedance transform     Psi_exc(s) = (1 - s L(s)) / (1 + s L(s)),

and the persistency pole is the largest negative real root of
h(s) = 1 + s L(s) = 0, equivalently Psi_div(s) = 2.  The root is located
by sign-change scanning from zero toward the convergence boundary, then
bisection refined with secant-type steps.  Real roots only: the search is
a heuristic for transforms that are not rational, and a complex dominant
pole is reported as pole-not-found rather than guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from . import slepian
from .covariance import CovarianceModel
from .persistency import ExponentEstimate
from .slepian import ValidityError

__all__ = [
    "DivergenceError",
    "AtPoleError",
    "PoleNotFoundError",
    "TailCompletion",
    "LaplaceEvaluator",
    "laplace_e0",
    "psi_divisor",
    "psi_excursion",
    "find_pole",
]

# Truncate where the survival drops below this (or at the grid cap for
# power tails, where the analytic completion carries the remainder).
TRUNCATION_THRESHOLD = 1e-15
T_CAP = 1000.0
# Fraction of the convergence boundary the pole bracket keeps away from
# it; the transform diverges at the boundary itself.
BOUNDARY_MARGIN = 0.95


class DivergenceError(ValueError):
    """Transform requested at or below its convergence boundary."""

    def __init__(self, s: float, boundary: float):
        self.s = s
        self.boundary = boundary
        super().__init__(
            f"Laplace transform diverges at s={s:g}: it converges only for s > {boundary:g}"
        )


class AtPoleError(ZeroDivisionError):
    """Exceedance transform evaluated at (numerically) a pole."""


class PoleNotFoundError(RuntimeError):
    """No sign change of 1 + s L(s) inside the admissible bracket."""

    def __init__(self, lo, hi, h_lo, h_hi):
        self.bracket = (lo, hi)
        self.h_values = (h_lo, h_hi)
        super().__init__(
            f"no real pole: h({lo:g})={h_lo:g}, h({hi:g})={h_hi:g} have equal sign "
            "(the dominant pole may sit at or beyond the convergence boundary, or be complex)"
        )


@dataclass(frozen=True)
class TailCompletion:
    """Analytic extension of the survival beyond t_max.

    exponential: log E0 ~ intercept + slope * t   (slope < 0)
    power:       log E0 ~ intercept + slope * ln t
    """

    kind: str
    intercept: float
    slope: float

    @property
    def rate(self) -> float:
        """Decay rate for the exponential form (-slope)."""
        return -self.slope

    def remainder(self, s: float, t_max: float) -> float:
        """int_{t_max}^inf (fitted tail)(t) e^{-st} dt."""
        if self.kind == "exponential":
            return math.exp(self.intercept + (self.slope - s) * t_max) / (s - self.slope)
        if s == 0.0:
            return math.exp(self.intercept) * t_max ** (self.slope + 1.0) / (-self.slope - 1.0)
        val, _ = integrate.quad(
            lambda t: math.exp(self.intercept + self.slope * math.log(t) - s * t),
            t_max,
            np.inf,
        )
        return val


def _eval_survival(survival, ts):
    try:
        vals = np.asarray(survival(ts), dtype=float)
        if vals.shape != np.shape(ts):
            raise TypeError
        return vals
    except TypeError:
        return np.array([float(survival(t)) for t in np.atleast_1d(ts)])


class LaplaceEvaluator:
    """Transform of one survival function with truncation + tail completion."""

    def __init__(
        self,
        survival: Callable,
        t_max: float,
        completion: TailCompletion,
        rel_tol: float = 1e-9,
        label: str = "",
    ):
        self.survival = survival
        self.t_max = float(t_max)
        self.completion = completion
        self.rel_tol = float(rel_tol)
        self.label = label

    # -- construction -----------------------------------------------------

    @classmethod
    def for_survival(
        cls,
        survival: Callable,
        rel_tol: float = 1e-9,
        tail_kind: Optional[str] = None,
        threshold: float = TRUNCATION_THRESHOLD,
        t_cap: float = T_CAP,
        label: str = "",
    ) -> "LaplaceEvaluator":
        t_max = cls._find_t_max(survival, threshold, t_cap)
        completion = cls._fit_tail(survival, t_max, tail_kind)
        return cls(survival, t_max, completion, rel_tol=rel_tol, label=label)

    @classmethod
    def for_model(cls, model: CovarianceModel, rel_tol: float = 1e-9) -> "LaplaceEvaluator":
        kind, _ = model.tail_hint()
        tail_kind = "power" if kind == "power" else "exponential"
        return cls.for_survival(
            lambda t: slepian.e0(model, t),
            rel_tol=rel_tol,
            tail_kind=tail_kind,
            label=model.spec_string(),
        )

    @staticmethod
    def _find_t_max(survival, threshold, t_cap):
        t = 1.0
        while t < t_cap:
            v = float(np.asarray(survival(t)))
            if not np.isfinite(v) or v < threshold:
                return t
            t *= 1.25
        return t_cap

    @staticmethod
    def _fit_tail(survival, t_max, tail_kind):
        ts = np.linspace(t_max / 10.0, t_max, 200)
        vals = _eval_survival(survival, ts)
        good = vals > 0
        ts, vals = ts[good], vals[good]
        if ts.size < 20:
            raise ValueError("too few positive survival values to fit a tail completion")
        logs = np.log(vals)
        b_exp, a_exp = np.polyfit(ts, logs, 1)
        b_pow, a_pow = np.polyfit(np.log(ts), logs, 1)
        if tail_kind is None:
            sse_exp = float(np.sum((logs - (a_exp + b_exp * ts)) ** 2))
            sse_pow = float(np.sum((logs - (a_pow + b_pow * np.log(ts))) ** 2))
            tail_kind = "exponential" if sse_exp <= sse_pow else "power"
        if tail_kind == "exponential":
            if b_exp >= 0:
                raise ValueError("survival does not decay; cannot build a transform")
            return TailCompletion("exponential", float(a_exp), float(b_exp))
        return TailCompletion("power", float(a_pow), float(b_pow))

    # -- evaluation --------------------------------------------------------

    @property
    def boundary(self) -> float:
        """Largest s at which the transform diverges."""
        if self.completion.kind == "exponential":
            return self.completion.slope  # = -rate
        return 0.0

    def _check_domain(self, s: float):
        if self.completion.kind == "exponential":
            if s <= self.completion.slope:
                raise DivergenceError(s, self.completion.slope)
        else:
            if s < 0.0 or (s == 0.0 and self.completion.slope >= -1.0):
                raise DivergenceError(s, 0.0)

    def transform(self, s: float) -> float:
        """L(s) = quadrature on [0, t_max] + analytic tail remainder."""
        s = float(s)
        self._check_domain(s)
        survival = self.survival
        # full_output suppresses the benign roundoff warning quad emits when
        # pushed to tight tolerances on sharply peaked integrands
        out = integrate.quad(
            lambda t: float(np.asarray(survival(t))) * math.exp(-s * t),
            0.0,
            self.t_max,
            epsabs=0.0,
            epsrel=self.rel_tol,
            limit=500,
            full_output=1,
        )
        return out[0] + self.completion.remainder(s, self.t_max)

    def psi_divisor(self, s: float) -> float:
        """Laplace transform of the divisor density, 1 - s L(s)."""
        return 1.0 - s * self.transform(s)

    def psi_excursion(self, s: float) -> float:
        """Laplace transform of the compound exceedance distribution."""
        sl = s * self.transform(s)
        den = 1.0 + sl
        if abs(den) < 1e-12:
            raise AtPoleError(f"exceedance transform evaluated at a pole: 1 + s L(s) = {den:g}")
        return (1.0 - sl) / den

    # -- pole search --------------------------------------------------------

    def find_pole(self, scan_points: int = 48) -> ExponentEstimate:
        """Largest negative real root of h(s) = 1 + s L(s).

        Scans from 0- toward BOUNDARY_MARGIN times the convergence
        boundary for the first sign change, then refines by bracketed
        bisection/secant iteration to |h| <= 1e-10.
        """
        if self.completion.kind != "exponential":
            raise PoleNotFoundError(0.0, 0.0, math.nan, math.nan)
        rate = self.completion.rate
        lo = -BOUNDARY_MARGIN * rate
        hi = -1e-4 * rate

        def h(s):
            return 1.0 + s * self.transform(s)

        # descending scan: a short stretch hugging zero (where h -> 1),
        # then the main sweep toward the boundary margin
        grid = np.concatenate([np.linspace(1e-3 * hi, hi, 8), np.linspace(hi, lo, scan_points)[1:]])
        s_prev = float(grid[0])
        h_prev = h(s_prev)
        bracket = None
        for s_val in grid[1:]:
            h_cur = h(float(s_val))
            if h_prev > 0.0 >= h_cur:
                bracket = (float(s_val), s_prev)
                break
            s_prev, h_prev = float(s_val), h_cur
        if bracket is None:
            raise PoleNotFoundError(lo, hi, h(lo), h(hi))
        root = optimize.brentq(h, bracket[0], bracket[1], xtol=1e-14, rtol=8.9e-16)
        residual = abs(h(root))
        return ExponentEstimate(
            theta=-float(root),
            method="pole",
            bracket=bracket,
            residual=float(residual),
            boundary=float(self.completion.slope),
            boundary_margin=BOUNDARY_MARGIN,
        )


# ---------------------------------------------------------------------------
# model-level convenience surface (evaluators cached per model)


@lru_cache(maxsize=64)
def _evaluator(model: CovarianceModel, rel_tol: float) -> LaplaceEvaluator:
    return LaplaceEvaluator.for_model(model, rel_tol=rel_tol)


def laplace_e0(model: CovarianceModel, s: float, rel_tol: float = 1e-9) -> float:
    """L E0(s) for a catalog model."""
    return _evaluator(model, rel_tol).transform(s)


def psi_divisor(model: CovarianceModel, s: float, rel_tol: float = 1e-9) -> float:
    """Divisor Laplace transform 1 - s L E0(s)."""
    return _evaluator(model, rel_tol).psi_divisor(s)


def psi_excursion(model: CovarianceModel, s: float, rel_tol: float = 1e-9) -> float:
    """Exceedance-time Laplace transform (1 - s L E0)/(1 + s L E0)."""
    return _evaluator(model, rel_tol).psi_excursion(s)


def find_pole(model: CovarianceModel, rel_tol: float = 1e-12) -> ExponentEstimate:
    """Pole-based persistency exponent for a validated model.

    Refuses models whose validity verdict is not plain "valid" (the pole
    heuristic needs an exponentially decaying divisor).
    """
    report = slepian.cached_validity(model)
    if report.verdict != "valid":
        raise ValidityError(report, f"pole search requires a valid model, got verdict={report.verdict}")
    return _evaluator(model, rel_tol).find_pole()
