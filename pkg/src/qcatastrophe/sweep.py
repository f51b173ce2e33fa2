"""Entropy sweeps, peak location and power-law fits of peak positions."""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .asymptotic import asymptotic_entropy
from .numerics import entropy_1d, entropy_2d, finite_mu_entropy
from .potentials import CatastropheParams, Model

WORKERS_ENV = "QCATASTROPHE_WORKERS"

# Resolution used for fresh evaluations during peak refinement; held fixed so
# the entropy is a smooth function of the parameter.
PEAK_SPACING_1D = 0.01
PEAK_POINTS_2D = 192


class Method(str, enum.Enum):
    ASYMPTOTIC = "asymptotic"
    NUMERIC = "numeric"


class FitForm(str, enum.Enum):
    PLAIN = "plain"
    OFFSET = "offset"


class SweepError(RuntimeError):
    def __init__(self, message: str, param: float | None = None):
        super().__init__(message)
        self.param = param


class PeakNotBracketedError(RuntimeError):
    pass


class NonMonotoneApproachError(ValueError):
    pass


@dataclass(frozen=True)
class SweepPoint:
    param: float
    entropy_bits: float
    method: Method


@dataclass(frozen=True)
class SweepResult:
    model: Model
    mu: float
    param_name: str
    points: tuple[SweepPoint, ...]
    template: CatastropheParams | None = field(default=None, compare=False)

    @property
    def params(self) -> np.ndarray:
        return np.array([pt.param for pt in self.points])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([pt.entropy_bits for pt in self.points])

    @property
    def method(self) -> Method:
        return self.points[0].method


@dataclass(frozen=True)
class PowerLawFit:
    """x* - x_c = c0 * mu**(-c1), fitted on log|x* - x_c| against log mu."""

    form: FitForm
    c0: float
    c1: float
    residual_rms: float
    mu_values: tuple[float, ...]


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    return 1


def _evaluate(template: CatastropheParams, param_name: str, method: Method,
              resolution: float | int | None, value: float) -> float:
    p = template.replace(**{param_name: value})
    if method is Method.ASYMPTOTIC:
        return asymptotic_entropy(p)
    if resolution is None:
        return finite_mu_entropy(p)
    if p.model is Model.MOLAR:
        return entropy_2d(p, int(resolution))
    return entropy_1d(p, p.theta, float(resolution))


def _safe_evaluate(template, param_name, method, resolution, value):
    try:
        return _evaluate(template, param_name, method, resolution, value)
    except Exception as exc:  # re-raised with the parameter attached
        raise SweepError(f"{param_name}={value!r}: {exc}", value) from exc


def sweep_entropy(template: CatastropheParams, param_name: str, param_range: tuple[float, float],
                  steps: int, mu: float | None = None, resolution: float | int | None = None,
                  workers: int | None = None) -> SweepResult:
    """Entropy on ``steps`` evenly spaced values of ``param_name``.

    ``mu=math.inf`` selects the asymptotic pipeline; any finite ``mu`` (or
    None, meaning the template's own mu) runs the finite-mu solvers.
    """
    if steps < 2:
        raise ValueError("a sweep needs at least two steps")
    lo, hi = param_range
    if not lo < hi:
        raise ValueError("param_range must be increasing")
    asymptotic = mu is not None and math.isinf(mu)
    method = Method.ASYMPTOTIC if asymptotic else Method.NUMERIC
    if mu is not None and not asymptotic:
        template = template.replace(mu=mu)
    values = np.linspace(lo, hi, steps)
    task = partial(_safe_evaluate, template, param_name, method, resolution)
    n_workers = workers or worker_count()
    if n_workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            entropies = list(pool.map(task, values))
    else:
        entropies = [task(v) for v in values]
    points = tuple(SweepPoint(float(v), float(s), method) for v, s in zip(values, entropies))
    return SweepResult(template.model, math.inf if asymptotic else template.mu, param_name, points, template)


def default_peak_evaluator(sr: SweepResult) -> Callable[[float], float]:
    if sr.template is None:
        raise ValueError("sweep has no template; pass an evaluator")
    res = PEAK_POINTS_2D if sr.model is Model.MOLAR else PEAK_SPACING_1D
    return partial(_evaluate, sr.template, sr.param_name, Method.NUMERIC, res)


def _resolve_jumps(xs: list[float], ss: list[float], f: Callable[[float], float], jump: float,
                   min_width: float, max_evals: int) -> tuple[list[float], list[float]]:
    """Bisect every interval across which the entropy changes by more than ``jump``.

    Level crossings give entropy spikes far narrower than any practical sweep
    step; they sit next to the steepest drops, which this exposes.
    """
    evals = 0
    while evals < max_evals:
        new = [
            (xs[k] + xs[k + 1]) / 2.0
            for k in range(len(xs) - 1)
            if abs(ss[k + 1] - ss[k]) > jump and xs[k + 1] - xs[k] > min_width
        ]
        if not new:
            break
        new = new[: max_evals - evals]
        samples = dict(zip(xs, ss))
        for x in new:
            samples[x] = f(x)
        evals += len(new)
        xs = sorted(samples)
        ss = [samples[x] for x in xs]
    return xs, ss


def locate_peak(sr: SweepResult, evaluate: Callable[[float], float] | None = None,
                tol: float = 1e-4, jump: float = 0.05, max_evals: int = 200) -> tuple[float, float]:
    """Refine the sweep maximum with fresh evaluations.

    Intervals with an entropy jump above ``jump`` bits are first bisected down
    to ``tol``; the largest sample then brackets a bounded scalar search.
    """
    if sr.method is Method.ASYMPTOTIC:
        raise ValueError("peak location needs a finite-mu sweep")
    if len(sr.points) < 5:
        raise ValueError("need at least five sweep points")
    if not np.all(np.isfinite(sr.entropies)):
        raise ValueError("sweep contains divergent entropies")
    f = evaluate or default_peak_evaluator(sr)
    xs, ss = list(sr.params), list(sr.entropies)
    xs, ss = _resolve_jumps(xs, ss, f, jump, tol, max_evals)
    i = int(np.argmax(ss))
    if i == 0 or i == len(ss) - 1:
        raise PeakNotBracketedError(
            f"maximum of {sr.param_name} sweep at the range boundary {xs[i]}"
        )
    res = minimize_scalar(lambda v: -f(v), bounds=(xs[i - 1], xs[i + 1]), method="bounded",
                          options={"xatol": tol})
    best_x, best_s = float(res.x), float(-res.fun)
    if best_s < ss[i]:
        best_x, best_s = float(xs[i]), float(ss[i])
    return best_x, best_s


def fit_power_law(points: Sequence[tuple[float, float]], form: FitForm | str = FitForm.OFFSET,
                  x_c: float = 0.0) -> PowerLawFit:
    """Least squares of log|x* - x_c| on log mu; the common sign goes into c0."""
    form = FitForm(form)
    if form is FitForm.PLAIN:
        x_c = 0.0
    if len(points) < 3:
        raise ValueError("need at least three (mu, x*) points")
    mu = np.array([m for m, _ in points], dtype=float)
    dx = np.array([x for _, x in points], dtype=float) - x_c
    if np.any(dx == 0):
        raise ValueError("x* coincides with x_c")
    signs = np.sign(dx)
    if not np.all(signs == signs[0]):
        raise NonMonotoneApproachError(f"x* - x_c changes sign across mu: {dx}")
    X = np.log(mu)
    Y = np.log(np.abs(dx))
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    return PowerLawFit(
        form=form,
        c0=float(signs[0] * math.exp(intercept)),
        c1=float(-slope),
        residual_rms=float(math.sqrt(np.mean(resid ** 2))),
        mu_values=tuple(float(m) for m in mu),
    )


@dataclass(frozen=True)
class PeakScan:
    """Peak of entropy against one parameter at each mu, and the resulting fit."""

    model: Model
    param_name: str
    peaks: tuple[tuple[float, float, float], ...]  # (mu, param*, S*)
    fit: PowerLawFit | None


# Search windows for the finite-mu maximum near each model's transition.
# The butterfly window stays just below the level crossing at A2 = 1.
PEAK_WINDOWS = {
    Model.CUSP: ("A", (-0.8, 0.5), 53),
    Model.BUTTERFLY: ("A2", (0.7, 1.02), 33),
    Model.MOLAR: ("gamma", (0.9, 8.0), 30),
}

PEAK_REFERENCE = {Model.CUSP: 0.0, Model.BUTTERFLY: 1.0, Model.MOLAR: 1.0}


def peak_scan(template: CatastropheParams, mu_values: Sequence[float],
              window: tuple[float, float] | None = None, steps: int | None = None,
              resolution: float | int | None = None, tol: float = 1e-4) -> PeakScan:
    """Locate the entropy peak at each mu and fit its approach to the transition.

    Raises PeakNotBracketedError, naming mu, when any sweep has its maximum
    on the window edge.
    """
    name, default_window, default_steps = PEAK_WINDOWS[template.model]
    window = window or default_window
    steps = steps or default_steps
    if resolution is None:
        resolution = PEAK_POINTS_2D if template.model is Model.MOLAR else PEAK_SPACING_1D
    peaks = []
    for mu in mu_values:
        sr = sweep_entropy(template, name, window, steps, mu=mu, resolution=resolution)
        evaluate = partial(_evaluate, sr.template, name, Method.NUMERIC, resolution)
        try:
            x_star, s_star = locate_peak(sr, evaluate, tol)
        except PeakNotBracketedError as exc:
            raise PeakNotBracketedError(f"mu={mu}: {exc}") from exc
        peaks.append((float(mu), x_star, s_star))
    x_c = PEAK_REFERENCE[template.model]
    form = FitForm.PLAIN if x_c == 0.0 else FitForm.OFFSET
    fit = fit_power_law([(m, x) for m, x, _ in peaks], form, x_c) if len(peaks) >= 3 else None
    return PeakScan(template.model, name, tuple(peaks), fit)
