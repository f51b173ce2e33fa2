"""Catastrophe potentials, fixed points and their harmonic excitations.

All three models live in rescaled coordinates where the fixed points sit at
distances of order sqrt(mu) from the origin and the curvature at each fixed
point is independent of mu.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

STABILITY_TOL = 1e-12
DEGENERACY_RTOL = 1e-9
BUTTERFLY_A4 = -4.0 / math.sqrt(3.0)


class Model(str, enum.Enum):
    CUSP = "cusp"
    BUTTERFLY = "butterfly"
    MOLAR = "molar"

    @property
    def dim(self) -> int:
        return 2 if self is Model.MOLAR else 1


_PARAM_NAMES = {
    Model.CUSP: ("A",),
    Model.BUTTERFLY: ("A2", "A4"),
    Model.MOLAR: ("A", "gamma"),
}

_PARAM_DEFAULTS = {
    Model.CUSP: {},
    Model.BUTTERFLY: {"A4": BUTTERFLY_A4},
    Model.MOLAR: {"A": -1.0},
}


class CatastropheError(ValueError):
    """Invalid model, parameters or evaluation point."""


class FixedPointError(RuntimeError):
    """Polishing a stationary point failed to drive the gradient to zero."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual gradient norm {residual:.3e})")
        self.residual = residual


class MarginalPointError(RuntimeError):
    """A stationary point has a Hessian eigenvalue too close to zero to classify.

    ``points`` holds every fixed point found, the marginal ones flagged via
    ``FixedPoint.marginal``; callers that can tolerate marginal points away
    from the ground state can still use them.
    """

    def __init__(self, points: list["FixedPoint"]):
        bad = [fp.location for fp in points if fp.marginal]
        super().__init__(f"marginal fixed point(s) at {bad}")
        self.points = points


class UnstablePointError(ValueError):
    pass


@dataclass(frozen=True)
class CatastropheParams:
    """A member of one catastrophe family at a given macroscopy ``mu``.

    ``theta`` is the beam-splitter mixing angle between collective and bare
    modes; it only applies to the one-dimensional models.
    """

    model: Model
    mu: float
    params: Mapping[str, float] = field(default_factory=dict)
    theta: float | None = None

    def __post_init__(self):
        model = Model(self.model)
        object.__setattr__(self, "model", model)
        if not (self.mu > 0):
            raise CatastropheError(f"mu must be positive, got {self.mu}")
        merged = dict(_PARAM_DEFAULTS[model])
        for key, value in self.params.items():
            if key not in _PARAM_NAMES[model]:
                raise CatastropheError(f"unknown parameter {key!r} for model {model.value}")
            merged[key] = float(value)
        missing = [k for k in _PARAM_NAMES[model] if k not in merged]
        if missing:
            raise CatastropheError(f"missing parameter(s) {missing} for model {model.value}")
        object.__setattr__(self, "params", merged)
        if model is Model.MOLAR:
            if self.theta is not None:
                raise CatastropheError("theta does not apply to the molar model")
            if not merged["gamma"] > -1.0:
                raise CatastropheError(f"molar model requires gamma > -1, got {merged['gamma']}")
        elif self.theta is None:
            object.__setattr__(self, "theta", math.pi / 2)

    def __getitem__(self, key: str) -> float:
        return self.params[key]

    def replace(self, **changes) -> "CatastropheParams":
        """Copy with ``mu`` and/or individual control parameters changed."""
        mu = changes.pop("mu", self.mu)
        theta = changes.pop("theta", self.theta)
        params = dict(self.params)
        params.update(changes)
        return CatastropheParams(self.model, mu, params, theta)

    @property
    def dim(self) -> int:
        return self.model.dim


CatastrophePotential = CatastropheParams


def cusp(A: float, mu: float, theta: float = math.pi / 2) -> CatastropheParams:
    return CatastropheParams(Model.CUSP, mu, {"A": A}, theta)


def butterfly(A2: float, mu: float, A4: float = BUTTERFLY_A4, theta: float = math.pi / 2) -> CatastropheParams:
    return CatastropheParams(Model.BUTTERFLY, mu, {"A2": A2, "A4": A4}, theta)


def molar(gamma: float, mu: float, A: float = -1.0) -> CatastropheParams:
    return CatastropheParams(Model.MOLAR, mu, {"A": A, "gamma": gamma})


@dataclass(frozen=True)
class FixedPoint:
    location: tuple[float, ...]
    stable: bool
    excitation_energies: tuple[float, ...]
    well_energy: float
    normal_mode_angle: float | None = None
    hessian_eigenvalues: tuple[float, ...] = ()
    marginal: bool = False


def _as_point(p: CatastropheParams, y) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[0] != p.dim:
        raise CatastropheError(
            f"{p.model.value} potential takes {p.dim} coordinate(s), got {arr.shape[0]}"
        )
    return arr


def eval_potential(p: CatastropheParams, y) -> float:
    """Rescaled catastrophe potential at a single point ``y``."""
    y = _as_point(p, y)
    return float(potential_on(p, *y))


def potential_on(p: CatastropheParams, *coords):
    """Vectorised potential; pass one array per coordinate."""
    mu = p.mu
    if p.model is Model.CUSP:
        (y,) = coords
        y2 = y * y
        return y2 * y2 / (4.0 * mu) + 0.5 * p["A"] * y2
    if p.model is Model.BUTTERFLY:
        (y,) = coords
        y2 = y * y
        return 0.5 * p["A2"] * y2 + p["A4"] * y2 * y2 / (4.0 * mu) + y2 ** 3 / (6.0 * mu * mu)
    y1, y2 = coords
    s1, s2 = y1 * y1, y2 * y2
    return 0.5 * p["A"] * (s1 + s2) + (s1 * s1 + 2.0 * p["gamma"] * s1 * s2 + s2 * s2) / (4.0 * mu)


def gradient(p: CatastropheParams, y) -> np.ndarray:
    y = _as_point(p, y)
    mu = p.mu
    if p.model is Model.CUSP:
        return np.array([y[0] ** 3 / mu + p["A"] * y[0]])
    if p.model is Model.BUTTERFLY:
        t = y[0]
        return np.array([p["A2"] * t + p["A4"] * t ** 3 / mu + t ** 5 / mu ** 2])
    A, g = p["A"], p["gamma"]
    y1, y2 = y
    return np.array([
        A * y1 + (y1 ** 3 + g * y1 * y2 ** 2) / mu,
        A * y2 + (y2 ** 3 + g * y2 * y1 ** 2) / mu,
    ])


def hessian(p: CatastropheParams, y) -> np.ndarray:
    y = _as_point(p, y)
    mu = p.mu
    if p.model is Model.CUSP:
        return np.array([[3.0 * y[0] ** 2 / mu + p["A"]]])
    if p.model is Model.BUTTERFLY:
        t2 = y[0] ** 2
        return np.array([[p["A2"] + 3.0 * p["A4"] * t2 / mu + 5.0 * t2 * t2 / mu ** 2]])
    A, g = p["A"], p["gamma"]
    y1, y2 = y
    h11 = A + (3.0 * y1 ** 2 + g * y2 ** 2) / mu
    h22 = A + (3.0 * y2 ** 2 + g * y1 ** 2) / mu
    h12 = 2.0 * g * y1 * y2 / mu
    return np.array([[h11, h12], [h12, h22]])


def check_bounded_below(p: CatastropheParams) -> bool:
    """True if the leading even-order part of the potential is positive definite."""
    if p.mu <= 0:
        return False
    if p.model is Model.MOLAR:
        # y1^4 + 2 g y1^2 y2^2 + y2^4 is positive definite iff g > -1
        return p["gamma"] > -1.0
    return True


def _candidate_points(p: CatastropheParams) -> list[np.ndarray]:
    """Closed-form stationary points of each model, before polishing."""
    mu = p.mu
    if p.model is Model.CUSP:
        pts = [np.zeros(1)]
        if p["A"] < 0:
            r = math.sqrt(-mu * p["A"])
            pts += [np.array([r]), np.array([-r])]
        return pts
    if p.model is Model.BUTTERFLY:
        # y * (A2 + A4 u + u^2) = 0 with u = y^2 / mu
        A2, A4 = p["A2"], p["A4"]
        pts = [np.zeros(1)]
        disc = A4 * A4 - 4.0 * A2
        if disc >= 0:
            sq = math.sqrt(disc)
            roots = {(-A4 + sq) / 2.0, (-A4 - sq) / 2.0}
            for u in sorted(roots, reverse=True):
                if u > 0:
                    r = math.sqrt(mu * u)
                    pts += [np.array([r]), np.array([-r])]
        return pts
    A, g = p["A"], p["gamma"]
    pts = [np.zeros(2)]
    if A < 0:
        r = math.sqrt(-mu * A)
        pts += [np.array([r, 0.0]), np.array([-r, 0.0]), np.array([0.0, r]), np.array([0.0, -r])]
        if g != 1.0:
            d = math.sqrt(-mu * A / (1.0 + g))
            pts += [np.array([s1 * d, s2 * d]) for s1 in (1, -1) for s2 in (1, -1)]
    return pts


def _polish(p: CatastropheParams, y: np.ndarray, max_iter: int = 20) -> np.ndarray:
    """Newton iterations on the gradient; no-op for points already exact."""
    scale = max(1.0, abs(eval_potential(p, y)))
    for _ in range(max_iter):
        g = gradient(p, y)
        if np.linalg.norm(g) < 1e-12 * scale:
            return y
        H = hessian(p, y)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        y = y - step
    res = float(np.linalg.norm(gradient(p, y)))
    if res >= 1e-10 * scale:
        raise FixedPointError(f"Newton polish did not converge at {y}", res)
    return y


def _mode_angle(vecs: np.ndarray) -> float:
    """Angle in [0, pi/2) between the stiffest normal mode and the y1 axis."""
    v = vecs[:, -1]
    return float(math.atan2(abs(v[1]), abs(v[0]))) % (math.pi / 2)


def _classify(p: CatastropheParams, y: np.ndarray) -> FixedPoint:
    H = hessian(p, y)
    evals, evecs = np.linalg.eigh(H)
    marginal = bool(np.any(np.abs(evals) <= STABILITY_TOL))
    stable = bool(np.all(evals > STABILITY_TOL))
    eps = tuple(float(math.sqrt(e)) for e in evals[::-1]) if stable else ()
    angle = _mode_angle(evecs) if p.dim == 2 else None
    return FixedPoint(
        location=tuple(float(v) for v in y),
        stable=stable,
        excitation_energies=eps,
        well_energy=eval_potential(p, y),
        normal_mode_angle=angle,
        hessian_eigenvalues=tuple(float(e) for e in evals[::-1]),
        marginal=marginal,
    )


def find_fixed_points(p: CatastropheParams, allow_marginal: bool = False) -> list[FixedPoint]:
    """All real stationary points, ordered by well energy then location.

    Raises MarginalPointError when a Hessian eigenvalue falls inside
    [-1e-12, 1e-12] unless ``allow_marginal`` is set.  The molar model at
    gamma == 1 with A < 0 has a continuous ring of minima; only its axis
    representatives are returned and they are marginal.
    """
    if not check_bounded_below(p):
        raise CatastropheError(f"potential {p} is not bounded from below")
    points = [_classify(p, _polish(p, y)) for y in _candidate_points(p)]
    points.sort(key=lambda fp: (fp.well_energy, tuple(-v for v in fp.location)))
    if not allow_marginal and any(fp.marginal for fp in points):
        raise MarginalPointError(points)
    return points


def excitation_energies(p: CatastropheParams, fp: FixedPoint) -> tuple[tuple[float, ...], float | None]:
    """Harmonic excitation energies at ``fp`` (largest first) and, in 2D, the normal-mode angle.

    The mode angle is 0 when the normal modes coincide with the y axes and
    pi/4 when they lie along the diagonals.
    """
    evals, evecs = np.linalg.eigh(hessian(p, fp.location))
    if np.any(evals <= STABILITY_TOL):
        raise UnstablePointError(f"point {fp.location} is not stable (Hessian eigenvalues {evals})")
    eps = tuple(float(math.sqrt(e)) for e in evals[::-1])
    angle = _mode_angle(evecs) if p.dim == 2 else None
    return eps, angle


@dataclass(frozen=True)
class CriticalExponents:
    nu: float
    z: float

    @staticmethod
    def xi(epsilon: float) -> float:
        """Correlation length from an excitation energy."""
        return epsilon ** -0.5


CUSP_EXPONENTS = CriticalExponents(nu=0.25, z=2.0)


def max_displacement(p: CatastropheParams) -> float:
    """Largest |coordinate| over all stationary points (0 for a single well at the origin)."""
    pts = find_fixed_points(p, allow_marginal=True)
    return max(max(abs(v) for v in fp.location) for fp in pts)


def describe(p: CatastropheParams) -> dict:
    """Plain-dict summary used by the CLI's fixed-points command."""
    return {
        "model": p.model.value,
        "mu": p.mu,
        "params": dict(p.params),
        "theta": p.theta,
    }


def param_names(model: str | Model) -> tuple[str, ...]:
    return _PARAM_NAMES[Model(model)]
