"""Entanglement entropy in the macroscopic limit mu -> infinity.

Each stable well contributes a Gaussian lobe whose single-mode reduced
density kernel is fixed by one number, the ratio 2*alpha/beta.  Wells of
equal bottom energy combine into a multi-lobe state whose entropy picks up a
mixing contribution.  Entropies are in bits; a critical (divergent) entropy is
returned as ``math.inf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .potentials import (
    DEGENERACY_RTOL,
    CatastropheError,
    CatastropheParams,
    FixedPoint,
    Model,
    find_fixed_points,
    hessian,
)

LN2 = math.log(2.0)


class NoMixingError(ValueError):
    """theta = 0 or pi: the collective and bare modes coincide."""


class LobeKind(str, enum.Enum):
    COHERENT = "coherent"
    INCOHERENT = "incoherent"


def ratio_general_theta(epsilon1: float, theta: float) -> float:
    """2*alpha/beta for a displaced 1D well of frequency ``epsilon1`` mixed at angle ``theta``."""
    if epsilon1 <= 0:
        raise ValueError(f"epsilon1 must be positive, got {epsilon1}")
    if not 0.0 < theta < math.pi:
        raise NoMixingError(f"theta={theta} gives no mode mixing; the ratio is undefined")
    if epsilon1 == 1.0:
        return math.inf
    half = theta / 2.0
    t2 = math.tan(half) ** 2
    return ((epsilon1 + 1.0) ** 2 + 2.0 * epsilon1 * (1.0 / t2 + t2)) / (epsilon1 - 1.0) ** 2


def entropy_from_ratio(ratio: float) -> float:
    """Von Neumann entropy (bits) of the Gaussian kernel with the given 2*alpha/beta.

    The kernel is a thermal oscillator state with Omega/T = arccosh(ratio).
    """
    if math.isnan(ratio) or ratio < 1.0:
        raise ValueError(f"2alpha/beta must be >= 1, got {ratio}")
    if ratio == 1.0:
        return math.inf
    if math.isinf(ratio):
        return 0.0
    x = 0.5 * math.acosh(ratio)
    # x coth x - ln(2 sinh x), written to stay accurate for large x
    s = x / math.tanh(x) - x - math.log1p(-math.exp(-2.0 * x))
    return max(s, 0.0) / LN2


def ratio_molar_diagonal(gamma: float) -> float:
    """2*alpha/beta of one diagonal lobe of the molar catastrophe, 0 < gamma < 1."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"diagonal lobes need 0 < gamma < 1, got {gamma}")
    g2 = gamma * gamma
    return (4.0 - 3.0 * g2 + 4.0 * math.sqrt(1.0 - g2)) / g2


def gaussian_mode_ratio(stiffness: np.ndarray) -> float:
    """2*alpha/beta for mode 0 of the ground state of H = p.p/2 + y.K.y/2.

    Works from the covariances <y y> = K^{-1/2}/2 and <p p> = K^{1/2}/2; the
    reduced state of mode 0 has symplectic eigenvalue nu with
    4 nu^2 = (K^{1/2})_00 (K^{-1/2})_00.
    """
    evals, evecs = np.linalg.eigh(np.asarray(stiffness, dtype=float))
    if np.any(evals <= 0):
        raise ValueError("stiffness matrix must be positive definite")
    root = evals ** 0.5
    w = evecs[0] ** 2
    four_nu2 = float(np.dot(w, root) * np.dot(w, 1.0 / root))
    if four_nu2 <= 1.0 + 1e-15:
        return math.inf
    return (four_nu2 + 1.0) / (four_nu2 - 1.0)


@dataclass(frozen=True)
class GaussianLobe:
    center: tuple[float, ...]
    epsilons: tuple[float, ...]
    mode_angle: float
    ratio: float
    entropy_bits: float


@dataclass(frozen=True)
class LobeSet:
    lobes: tuple[GaussianLobe, ...]
    weights: tuple[float, ...]
    kind: LobeKind = LobeKind.COHERENT
    pairwise_orthogonal: bool = True
    model: Model | None = None

    def __post_init__(self):
        if len(self.lobes) != len(self.weights) or not self.lobes:
            raise ValueError("need one positive weight per lobe")
        if any(w <= 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must be positive and sum to 1, got {self.weights}")


def _lobe_for(p: CatastropheParams, fp: FixedPoint) -> GaussianLobe:
    eps = fp.excitation_energies
    if p.model is Model.MOLAR:
        # partition is y1 | y2 with no extra rotation
        ratio = gaussian_mode_ratio(hessian(p, fp.location))
        angle = fp.normal_mode_angle or 0.0
    else:
        ratio = ratio_general_theta(eps[0], p.theta)
        angle = p.theta / 2.0
    return GaussianLobe(fp.location, eps, angle, ratio, entropy_from_ratio(ratio))


def _is_ground(fp: FixedPoint, e_min: float) -> bool:
    return fp.well_energy - e_min <= DEGENERACY_RTOL * max(1.0, abs(e_min))


def select_ground_lobes(p: CatastropheParams, fps: Sequence[FixedPoint]) -> LobeSet:
    """Stable wells of lowest bottom energy, as an equal-weight coherent superposition."""
    stable = [fp for fp in fps if fp.stable]
    if not stable:
        raise CatastropheError(f"{p} has no stable fixed point")
    e_min = min(fp.well_energy for fp in stable)
    ground = [fp for fp in stable if _is_ground(fp, e_min)]
    lobes = tuple(_lobe_for(p, fp) for fp in ground)
    n = len(lobes)
    return LobeSet(
        lobes=lobes,
        weights=(1.0 / n,) * n,
        kind=LobeKind.COHERENT,
        pairwise_orthogonal=_projections_distinct(p, ground),
        model=p.model,
    )


def _projections_distinct(p: CatastropheParams, fps: Sequence[FixedPoint]) -> bool:
    """Whether the lobes project onto pairwise distinct points of the kept mode.

    1D lobes are separated along y1, which has a nonzero component along x1
    for every theta in (0, pi).  Molar lobes are judged on the y1 coordinate.
    """
    if len(fps) < 2:
        return True
    xs = [round(fp.location[0], 9) for fp in fps]
    return len(set(xs)) == len(xs)


def _mixing_bound(ls: LobeSet) -> tuple[float, float]:
    mean = sum(w * lobe.entropy_bits for w, lobe in zip(ls.weights, ls.lobes))
    mix = -sum(w * math.log2(w) for w in ls.weights)
    return mean, mean + mix


def _projected_mixture_entropy(ls: LobeSet, coherent: bool) -> float:
    """Entropy of the mode-1 state built from lobes that may share a projection.

    In the macroscopic limit, lobes sitting at distinct kept-mode coordinates
    are orthogonal.  The traced-mode coordinates decide coherence between
    kept-mode branches: two lobes interfere in the reduced state only when
    they share a traced-mode coordinate.
    """
    lobe_entropy = ls.lobes[0].entropy_bits
    if any(abs(l.entropy_bits - lobe_entropy) > 1e-12 for l in ls.lobes):
        raise ValueError("lobes with shared projections must be identical")
    kept = sorted({round(l.center[0], 9) for l in ls.lobes})
    traced = sorted({round(l.center[1], 9) for l in ls.lobes})
    amp = np.zeros((len(kept), len(traced)))
    for w, lobe in zip(ls.weights, ls.lobes):
        i = kept.index(round(lobe.center[0], 9))
        j = traced.index(round(lobe.center[1], 9))
        amp[i, j] += math.sqrt(w)
    if coherent:
        rho = amp @ amp.T
    else:
        rho = np.diag((amp ** 2).sum(axis=1))
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-14]
    return float(-(p * np.log2(p)).sum()) + lobe_entropy


def combine_lobe_entropy(ls: LobeSet) -> float:
    """Total mode entropy of a multi-lobe state (bits).

    Orthogonal lobes saturate the upper mixing bound.  Molar lobes that share
    a kept-mode projection are combined through the macroscopic amplitude
    matrix between kept and traced coordinates; this gives 1 bit for the
    coherent four-lobe state on the axes, 3/2 for its incoherent counterpart,
    and zero mixing for the diagonal lobes, which factorise macroscopically.
    """
    if len(ls.lobes) == 1:
        return ls.lobes[0].entropy_bits
    if any(math.isinf(l.entropy_bits) for l in ls.lobes):
        return math.inf
    lower, upper = _mixing_bound(ls)
    two_d = len(ls.lobes[0].center) == 2
    if not two_d:
        if not ls.pairwise_orthogonal:
            raise ValueError("1D lobes at distinct fixed points are always orthogonal")
        return upper
    geometric = _projections_distinct_centers(ls)
    if geometric != ls.pairwise_orthogonal:
        raise ValueError("pairwise_orthogonal flag contradicts the lobe geometry")
    if ls.pairwise_orthogonal:
        return upper
    return _projected_mixture_entropy(ls, ls.kind is LobeKind.COHERENT)


def _projections_distinct_centers(ls: LobeSet) -> bool:
    xs = [round(l.center[0], 9) for l in ls.lobes]
    return len(set(xs)) == len(xs)


def asymptotic_entropy(p: CatastropheParams, kind: LobeKind = LobeKind.COHERENT) -> float:
    """mu -> infinity ground-state entropy between the bare modes (bits).

    Returns ``math.inf`` when the ground wells are critical (a vanishing
    excitation energy), e.g. the cusp at A = 0 or the molar model at gamma = 1.
    """
    fps = find_fixed_points(p, allow_marginal=True)
    stable = [fp for fp in fps if fp.stable]
    marginal = [fp for fp in fps if fp.marginal]
    if marginal:
        e_min = min(fp.well_energy for fp in stable) if stable else math.inf
        if any(fp.well_energy <= e_min or _is_ground(fp, e_min) for fp in marginal):
            return math.inf
    ls = select_ground_lobes(p, fps)
    if kind is not LobeKind.COHERENT:
        ls = LobeSet(ls.lobes, ls.weights, kind, ls.pairwise_orthogonal, ls.model)
    return combine_lobe_entropy(ls)
