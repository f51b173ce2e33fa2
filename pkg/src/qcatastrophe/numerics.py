"""Finite-mu ground states and their bare-mode entanglement.

One-dimensional models are solved on a uniform grid for the catastrophe mode
alone; the harmonic partner mode stays in its vacuum, so the two-mode state
follows from a Fock projection and a beam-splitter rotation.  The molar model
is solved directly on a two-dimensional grid.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh
from scipy.special import gammaln

from .potentials import (
    CatastropheError,
    CatastropheParams,
    Model,
    find_fixed_points,
    max_displacement,
    potential_on,
)

log = logging.getLogger(__name__)

PotentialLike = Union[CatastropheParams, Callable[[np.ndarray], np.ndarray]]

EIG_CUTOFF = 1e-14
TAIL_TOL = 1e-8
BOUNDARY_TOL = 1e-6
MAX_2D_POINTS = 1024


class NumericsError(RuntimeError):
    pass


class DomainTooSmallError(NumericsError):
    pass


class TruncationError(NumericsError):
    pass


class InvalidDensityMatrixError(NumericsError):
    pass


class ConvergenceError(NumericsError):
    def __init__(self, message: str, history: list[tuple]):
        super().__init__(f"{message}; history={history}")
        self.history = history


@dataclass(frozen=True)
class Grid1D:
    y_min: float
    y_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError(f"grid needs at least 64 points, got {self.n_points}")
        if not self.y_max > self.y_min:
            raise ValueError("y_max must exceed y_min")

    @property
    def spacing(self) -> float:
        return (self.y_max - self.y_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_points)

    @classmethod
    def symmetric(cls, half_width: float, spacing: float) -> "Grid1D":
        n = int(math.ceil(half_width / spacing))
        n = max(2 * n + 1, 65)
        return cls(-half_width, half_width, n)


class Basis(str, enum.Enum):
    GRID = "grid"
    FOCK = "fock"


@dataclass(frozen=True)
class TwoModeState:
    """Pure two-mode state; ``amplitudes[i, j]`` indexes mode 1 then mode 2.

    On a grid the amplitudes are wavefunction samples and ``spacing`` is the
    quadrature weight per axis; in the Fock basis ``spacing`` is 1.
    """

    amplitudes: np.ndarray
    basis: Basis
    spacing: float = 1.0

    @property
    def norm(self) -> float:
        return float(math.sqrt(np.sum(self.amplitudes ** 2)) * self.spacing)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    entries: np.ndarray
    basis: Basis


def _potential_values(p: PotentialLike, y: np.ndarray) -> np.ndarray:
    if isinstance(p, CatastropheParams):
        if p.dim != 1:
            raise CatastropheError("solve_1d_ground_state needs a one-dimensional model")
        return potential_on(p, y)
    return np.asarray(p(y), dtype=float)


def _is_even(values: np.ndarray) -> bool:
    return bool(np.allclose(values, values[::-1], rtol=1e-12, atol=1e-12))


def solve_1d_ground_state(p: PotentialLike, grid: Grid1D) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of -1/2 d^2/dy^2 + V(y) with a three-point Laplacian.

    The wavefunction is normalised so that sum(psi**2) * spacing == 1 and has
    a nonnegative integral.  For an even potential on a grid symmetric about
    the origin the solve is restricted to even functions: deep double wells
    have an exponentially small even/odd splitting, and an unrestricted
    inverse iteration can return a state localised in one well.
    """
    y = grid.points
    h = grid.spacing
    V = _potential_values(p, y)
    n = grid.n_points
    symmetric = n % 2 == 1 and abs(grid.y_min + grid.y_max) < 1e-12 * grid.y_max and _is_even(V)
    try:
        if symmetric:
            mid = n // 2
            diag = 1.0 / h ** 2 + V[mid:]
            off = np.full(diag.size - 1, -0.5 / h ** 2)
            # half-cell weight at the origin, symmetrised
            off[0] = -1.0 / (math.sqrt(2.0) * h ** 2)
            w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
            half = v[:, 0].copy()
            half[0] *= math.sqrt(2.0)
            vec = np.concatenate([half[:0:-1], half])
        else:
            diag = 1.0 / h ** 2 + V
            off = np.full(n - 1, -0.5 / h ** 2)
            w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
            vec = v[:, 0]
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"tridiagonal eigensolver failed: {exc}") from exc
    psi = vec / math.sqrt(np.dot(vec, vec) * h)
    if psi.sum() < 0:
        psi = -psi
    edge = max(abs(psi[0]), abs(psi[-1]))
    if edge > BOUNDARY_TOL:
        raise DomainTooSmallError(
            f"|psi| = {edge:.2e} at the grid edge [{grid.y_min}, {grid.y_max}]; widen the domain"
        )
    return float(w[0]), psi


def hermite_functions(y: np.ndarray, n_max: int) -> np.ndarray:
    """Unit-frequency oscillator eigenfunctions phi_0..phi_n_max sampled at ``y``.

    Uses the normalised three-term recurrence, which is stable for large n.
    """
    out = np.empty((n_max + 1, y.size))
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * y * y)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(2, n_max + 1):
        out[n] = math.sqrt(2.0 / n) * y * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def fock_coefficients(psi: np.ndarray, grid: Grid1D, n_max: int, check: bool = True) -> np.ndarray:
    """Amplitudes c_n = <n|psi> on unit-frequency Hermite functions, n = 0..n_max."""
    basis = hermite_functions(grid.points, n_max)
    c = basis @ psi * grid.spacing
    if check:
        tail = 1.0 - float(np.dot(c, c))
        if tail > TAIL_TOL:
            raise TruncationError(f"Fock truncation at n_max={n_max} misses probability {tail:.2e}; increase n_max")
    return c


def beam_splitter_amplitudes(c1: np.ndarray, theta: float) -> np.ndarray:
    """Two-mode amplitudes M[k, m] of (sum_n c1[n] |n>) (x) |0> after the rotation.

    Each |n, 0> goes to sum_k sqrt(C(n, k)) cos^k(theta/2) (-sin(theta/2))^(n-k) |k, n-k>.
    """
    c1 = np.asarray(c1, dtype=float)
    n_max = c1.size - 1
    k = np.arange(n_max + 1)[:, None]
    m = np.arange(n_max + 1)[None, :]
    n = k + m
    inside = n <= n_max
    cos_h, sin_h = math.cos(theta / 2.0), math.sin(theta / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_binom = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(m + 1))
        log_c = np.where(k > 0, k * np.log(abs(cos_h)), 0.0) if cos_h != 0 else np.where(k > 0, -np.inf, 0.0)
        log_s = np.where(m > 0, m * np.log(abs(sin_h)), 0.0) if sin_h != 0 else np.where(m > 0, -np.inf, 0.0)
        mag = np.exp(log_binom + log_c + log_s)
    sign = np.where(k % 2 == 1, np.sign(cos_h), 1.0) * np.where(m % 2 == 1, -np.sign(sin_h), 1.0)
    amps = np.where(inside, mag * sign, 0.0)
    weights = np.zeros_like(amps)
    weights[inside] = c1[n[inside]]
    return amps * weights


def beam_splitter_rotate(c1: np.ndarray, theta: float) -> TwoModeState:
    return TwoModeState(beam_splitter_amplitudes(c1, theta), Basis.FOCK)


def reduced_density_matrix(state: TwoModeState, traced_mode: int = 1) -> ReducedDensityMatrix:
    """Trace out mode ``traced_mode`` (0 or 1) of a pure two-mode state."""
    if traced_mode not in (0, 1):
        raise ValueError("traced_mode must be 0 or 1")
    amps = state.amplitudes if traced_mode == 1 else state.amplitudes.T
    amps = amps * state.spacing
    rho = amps @ amps.T
    rho = 0.5 * (rho + rho.T)
    return ReducedDensityMatrix(rho, state.basis)


def von_neumann_entropy(rdm: ReducedDensityMatrix | np.ndarray) -> float:
    """Entropy in bits; eigenvalues at or below 1e-14 are dropped."""
    rho = rdm.entries if isinstance(rdm, ReducedDensityMatrix) else np.asarray(rdm, dtype=float)
    p = np.linalg.eigvalsh(rho)
    if p.min() < -1e-8:
        raise InvalidDensityMatrixError(f"density matrix has eigenvalue {p.min():.3e}")
    p = p[p > EIG_CUTOFF]
    return float(max(-(p * np.log2(p)).sum(), 0.0))


def schmidt_entropy(amplitudes: np.ndarray, weight: float = 1.0) -> float:
    """Entanglement entropy from the singular values of a two-mode amplitude matrix."""
    s = np.linalg.svd(amplitudes * weight, compute_uv=False)
    p = s * s
    p = p[p > EIG_CUTOFF]
    return float(max(-(p * np.log2(p)).sum(), 0.0))


# -- one-dimensional pipeline -------------------------------------------------


def _harmonic_extent(V: Callable[[np.ndarray], np.ndarray], center: float, v_floor: float, rise: float) -> float:
    """Distance from the origin at which V exceeds its floor by ``rise`` on both sides."""
    L = max(abs(center), 1.0) + 4.0
    for _ in range(200):
        if V(np.array([L]))[0] - v_floor >= rise and V(np.array([-L]))[0] - v_floor >= rise:
            return L
        L *= 1.15
    raise NumericsError("potential does not rise; is it bounded below?")


def default_grid_1d(p: PotentialLike, spacing: float) -> Grid1D:
    """Symmetric grid covering every fixed point with room for the wavefunction tails."""
    V = lambda y: _potential_values(p, y)  # noqa: E731
    if isinstance(p, CatastropheParams):
        fps = find_fixed_points(p, allow_marginal=True)
        center = max(abs(fp.location[0]) for fp in fps)
        stiff = [fp.excitation_energies[0] for fp in fps if fp.stable]
        v_floor = min(fp.well_energy for fp in fps)
        margin = 5.0 / math.sqrt(min(stiff)) if stiff else 5.0
    else:
        y = np.linspace(-50, 50, 20001)
        vals = V(y)
        v_floor = float(vals.min())
        center = float(abs(y[np.argmin(vals)]))
        margin = 5.0
    L = max(_harmonic_extent(V, center, v_floor, 60.0), center + margin)
    return Grid1D.symmetric(L, spacing)


def initial_n_max(p: PotentialLike) -> int:
    """Starting Fock truncation: 4 * max(y_max^2, 10), with y_max the widest fixed point."""
    if isinstance(p, CatastropheParams):
        fps = find_fixed_points(p, allow_marginal=True)
        y2 = max(fp.location[0] ** 2 for fp in fps)
    else:
        y2 = 0.0
    return int(math.ceil(4.0 * max(y2, 10.0)))


def collective_fock_state(psi: np.ndarray, grid: Grid1D, n_max: int, max_growth: int = 8) -> np.ndarray:
    """Fock amplitudes of ``psi``, growing the truncation by 50% until the tail is below 1e-8."""
    n = n_max
    for _ in range(max_growth):
        c = fock_coefficients(psi, grid, n, check=False)
        tail = 1.0 - float(np.dot(c, c))
        if tail <= TAIL_TOL:
            return c
        n = int(math.ceil(1.5 * n))
    raise TruncationError(f"Fock tail {tail:.2e} still above {TAIL_TOL} at n_max={n}")


def entropy_1d(p: PotentialLike, theta: float = math.pi / 2, spacing: float = 0.02,
               n_max: int | None = None) -> float:
    """Bare-mode entropy at one fixed grid spacing: solve, project, rotate, trace."""
    grid = default_grid_1d(p, spacing)
    _, psi = solve_1d_ground_state(p, grid)
    c = collective_fock_state(psi, grid, n_max or initial_n_max(p))
    amps = beam_splitter_amplitudes(c / np.linalg.norm(c), theta)
    return schmidt_entropy(amps)


def _refine(evaluate: Callable[[float], float], spacing: float, tol: float, max_levels: int) -> tuple[float, float]:
    """Halve the spacing until successive entropies differ by less than ``tol``."""
    history = []
    prev = evaluate(spacing)
    history.append((spacing, prev))
    for _ in range(max_levels):
        spacing /= 2.0
        cur = evaluate(spacing)
        history.append((spacing, cur))
        if abs(cur - prev) < tol:
            return cur, spacing
        prev = cur
    raise ConvergenceError("grid refinement did not converge", history)


# -- two-dimensional (molar) solver -------------------------------------------


def molar_half_width(p: CatastropheParams) -> float:
    return max_displacement(p) + 6.0


def laplacian_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h ** 2


@dataclass(frozen=True)
class GroundState2D:
    state: TwoModeState
    energy: float
    gap: float
    grid: Grid1D


def solve_2d_ground_state(p: CatastropheParams, n_points: int = 256,
                          half_width: float | None = None,
                          max_points: int = MAX_2D_POINTS) -> GroundState2D:
    """Ground state of the molar Hamiltonian with a five-point Laplacian.

    Uses shift-invert Lanczos on the sparse operator and also returns the gap
    to the first excited state, which is exponentially small when the four
    wells are deep.
    """
    if p.model is not Model.MOLAR:
        raise CatastropheError("solve_2d_ground_state needs the molar model")
    if n_points > max_points:
        raise NumericsError(
            f"{n_points}^2 grid exceeds the cap of {max_points}^2 points; use a coarser grid"
        )
    L = half_width if half_width is not None else molar_half_width(p)
    grid = Grid1D(-L, L, n_points)
    h = grid.spacing
    y = grid.points
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    V = potential_on(p, Y1, Y2).ravel()
    lap = laplacian_1d(n_points, h)
    eye = sp.identity(n_points, format="csr")
    H = (-0.5 * (sp.kron(lap, eye) + sp.kron(eye, lap)) + sp.diags(V)).tocsc()
    shift = float(V.min()) - 1.0
    v0 = np.exp(-0.05 * (Y1 ** 2 + Y2 ** 2)).ravel()
    vals, vecs = eigsh(H, k=2, sigma=shift, which="LM", v0=v0, tol=1e-12)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    gap = float(vals[1] - vals[0])
    if gap < 1e-8:
        log.warning("molar ground state nearly degenerate (gap %.2e); result may mix states", gap)
    psi = vecs[:, 0].reshape(n_points, n_points)
    if psi.sum() < 0:
        psi = -psi
    psi /= math.sqrt(np.sum(psi ** 2)) * h
    edge = max(np.abs(psi[[0, -1], :]).max(), np.abs(psi[:, [0, -1]]).max())
    if edge > BOUNDARY_TOL:
        raise DomainTooSmallError(f"|psi| = {edge:.2e} at the 2D grid edge; widen the domain")
    return GroundState2D(TwoModeState(psi, Basis.GRID, h), float(vals[0]), gap, grid)


def entropy_2d(p: CatastropheParams, n_points: int = 256, half_width: float | None = None) -> float:
    gs = solve_2d_ground_state(p, n_points, half_width)
    return schmidt_entropy(gs.state.amplitudes, gs.state.spacing)


# -- pipeline entry point -----------------------------------------------------


def finite_mu_entropy(p: PotentialLike, theta: float | None = None, spacing: float | None = None,
                      n_points: int | None = None, tol: float = 1e-4, max_levels: int = 4) -> float:
    """Bare-mode ground-state entropy at finite mu (bits).

    With ``spacing`` (1D) or ``n_points`` (molar) fixed, a single solve is
    done.  Otherwise the grid is refined until the entropy moves by less than
    ``tol`` between levels.
    """
    if isinstance(p, CatastropheParams) and p.model is Model.MOLAR:
        if n_points is not None:
            return entropy_2d(p, n_points)
        history = []
        n = 128
        prev = entropy_2d(p, n)
        history.append((n, prev))
        for _ in range(max_levels):
            n = 2 * n
            if n > MAX_2D_POINTS:
                break
            cur = entropy_2d(p, n)
            history.append((n, cur))
            if abs(cur - prev) < tol:
                return cur
            prev = cur
        raise ConvergenceError("2D grid refinement did not converge", history)
    if theta is None:
        theta = p.theta if isinstance(p, CatastropheParams) else math.pi / 2
    if spacing is not None:
        return entropy_1d(p, theta, spacing)
    value, _ = _refine(lambda h: entropy_1d(p, theta, h), 0.04, tol, max_levels)
    return value


# -- second-quantised cusp Hamiltonian ------------------------------------------


def _ladder(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n)), 1, format="csr")


def build_cusp_fock_hamiltonian(A: float, mu: float, n_max: int) -> sp.csr_matrix:
    """Two-mode cusp Hamiltonian at theta = pi/2 in the bare-mode Fock basis.

    Basis index is n1 * (n_max + 1) + n2.  Operator products are formed with
    four extra levels per mode and then cut back, so every kept matrix
    element is exact.
    """
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    pad = 4
    dim = n_max + 1 + pad
    a = _ladder(dim)
    ad = a.T.tocsr()
    eye = sp.identity(dim, format="csr")
    a1, a2 = sp.kron(a, eye, format="csr"), sp.kron(eye, a, format="csr")
    a1d, a2d = sp.kron(ad, eye, format="csr"), sp.kron(eye, ad, format="csr")
    n1, n2 = a1d @ a1, a2d @ a2
    one = sp.identity(dim * dim, format="csr")
    X = a1d + a1 + a2d + a2
    X2 = X @ X
    H = (
        (A + 3.0) / 4.0 * (n1 + n2 + one)
        + (A - 1.0) / 8.0 * (a1d @ a1d + a1 @ a1 + a2d @ a2d + a2 @ a2)
        + (A - 1.0) / 4.0 * (a1d @ a2 + a1 @ a2d + a1d @ a2d + a1 @ a2)
        + (X2 @ X2) / (64.0 * mu)
    )
    idx = np.arange(dim)
    keep1, keep2 = np.meshgrid(idx, idx, indexing="ij")
    mask = ((keep1 <= n_max) & (keep2 <= n_max)).ravel()
    H = H.tocsr()[mask][:, mask]
    return ((H + H.T) * 0.5).tocsr()


def fock_cusp_entropy(A: float, mu: float, n_max: int) -> float:
    """Entropy of mode x1 in the ground state of the second-quantised cusp Hamiltonian."""
    H = build_cusp_fock_hamiltonian(A, mu, n_max)
    vals, vecs = eigsh(H, k=1, which="SA", tol=1e-12)
    amps = vecs[:, 0].reshape(n_max + 1, n_max + 1)
    return schmidt_entropy(amps)
