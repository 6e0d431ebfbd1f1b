"""Nonlinear thermodynamic formalism for multiple ergodic averages.

Solves the fixed-point equation of the nonlinear transfer operator, builds
the pressure function and its Legendre transform (the Hausdorff spectrum of
the averages), the associated Markov measure, and the Ruelle-type dimension
formula. Dimensions are reported normalized to [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConvergenceError, ValidationError

#: Returned by spectrum queries for levels whose level set is empty.
OUT_OF_DOMAIN = float("nan")

#: Parameter magnitude used to approximate the s -> +/-inf endpoints.
ENDPOINT_S = 40.0

_FIXED_POINT_TOL = 1e-14
_FIXED_POINT_CAP = 100_000


@dataclass(frozen=True)
class Potential:
    """A table phi: A^d -> R driving the average over (x_k, x_{qk}, ..., x_{q^{d-1}k}).

    The table is stored as an array of shape (m,) * d indexed by symbol tuples.
    """

    m: int
    q: int
    d: int
    table: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"m must be >= 2, got {self.m}")
        if self.q < 2:
            raise ValidationError(f"q must be >= 2, got {self.q}")
        if self.d < 2:
            raise ValidationError(f"d must be >= 2, got {self.d}")
        table = np.asarray(self.table, dtype=float)
        if table.shape != (self.m,) * self.d:
            raise ValidationError(
                f"table must have shape {(self.m,) * self.d}, got {table.shape}"
            )
        if not np.all(np.isfinite(table)):
            raise ValidationError("table contains non-finite entries")
        object.__setattr__(self, "table", table)

    @property
    def alpha_min(self) -> float:
        return float(self.table.min())

    @property
    def alpha_max(self) -> float:
        return float(self.table.max())

    @property
    def is_constant(self) -> bool:
        return self.alpha_min == self.alpha_max

    @classmethod
    def from_values(cls, m: int, q: int, d: int, values) -> "Potential":
        """Build from a dict {symbol tuple: value} or an array."""
        if isinstance(values, dict):
            table = np.empty((m,) * d)
            table.fill(np.nan)
            for key, val in values.items():
                table[tuple(key)] = val
            if np.isnan(table).any():
                raise ValidationError("potential table is incomplete")
        else:
            table = np.asarray(values, dtype=float)
        return cls(m=m, q=q, d=d, table=table)

    @classmethod
    def from_json(cls, text: str) -> "Potential":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"invalid potential JSON: {e}") from e
        try:
            m, q, d = int(doc["m"]), int(doc["q"]), int(doc["d"])
            entries = doc["table"]
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed potential document: {e}") from e
        if m > 10:
            raise ValidationError("string-keyed JSON tables support m <= 10")
        values = {}
        for key, val in entries.items():
            if len(key) != d or not all(c.isdigit() for c in key):
                raise ValidationError(f"bad table key {key!r}")
            sym = tuple(int(c) for c in key)
            if any(a >= m for a in sym):
                raise ValidationError(f"table key {key!r} outside alphabet of size {m}")
            values[sym] = float(val)
        if len(values) != m**d:
            raise ValidationError(f"table must have exactly {m ** d} entries, got {len(values)}")
        return cls.from_values(m, q, d, values)

    def to_json(self) -> str:
        entries = {
            "".join(map(str, idx)): float(self.table[idx])
            for idx in np.ndindex(*self.table.shape)
        }
        return json.dumps({"m": self.m, "q": self.q, "d": self.d, "table": entries})


def rademacher_potential(q: int, d: int) -> Potential:
    """Tensor product of 2a-1 factors on the binary alphabet."""
    table = np.ones((2,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = 2
        table = table * np.array([-1.0, 1.0]).reshape(shape)
    return Potential(m=2, q=q, d=d, table=table)


def indicator_potential(q: int, d: int) -> Potential:
    """Product of the symbols themselves on the binary alphabet (x_k * x_{qk} * ...)."""
    table = np.ones((2,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = 2
        table = table * np.array([0.0, 1.0]).reshape(shape)
    return Potential(m=2, q=q, d=d, table=table)


@dataclass(frozen=True)
class PsiSolution:
    """Positive level functions psi^(k) on A^k for k = 1..d-1 at parameter s.

    levels[k] is a flat array of length m^k indexed by the base-m code of the
    word a_1..a_k (a_1 most significant). `shift` records the constant that was
    subtracted from the potential before solving; the pressure accounts for it.
    """

    s: float
    levels: dict[int, np.ndarray]
    residual: float
    iterations: int
    shift: float


@dataclass(frozen=True)
class MarkovMeasureSpec:
    """A (d-1)-step Markov law: initial vector on A^{d-1} and a one-symbol kernel."""

    m: int
    order: int
    initial: np.ndarray
    kernel: np.ndarray  # shape (m^order, m): context code -> next-symbol law

    def __post_init__(self):
        pi = np.asarray(self.initial, dtype=float)
        ker = np.asarray(self.kernel, dtype=float)
        if pi.shape != (self.m**self.order,):
            raise ValidationError(f"initial law must have length {self.m ** self.order}")
        if ker.shape != (self.m**self.order, self.m):
            raise ValidationError(f"kernel must have shape {(self.m ** self.order, self.m)}")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise ValidationError(f"initial law sums to {pi.sum()}, not 1")
        rows = ker.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > 1e-12:
            raise ValidationError("kernel rows must sum to 1 within 1e-12")
        object.__setattr__(self, "initial", pi)
        object.__setattr__(self, "kernel", ker)

    def transition_matrix(self) -> np.ndarray:
        """Kernel as a (m^order x m^order) matrix over context codes."""
        n = self.m**self.order
        mat = np.zeros((n, n))
        for u in range(n):
            for j in range(self.m):
                v = (u % self.m ** (self.order - 1)) * self.m + j if self.order > 0 else 0
                mat[u, v] += self.kernel[u, j]
        return mat


def _operator_data(potential: Potential, s: float):
    """Weights exp(s*(phi - shift)) arranged as (m^{d-1}, m), plus shifted-child codes."""
    m, d = potential.m, potential.d
    shift = 0.5 * (potential.alpha_min + potential.alpha_max)
    phi = potential.table.reshape(m ** (d - 1), m) - shift
    weights = np.exp(s * phi)
    codes = np.arange(m ** (d - 1))
    # (a_1..a_{d-1}) -> code of (a_2..a_{d-1}, j): drop leading digit, append j
    tcodes = (codes % (m ** (d - 2))) * m
    child = tcodes[:, None] + np.arange(m)[None, :]
    return weights, child, shift


def solve_psi(potential: Potential, s: float) -> PsiSolution:
    """Fixed point of psi -> (L_s psi)^(1/q), started from psi = 1.

    The potential is centered before exponentiation; the recorded shift is
    added back by :func:`pressure`.
    """
    if not math.isfinite(s):
        raise ValidationError(f"s must be finite, got {s}")
    cache = potential._cache
    if s in cache:
        return cache[s]
    m, q, d = potential.m, potential.q, potential.d
    weights, child, shift = _operator_data(potential, s)
    psi = np.ones(m ** (d - 1))
    residual = math.inf
    for it in range(1, _FIXED_POINT_CAP + 1):
        image = (weights * psi[child]).sum(axis=1) ** (1.0 / q)
        residual = float(np.max(np.abs(image - psi)) / np.max(image))
        psi = image
        if residual < _FIXED_POINT_TOL:
            break
    else:
        raise ConvergenceError(
            f"fixed-point iteration did not converge at s={s}", residual
        )
    levels = {d - 1: psi}
    for k in range(d - 2, 0, -1):
        upper = levels[k + 1].reshape(m**k, m)
        levels[k] = upper.sum(axis=1) ** (1.0 / q)
    sol = PsiSolution(s=s, levels=levels, residual=residual, iterations=it, shift=shift)
    cache[s] = sol
    return sol


def operator_residual(potential: Potential, sol: PsiSolution) -> float:
    """Sup-norm defect of the fixed-point equation at the solution, relative."""
    weights, child, _ = _operator_data(potential, sol.s)
    psi = sol.levels[potential.d - 1]
    image = (weights * psi[child]).sum(axis=1) ** (1.0 / potential.q)
    return float(np.max(np.abs(image - psi)) / np.max(np.abs(psi)))


def pressure(potential: Potential, s: float) -> float:
    """(q-1) q^{d-2} log sum_j psi_s(j), corrected for the internal centering.

    The solver works with the midrange-centered table phi - c; the fixed
    point rescales by kappa = exp(-s c / (q-1)), which shifts the raw
    pressure by exactly -s c, so adding s c back recovers P for phi itself.
    """
    q, d = potential.q, potential.d
    sol = solve_psi(potential, s)
    level1 = sol.levels[1]
    return (q - 1) * q ** (d - 2) * math.log(level1.sum()) + s * sol.shift


def pressure_derivative(potential: Potential, s: float) -> float:
    """P'(s) by Richardson-extrapolated central differences."""
    h = 1e-4 * max(1.0, abs(s))
    coarse = (pressure(potential, s + h) - pressure(potential, s - h)) / (2 * h)
    fine = (pressure(potential, s + h / 2) - pressure(potential, s - h / 2)) / h
    return (4 * fine - coarse) / 3


def level_domain(potential: Potential) -> tuple[float, float]:
    """Numerical approximation [P'(-S), P'(+S)] of the attainable levels at S=40.

    The true endpoints are the limits s -> +/-inf; the values here are the
    finite-s approximations and slightly inside the limit interval.
    """
    if potential.is_constant:
        c = potential.alpha_min
        return (c, c)
    return (
        pressure_derivative(potential, -ENDPOINT_S),
        pressure_derivative(potential, ENDPOINT_S),
    )


def solve_pressure_slope(potential: Potential, alpha: float) -> float | None:
    """s with P'(s) = alpha, or None when alpha is outside the sampled range."""
    lo, hi = -1.0, 1.0
    while pressure_derivative(potential, lo) > alpha:
        lo *= 2
        if lo < -ENDPOINT_S:
            return None
    while pressure_derivative(potential, hi) < alpha:
        hi *= 2
        if hi > ENDPOINT_S:
            return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if pressure_derivative(potential, mid) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, abs(lo) + abs(hi)):
            break
    return 0.5 * (lo + hi)


def legendre_spectrum(potential: Potential, alpha: float) -> float:
    """Normalized Hausdorff spectrum (P(s_a) - s_a * alpha) / (q^{d-1} log m).

    Returns NaN (the out-of-domain marker) when no level set exists at alpha.
    Values at the extreme ends of the domain are resolved at |s| = 40 and are
    extrapolations of the true endpoint limits.
    """
    if potential.is_constant:
        return 1.0 if alpha == potential.alpha_min else OUT_OF_DOMAIN
    lo, hi = level_domain(potential)
    if alpha < lo or alpha > hi:
        if potential.alpha_min <= alpha <= potential.alpha_max:
            # between the |s|=40 horizon and the hard bound: clamp to the horizon
            s_end = -ENDPOINT_S if alpha < lo else ENDPOINT_S
            return (pressure(potential, s_end) - s_end * alpha) / (
                potential.q ** (potential.d - 1) * math.log(potential.m)
            )
        return OUT_OF_DOMAIN
    s_alpha = solve_pressure_slope(potential, alpha)
    if s_alpha is None:
        return OUT_OF_DOMAIN
    value = pressure(potential, s_alpha) - s_alpha * alpha
    return value / (potential.q ** (potential.d - 1) * math.log(potential.m))


def ruelle_dimension(potential: Potential, s: float) -> float:
    """Dimension (in [0,1]) of the telescopic measure built from psi_s."""
    q, d, m = potential.q, potential.d, potential.m
    value = pressure(potential, s) - s * pressure_derivative(potential, s)
    return value / (q ** (d - 1) * math.log(m))


def markov_measure(potential: Potential, s: float) -> MarkovMeasureSpec:
    """The (d-1)-step Markov law (pi_s, Q_s) defined by the fixed point at s."""
    m, q, d = potential.m, potential.q, potential.d
    sol = solve_psi(potential, s)
    # initial law pi([a_1..a_{d-1}]) = prod_j psi(a_1..a_j) / psi(a_1..a_{j-1})^q,
    # with psi(empty)^q = sum_j psi(j) so the law is a probability vector.
    order = d - 1
    pi = np.ones(m**order)
    prev = np.array([sol.levels[1].sum() ** (1.0 / q)])  # psi at the empty word
    for k in range(1, order + 1):
        lev = sol.levels[k]
        reps = m ** (order - k)
        pi *= np.repeat(lev / (prev**q).repeat(m), reps)
        prev = lev
    # transition kernel from context (a_1..a_{d-1}) to appended symbol j;
    # both pi and the kernel are invariant under the internal centering shift
    weights, child, _ = _operator_data(potential, s)
    psi = sol.levels[order]
    kernel = weights * psi[child] / (psi**q)[:, None]
    return MarkovMeasureSpec(m=m, order=order, initial=pi, kernel=kernel)


@dataclass(frozen=True)
class PressureCurve:
    """Sampled (s, P, P', alpha, dim) records along an s-grid."""

    s: np.ndarray
    P: np.ndarray
    dP: np.ndarray
    dim: np.ndarray

    @property
    def alpha(self) -> np.ndarray:
        return self.dP

    def rows(self) -> Iterable[tuple[float, float, float, float, float]]:
        for i in range(len(self.s)):
            yield (
                float(self.s[i]),
                float(self.P[i]),
                float(self.dP[i]),
                float(self.dP[i]),
                float(self.dim[i]),
            )


def pressure_curve(potential: Potential, s_grid) -> PressureCurve:
    s_grid = np.asarray(s_grid, dtype=float)
    P = np.array([pressure(potential, s) for s in s_grid])
    dP = np.array([pressure_derivative(potential, s) for s in s_grid])
    norm = potential.q ** (potential.d - 1) * math.log(potential.m)
    dim = (P - s_grid * dP) / norm
    return PressureCurve(s=s_grid, P=P, dP=dP, dim=dim)


def convexity_defect(values: np.ndarray) -> float:
    """Most negative second difference along a uniform grid (>= 0 means convex)."""
    second = np.diff(np.asarray(values, dtype=float), n=2)
    return float(second.min()) if len(second) else 0.0
