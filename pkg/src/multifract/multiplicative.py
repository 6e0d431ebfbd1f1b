"""Dimensions of multiplicatively invariant symbolic sets.

Hausdorff dimension via the per-state fixed-point system, box dimension via
the prefix-count series, the exact product-formula count for the doubling
constraint set, a brute-force counting oracle, and the semigroup
generalization of both dimension formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .symbolic import (
    PrefixAutomaton,
    SemigroupSpec,
    gamma_of_semigroup,
    lambda_partition,
    prefix_counts_up_to,
    semigroup_elements,
    semigroup_reciprocal_tail,
)

_FIXED_POINT_TOL = 1e-14
_FIXED_POINT_CAP = 100_000
_BRUTE_FORCE_BITS = 24  # guard: m^n <= 2^24 states enumerated


@dataclass(frozen=True)
class KpsSolution:
    """Per-state fixed point t with t(state)^q = sum of children, plus the root value."""

    t: np.ndarray
    t_root: float
    q: int
    m: int
    residual: float

    @property
    def dimension(self) -> float:
        return (self.q - 1) * math.log(self.t_root) / math.log(self.m)


@dataclass(frozen=True)
class PsssSolution:
    """Leveled fixed point t(state, level) under the exponent schedule l_{k+1}/l_k."""

    t_root: float
    m: int
    depth: int
    residual: float  # bracket width between the two tail closures, in log_m units

    @property
    def dimension(self) -> float:
        return math.log(self.t_root) / math.log(self.m)


def kps_solution(automaton: PrefixAutomaton, q: int) -> KpsSolution:
    """Solve t(state)^q = sum over enabled symbols of t(next state), from t = 1.

    The iteration t <- (sum of children)^(1/q) is monotone from the
    sub-solution t = 1 and bounded by m^(1/(q-1)), so it converges to the
    unique fixed point in that box.
    """
    if q < 2:
        raise ValidationError(f"q must be >= 2, got {q}")
    table = automaton.transition_table()
    nstates = len(automaton.states)
    children = [[t for t in row if t >= 0] for row in table]
    t = np.ones(nstates)
    residual = math.inf
    for _ in range(_FIXED_POINT_CAP):
        image = np.array([sum(t[c] for c in children[s]) for s in range(nstates)]) ** (1.0 / q)
        residual = float(np.max(np.abs(image - t)) / np.max(image))
        t = image
        if residual < _FIXED_POINT_TOL:
            break
    else:
        raise ConvergenceError("state fixed point did not converge", residual)
    root = automaton.state_index()[automaton.initial]
    return KpsSolution(t=t, t_root=float(t[root]), q=q, m=automaton.m, residual=residual)


def kps_hausdorff(automaton: PrefixAutomaton, q: int, m: int | None = None) -> float:
    """(q-1) log_m of the root value of the per-state fixed point."""
    _check_m(automaton, m)
    return kps_solution(automaton, q).dimension


def box_series_depth(q: int, tol: float) -> int:
    """First truncation depth whose tail bound (with log_m counts <= k) is < tol."""
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    x = 1.0 / q
    depth = 1
    while (q - 1) ** 2 * x ** (depth + 2) * ((depth + 1) - depth * x) / (1 - x) ** 2 >= tol:
        depth += 1
    return depth


def kps_box(automaton: PrefixAutomaton, q: int, m: int | None = None, tol: float = 1e-10) -> float:
    """(q-1)^2 sum_k log_m |Pref_k| / q^{k+1}, truncated with a rigorous tail bound."""
    _check_m(automaton, m)
    if q < 2:
        raise ValidationError(f"q must be >= 2, got {q}")
    depth = box_series_depth(q, tol)
    counts = prefix_counts_up_to(automaton, depth)
    logm = math.log(automaton.m)
    total = sum(math.log(counts[k]) / logm / q ** (k + 1) for k in range(1, depth + 1))
    return (q - 1) ** 2 * total


def fibonacci_numbers(count: int) -> list[int]:
    """F_0 = 1, F_1 = 2, F_{n+2} = F_{n+1} + F_n."""
    fib = [1, 2]
    while len(fib) <= count:
        fib.append(fib[-1] + fib[-2])
    return fib[: count + 1]


def fibonacci_box_x2(tol: float = 1e-6) -> float:
    """Box dimension of the doubling constraint set: (1/(2 log 2)) sum log F_n / 2^n.

    Truncated once the closed-form tail bound (log F_n <= n log 2 eventually,
    via F_n <= 2 * phi^n) drops below tol.
    """
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    phi = (1 + math.sqrt(5)) / 2
    # tail sum_{n>N} log(2 phi^n)/2^n <= (log 2 + (N+2) log phi) * 2^{-N} etc.
    depth = 1
    while True:
        tail = sum(math.log(2 * phi**n) / 2**n for n in range(depth + 1, depth + 200))
        if tail / (2 * math.log(2)) < tol:
            break
        depth += 1
    fib = fibonacci_numbers(depth)
    return sum(math.log(fib[n]) / 2**n for n in range(1, depth + 1)) / (2 * math.log(2))


def exact_count_x2(n: int) -> int:
    """Number of admissible length-n words for the doubling constraint, exact.

    Product formula by independence of the chains: with n_k = floor(n/2^{k+1} + 1/2)
    and m = floor(log2 n), the count is F_{m+1}^{n_m} * prod F_k^{n_{k-1} - n_k}.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    mtop = n.bit_length() - 1  # floor(log2 n)
    nk = [(n // 2 ** (k + 1)) + (1 if (n % 2 ** (k + 1)) * 2 >= 2 ** (k + 1) else 0) for k in range(mtop + 1)]
    fib = fibonacci_numbers(mtop + 1)
    count = fib[mtop + 1] ** nk[mtop]
    for k in range(1, mtop + 1):
        count *= fib[k] ** (nk[k - 1] - nk[k])
    return count


def brute_force_count(automaton: PrefixAutomaton, q: int, n: int) -> int:
    """Enumerate all m^n words and count those whose chain restrictions are admissible.

    Independent oracle for the product-formula and series counts; guarded so
    the enumeration stays within 2^24 words.
    """
    if q < 2:
        raise ValidationError(f"q must be >= 2, got {q}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    m = automaton.m
    if n * math.log(m) > _BRUTE_FORCE_BITS * math.log(2) + 1e-9:
        raise ValidationError(f"m^n too large to enumerate (guard: m^n <= 2^{_BRUTE_FORCE_BITS})")
    table = automaton.transition_table()
    nstates = len(automaton.states)
    sink = nstates
    trans = np.full((nstates + 1, m), sink, dtype=np.int16)
    for s, row in enumerate(table):
        for sym, t in enumerate(row):
            if t >= 0:
                trans[s, sym] = t
    codes = np.arange(m**n, dtype=np.int32)
    init = automaton.state_index()[automaton.initial]
    valid = np.ones(m**n, dtype=bool)
    for chain in lambda_partition(q, n):
        state = np.full(m**n, init, dtype=np.int16)
        for pos in chain.elements:
            sym = (codes // np.int32(m ** (n - pos))) % m
            state = trans[state, sym]
        valid &= state != sink
    return int(valid.sum())


def _check_m(automaton: PrefixAutomaton, m: int | None):
    if m is not None and m != automaton.m:
        raise ValidationError(
            f"alphabet size {m} disagrees with the automaton's ({automaton.m})"
        )


def psss_solution(
    automaton: PrefixAutomaton,
    spec: SemigroupSpec,
    target: float = 1e-10,
) -> PsssSolution:
    """Solve the leveled system t(u)^{l_{k+1}/l_k} = sum of children on (state, level).

    The system is triangular in the level, so it is closed by a backward
    recursion from a truncation depth. Running it twice -- once with the
    lower closure t = 1 and once with the upper closure from the exponent
    bound t <= m^{l_K * tail} -- brackets log_m t(root); the depth grows
    until the bracket is below `target`.
    """
    table = automaton.transition_table()
    nstates = len(automaton.states)
    children = [[t for t in row if t >= 0] for row in table]
    m = automaton.m
    gamma = gamma_of_semigroup(spec)
    root = automaton.state_index()[automaton.initial]

    bound = 1 << 20
    while True:
        elems = semigroup_elements(spec, bound)
        depth = len(elems) - 1  # levels 1..depth have a known exponent ratio
        if depth < 2:
            bound <<= 4
            continue
        tail = max(semigroup_reciprocal_tail(spec, elems), 0.0)
        closures = (
            np.ones(nstates),
            np.full(nstates, float(m) ** min(elems[depth - 1] * (tail + 1.0 / elems[depth]), 60.0)),
        )
        roots = []
        for t in closures:
            t = t.copy()
            for k in range(depth - 1, 0, -1):  # level k uses ratio l_{k+1}/l_k
                ratio = elems[k] / elems[k - 1]  # elems is 0-based: elems[k-1] = l_k
                image = np.array([sum(t[c] for c in children[s]) for s in range(nstates)])
                t = image ** (1.0 / ratio)
            t_root = (sum(t[c] for c in children[root])) ** (1.0 / gamma)
            roots.append(t_root)
        lo, hi = sorted(math.log(r) / math.log(m) for r in roots)
        if hi - lo < target:
            return PsssSolution(
                t_root=float(math.sqrt(roots[0] * roots[1])),
                m=m,
                depth=depth,
                residual=hi - lo,
            )
        if bound > 1 << 62:
            raise ConvergenceError("semigroup truncation did not close the bracket", hi - lo)
        bound <<= 8


def psss_hausdorff(
    automaton: PrefixAutomaton, spec: SemigroupSpec, m: int | None = None
) -> float:
    """log_m of the root value of the leveled fixed point."""
    _check_m(automaton, m)
    return psss_solution(automaton, spec).dimension


def psss_box(
    automaton: PrefixAutomaton,
    spec: SemigroupSpec,
    m: int | None = None,
    tol: float = 1e-10,
) -> float:
    """gamma^{-1} sum_k (1/l_k - 1/l_{k+1}) log_m |Pref_k|, tail-bounded truncation."""
    _check_m(automaton, m)
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    gamma = gamma_of_semigroup(spec)
    bound = 1 << 16
    while True:
        elems = semigroup_elements(spec, bound)
        depth = len(elems) - 1
        # dropped terms k >= depth, bounded with log_m|Pref_k| <= k; by Abel
        # summation sum_{k>=K} k (1/l_k - 1/l_{k+1}) = K/l_K + sum_{k>K} 1/l_k
        tail = depth / elems[depth - 1] + semigroup_reciprocal_tail(spec, elems[:depth])
        if depth >= 2 and tail / gamma < tol:
            break
        if bound > 1 << 62:
            raise ConvergenceError("semigroup box series tail did not close", tail / gamma)
        bound <<= 4
    counts = prefix_counts_up_to(automaton, depth)
    logm = math.log(automaton.m)
    total = 0.0
    for k in range(1, depth):
        total += (1.0 / elems[k - 1] - 1.0 / elems[k]) * math.log(counts[k]) / logm
    return total / gamma


def dims_report(
    automaton: PrefixAutomaton,
    q: int | None = None,
    spec: SemigroupSpec | None = None,
    tol: float = 1e-9,
) -> dict:
    """Hausdorff + box dimensions with the symmetry flag, as a plain dict."""
    from .symbolic import spherically_symmetric

    if (q is None) == (spec is None):
        raise ValidationError("pass exactly one of q or a semigroup spec")
    if q is not None:
        sol = kps_solution(automaton, q)
        dim_h = sol.dimension
        dim_b = kps_box(automaton, q, tol=tol)
        residual = sol.residual
    else:
        sol = psss_solution(automaton, spec)
        dim_h = sol.dimension
        dim_b = psss_box(automaton, spec, tol=tol)
        residual = sol.residual
    return {
        "dim_H": dim_h,
        "dim_B": dim_b,
        "symmetric": spherically_symmetric(automaton),
        "residual": residual,
    }
