"""Symbolic-dynamics primitives.

Alphabets, finite words, the geometric-progression partition of the positive
integers, multiplicative semigroups generated by primes, and finite-state
descriptions of prefix-closed generating sets with exact prefix counting.
Indices into sequences are 1-based throughout.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ValidationError

Word = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Symbol set {0, ..., m-1}."""

    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"alphabet needs at least 2 symbols, got m={self.m}")


def check_word(word: Sequence[int], m: int) -> Word:
    w = tuple(int(a) for a in word)
    for a in w:
        if not 0 <= a < m:
            raise ValidationError(f"symbol {a} outside alphabet of size {m}")
    return w


@dataclass(frozen=True)
class IndexChain:
    """The indices {base * q^j} (or base * l_k for a semigroup) up to a horizon."""

    base: int
    elements: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.elements)


def lambda_partition(q: int, n: int) -> list[IndexChain]:
    """Partition {1..n} into the chains {i*q^j : j >= 0} over i with q not dividing i."""
    if q < 2:
        raise ValidationError(f"q must be >= 2, got {q}")
    if n < 1:
        raise ValidationError(f"horizon must be >= 1, got {n}")
    chains = []
    for i in range(1, n + 1):
        if i % q == 0:
            continue
        elems = []
        k = i
        while k <= n:
            elems.append(k)
            k *= q
        chains.append(IndexChain(base=i, elements=tuple(elems)))
    return chains


def restrict(x: Sequence[int], chain: IndexChain) -> Word:
    """Read off the subword of x sitting on the chain (1-based positions)."""
    out = []
    for k in chain.elements:
        if not 1 <= k <= len(x):
            raise ValidationError(f"chain index {k} out of range for sequence of length {len(x)}")
        out.append(int(x[k - 1]))
    return tuple(out)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class SemigroupSpec:
    """Multiplicative semigroup of the positive integers generated by distinct primes."""

    primes: tuple[int, ...]

    def __post_init__(self):
        ps = self.primes
        if not ps:
            raise ValidationError("semigroup needs at least one generator")
        if len(set(ps)) != len(ps):
            raise ValidationError(f"duplicate generators in {ps}")
        for p in ps:
            if not _is_prime(p):
                raise ValidationError(f"generator {p} is not prime")
        if tuple(sorted(ps)) != ps:
            object.__setattr__(self, "primes", tuple(sorted(ps)))

    def is_coprime(self, i: int) -> bool:
        return all(i % p != 0 for p in self.primes)


def semigroup_elements(spec: SemigroupSpec, bound: int) -> list[int]:
    """All products of the generators that are <= bound, ascending, starting at 1."""
    if bound < 1:
        raise ValidationError(f"bound must be >= 1, got {bound}")
    # bounded merge of prime multiples (Hamming-number style)
    out = []
    heap = [1]
    seen = {1}
    while heap:
        v = heapq.heappop(heap)
        out.append(v)
        for p in spec.primes:
            w = v * p
            if w <= bound and w not in seen:
                seen.add(w)
                heapq.heappush(heap, w)
    return out


def gamma_of_semigroup(spec: SemigroupSpec) -> float:
    """Sum of reciprocals of the semigroup elements, via the Euler product."""
    g = 1.0
    for p in spec.primes:
        g *= p / (p - 1)
    return g


def semigroup_reciprocal_tail(spec: SemigroupSpec, elements: Sequence[int]) -> float:
    """Tail of the reciprocal series after the listed leading elements."""
    return gamma_of_semigroup(spec) - sum(1.0 / l for l in elements)


@dataclass(frozen=True)
class PrefixAutomaton:
    """Deterministic finite-state description of a prefix-closed generating set.

    The language of the automaton (all paths from the initial state) is the
    set of admissible prefixes. Every state must be reachable and must have
    at least one outgoing transition, so the described set is nonempty and
    closed.
    """

    m: int
    states: tuple[str, ...]
    initial: str
    transitions: dict[tuple[str, int], str] = field(hash=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"alphabet needs at least 2 symbols, got m={self.m}")
        idx = {s: i for i, s in enumerate(self.states)}
        if len(idx) != len(self.states):
            raise ValidationError("duplicate state names")
        if self.initial not in idx:
            raise ValidationError(f"initial state {self.initial!r} not declared")
        for (src, sym), dst in self.transitions.items():
            if src not in idx or dst not in idx:
                raise ValidationError(f"transition {(src, sym, dst)} uses undeclared state")
            if not 0 <= sym < self.m:
                raise ValidationError(f"transition symbol {sym} outside alphabet of size {self.m}")
        # reachability from the initial state
        reached = {self.initial}
        frontier = [self.initial]
        while frontier:
            src = frontier.pop()
            for sym in range(self.m):
                dst = self.transitions.get((src, sym))
                if dst is not None and dst not in reached:
                    reached.add(dst)
                    frontier.append(dst)
        unreachable = set(self.states) - reached
        if unreachable:
            raise ValidationError(f"unreachable states: {sorted(unreachable)}")
        for s in self.states:
            if not any((s, sym) in self.transitions for sym in range(self.m)):
                raise ValidationError(f"dead state {s!r}: no outgoing transition")

    # -- integer-coded view used by the counting and dimension routines --

    def state_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    def transition_table(self) -> list[list[int]]:
        """Table[state][symbol] -> next state index, or -1 if forbidden."""
        idx = self.state_index()
        table = [[-1] * self.m for _ in self.states]
        for (src, sym), dst in self.transitions.items():
            table[idx[src]][sym] = idx[dst]
        return table

    def accepts(self, word: Sequence[int]) -> bool:
        table = self.transition_table()
        state = self.state_index()[self.initial]
        for a in word:
            state = table[state][a]
            if state < 0:
                return False
        return True

    @classmethod
    def from_json(cls, text: str) -> "PrefixAutomaton":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"invalid automaton JSON: {e}") from e
        try:
            m = int(doc["alphabet"])
            states = tuple(str(s) for s in doc["states"])
            initial = str(doc["initial"])
            transitions = {
                (str(t["from"]), int(t["symbol"])): str(t["to"]) for t in doc["transitions"]
            }
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed automaton document: {e}") from e
        return cls(m=m, states=states, initial=initial, transitions=transitions)

    def to_json(self) -> str:
        doc = {
            "alphabet": self.m,
            "states": list(self.states),
            "initial": self.initial,
            "transitions": [
                {"from": src, "symbol": sym, "to": dst}
                for (src, sym), dst in sorted(self.transitions.items())
            ],
        }
        return json.dumps(doc, indent=2)


def prefix_count(automaton: PrefixAutomaton, k: int) -> int:
    """Number of admissible prefixes of length k, exact."""
    if k < 0:
        raise ValidationError(f"depth must be >= 0, got {k}")
    table = automaton.transition_table()
    counts = [0] * len(automaton.states)
    counts[automaton.state_index()[automaton.initial]] = 1
    for _ in range(k):
        nxt = [0] * len(counts)
        for s, c in enumerate(counts):
            if c:
                for t in table[s]:
                    if t >= 0:
                        nxt[t] += c
        counts = nxt
    return sum(counts)


def reachable_states_by_level(automaton: PrefixAutomaton, depth: int) -> list[set[int]]:
    """States reachable by words of each length 0..depth."""
    table = automaton.transition_table()
    level = {automaton.state_index()[automaton.initial]}
    out = [set(level)]
    for _ in range(depth):
        level = {t for s in level for t in table[s] if t >= 0}
        out.append(set(level))
    return out


def spherically_symmetric(automaton: PrefixAutomaton, depth: int | None = None) -> bool:
    """Whether all prefixes at every level have the same number of continuations.

    For a finite-state automaton the answer stabilizes once every reachable
    (level, state) pair has been seen, so checking ``len(states) + 1`` levels
    is definitive; that is the default depth.
    """
    if depth is None:
        depth = len(automaton.states) + 1
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    table = automaton.transition_table()
    degree = [sum(1 for t in row if t >= 0) for row in table]
    for level in reachable_states_by_level(automaton, depth - 1):
        if len({degree[s] for s in level}) > 1:
            return False
    return True


# -- automata used throughout the examples and tests --


def full_shift(m: int) -> PrefixAutomaton:
    return PrefixAutomaton(
        m=m,
        states=("s",),
        initial="s",
        transitions={("s", a): "s" for a in range(m)},
    )


def forbid_ones_run(run: int) -> PrefixAutomaton:
    """Binary words with no run of `run` consecutive 1s.

    run=2 forbids the factor 11 (the golden-mean / Fibonacci constraint);
    run=3 forbids 111.
    """
    if run < 1:
        raise ValidationError(f"run must be >= 1, got {run}")
    states = tuple(f"r{j}" for j in range(run))
    transitions: dict[tuple[str, int], str] = {}
    for j in range(run):
        transitions[(f"r{j}", 0)] = "r0"
        if j + 1 < run:
            transitions[(f"r{j}", 1)] = f"r{j + 1}"
    return PrefixAutomaton(m=2, states=states, initial="r0", transitions=transitions)


def fibonacci_automaton() -> PrefixAutomaton:
    """Automaton of the generating set of X_2: binary words avoiding 11."""
    return forbid_ones_run(2)


def single_point(m: int, symbol: int = 0) -> PrefixAutomaton:
    if not 0 <= symbol < m:
        raise ValidationError(f"symbol {symbol} outside alphabet of size {m}")
    return PrefixAutomaton(
        m=m, states=("s",), initial="s", transitions={("s", symbol): "s"}
    )


def even_ones_shift() -> PrefixAutomaton:
    """Prefixes of binary sequences whose maximal 1-runs all have even length."""
    return PrefixAutomaton(
        m=2,
        states=("even", "odd"),
        initial="even",
        transitions={("even", 0): "even", ("even", 1): "odd", ("odd", 1): "even"},
    )


def two_regular_ternary() -> PrefixAutomaton:
    """A ternary automaton where every state has exactly two continuations."""
    return PrefixAutomaton(
        m=3,
        states=("A", "B"),
        initial="A",
        transitions={("A", 0): "A", ("A", 1): "B", ("B", 1): "B", ("B", 2): "A"},
    )


def prefix_counts_up_to(automaton: PrefixAutomaton, depth: int) -> list[int]:
    """[|Pref_0|, ..., |Pref_depth|] in one DP sweep."""
    table = automaton.transition_table()
    counts = [0] * len(automaton.states)
    counts[automaton.state_index()[automaton.initial]] = 1
    out = [1]
    for _ in range(depth):
        nxt = [0] * len(counts)
        for s, c in enumerate(counts):
            if c:
                for t in table[s]:
                    if t >= 0:
                        nxt[t] += c
        counts = nxt
        out.append(sum(counts))
    return out


def log_m(value: float | int, m: int) -> float:
    return math.log(value) / math.log(m)
