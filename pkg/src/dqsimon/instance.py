"""Generalized Simon instances: planted subgroup, dense function table, node oracles.

An input x in {0,1}^n is split as x = u w with u the left n - t bits and w the
right t bits. Node w holds the subfunction f_w(u) = f(u w); as integers,
index(u w) = (u << t) | w.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gf2 import BitVector, Gf2Basis, _rref, span_ints

MAX_N = 16
MAX_U_BITS = 12
MAX_REGISTER_BITS = 64


class InfeasibleParams(ValueError):
    """Parameters that cannot carry a valid instance (codomain too small, guards)."""


class PromiseViolation(ValueError):
    """The function does not satisfy f(x) = f(y) <=> x ^ y in S."""


@dataclass(frozen=True)
class ProblemParams:
    n: int
    t: int
    m: int
    k: int
    seed: int = 0

    def validate(self) -> None:
        n, t, m, k = self.n, self.t, self.m, self.k
        if not 1 <= t < n:
            raise InfeasibleParams(f"1 ≤ t < n violated (t={t}, n={n})")
        if n > MAX_N:
            raise InfeasibleParams(f"n ≤ {MAX_N} violated (n={n})")
        if not 0 <= k <= n:
            raise InfeasibleParams(f"0 ≤ k ≤ n violated (k={k}, n={n})")
        if m < 1:
            raise InfeasibleParams(f"m ≥ 1 violated (m={m})")
        if m < n - k:
            raise InfeasibleParams(f"m ≥ n−k violated (m={m}, n−k={n - k})")
        if n - t > MAX_U_BITS:
            raise InfeasibleParams(f"n−t ≤ {MAX_U_BITS} violated (n−t={n - t})")
        if (1 << t) * m > MAX_REGISTER_BITS:
            raise InfeasibleParams(
                f"2^t·m ≤ {MAX_REGISTER_BITS} violated (2^t·m={(1 << t) * m})"
            )
        if not 0 <= self.seed < 1 << 64:
            raise InfeasibleParams(f"seed must be a 64-bit unsigned integer (seed={self.seed})")

    @property
    def u_bits(self) -> int:
        return self.n - self.t


def _project(basis: Gf2Basis, shift: int, width: int) -> Gf2Basis:
    mask = (1 << width) - 1
    rows, _ = _rref(((v.value >> shift) & mask for v in basis), width)
    return Gf2Basis(width, tuple(BitVector(width, r) for r in rows))


@dataclass(frozen=True, eq=False)
class HspInstance:
    params: ProblemParams
    s_basis: Gf2Basis
    f_table: np.ndarray  # uint64, length 2^n
    sl_basis: Gf2Basis = field(init=False)
    sr_basis: Gf2Basis = field(init=False)

    def __post_init__(self) -> None:
        p = self.params
        if self.s_basis.ambient_width != p.n:
            raise ValueError("s_basis width must equal n")
        table = np.asarray(self.f_table, dtype=np.uint64)
        if table.shape != (1 << p.n,):
            raise ValueError(f"f_table must have 2^n = {1 << p.n} entries")
        if p.m < 64 and np.any(table >> np.uint64(p.m)):
            raise ValueError(f"f_table values must fit in m = {p.m} bits")
        table.setflags(write=False)
        object.__setattr__(self, "f_table", table)
        object.__setattr__(self, "sl_basis", _project(self.s_basis, p.t, p.n - p.t))
        object.__setattr__(self, "sr_basis", _project(self.s_basis, 0, p.t))

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def k(self) -> int:
        return self.s_basis.rank

    @property
    def k_l(self) -> int:
        return self.sl_basis.rank

    @property
    def u_bits(self) -> int:
        return self.params.n - self.params.t

    def subtable(self, w: int) -> np.ndarray:
        """f_w(u) for every u, indexed by the integer value of u."""
        return self.f_table[w :: 1 << self.t]

    def node_tables(self) -> np.ndarray:
        """Array of shape (2^(n-t), 2^t): entry [u, w] is f_w(u)."""
        return self.f_table.reshape(1 << self.u_bits, 1 << self.t)

    def to_json(self) -> dict:
        p = self.params
        digits = max(1, (p.m + 3) // 4)
        return {
            "n": p.n,
            "t": p.t,
            "m": p.m,
            "k": p.k,
            "seed": p.seed,
            "s_basis": [str(v) for v in self.s_basis],
            "f_table": [format(int(v), f"0{digits}x") for v in self.f_table],
        }

    @classmethod
    def from_json(cls, data: dict) -> HspInstance:
        params = ProblemParams(
            int(data["n"]), int(data["t"]), int(data["m"]), int(data["k"]), int(data["seed"])
        )
        params.validate()
        vectors = tuple(BitVector.from_str(s) for s in data["s_basis"])
        basis = Gf2Basis(params.n, vectors)
        if basis.rank != params.k:
            raise ValueError(f"s_basis has rank {basis.rank}, expected k = {params.k}")
        table = np.array([int(h, 16) for h in data["f_table"]], dtype=np.uint64)
        return cls(params, basis, table)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> HspInstance:
        return cls.from_json(json.loads(Path(path).read_text()))


def coset_representatives(n: int, s_basis: Gf2Basis) -> np.ndarray:
    """Canonical coset representative of every x in {0,1}^n (reduction by the RREF of S)."""
    rows, pivots = _rref(s_basis.ints(), n)
    reps = np.arange(1 << n, dtype=np.int64)
    for row, p in zip(rows, pivots):
        hit = (reps >> p) & 1 == 1
        reps[hit] ^= row
    return reps


def random_basis(rng: np.random.Generator, width: int, k: int) -> Gf2Basis:
    """Uniformly random rank-k basis, rejection-sampling one vector at a time."""
    vectors: list[int] = []
    while len(vectors) < k:
        v = int(rng.integers(1, 1 << width))
        if len(_rref(vectors + [v], width)[0]) == len(vectors) + 1:
            vectors.append(v)
    return Gf2Basis(width, tuple(BitVector(width, v) for v in vectors))


def generate(params: ProblemParams) -> HspInstance:
    params.validate()
    rng = np.random.default_rng(params.seed)
    return _fill(params, random_basis(rng, params.n, params.k), rng)


def plant(params: ProblemParams, s_basis: Gf2Basis) -> HspInstance:
    """Like ``generate`` but with a caller-chosen hidden subgroup."""
    params.validate()
    if s_basis.ambient_width != params.n or s_basis.rank != params.k:
        raise InfeasibleParams("s_basis must have width n and rank k")
    return _fill(params, s_basis, np.random.default_rng(params.seed))


def _fill(params: ProblemParams, s_basis: Gf2Basis, rng: np.random.Generator) -> HspInstance:
    reps = coset_representatives(params.n, s_basis)
    distinct = np.unique(reps)
    assert len(distinct) == 1 << (params.n - params.k)
    values = rng.choice(1 << params.m, size=len(distinct), replace=False).astype(np.uint64)
    table = values[np.searchsorted(distinct, reps)]
    return HspInstance(params, s_basis, table)


def f_eval(inst: HspInstance, x: BitVector) -> int:
    if x.width != inst.n:
        raise ValueError(f"expected an {inst.n}-bit input, got {x.width}")
    return int(inst.f_table[x.value])


class NodeOracle:
    """The party holding f_w. Counts every classical and quantum query made to it."""

    def __init__(self, inst: HspInstance, w: BitVector):
        if w.width != inst.t:
            raise ValueError(f"node index must have t = {inst.t} bits")
        self.instance = inst
        self.w = w
        self.query_count_quantum = 0
        self.query_count_classical = 0

    @property
    def index(self) -> int:
        """BI(w): the integer value of w."""
        return self.w.value

    def query(self, u: BitVector) -> int:
        if u.width != self.instance.u_bits:
            raise ValueError(f"expected a {self.instance.u_bits}-bit u, got {u.width}")
        self.query_count_classical += 1
        return int(self.instance.f_table[(u.value << self.instance.t) | self.w.value])

    def truth_table(self) -> np.ndarray:
        """f_w over all u; what the quantum oracle applies coherently (uncounted)."""
        return self.instance.subtable(self.w.value)

    def __repr__(self) -> str:
        return (
            f"NodeOracle(w={self.w}, quantum={self.query_count_quantum}, "
            f"classical={self.query_count_classical})"
        )


def make_nodes(inst: HspInstance) -> list[NodeOracle]:
    """One oracle per w, ordered by BI(w)."""
    return [NodeOracle(inst, BitVector(inst.t, w)) for w in range(1 << inst.t)]


def f_w_eval(node: NodeOracle, u: BitVector) -> int:
    return node.query(u)


def _signature_words(inst: HspInstance) -> np.ndarray:
    """Sorted node values for every u, shape (2^(n-t), 2^t), ascending per row."""
    return np.sort(inst.node_tables(), axis=1)


def pack_signature(sorted_values, m: int) -> int:
    """Concatenate m-bit words left to right into one integer."""
    out = 0
    for v in sorted_values:
        out = (out << m) | int(v)
    return out


def sorted_signature(inst: HspInstance, u: BitVector) -> int:
    """S(u): all f_w(u) sorted ascending and concatenated (smallest leftmost)."""
    if u.width != inst.u_bits:
        raise ValueError(f"expected a {inst.u_bits}-bit u, got {u.width}")
    return pack_signature(np.sort(inst.node_tables()[u.value]), inst.m)


def all_signatures(inst: HspInstance) -> list[int]:
    return [pack_signature(row, inst.m) for row in _signature_words(inst)]


def multiset_G(inst: HspInstance, u: BitVector) -> Counter:
    return Counter(int(v) for v in inst.node_tables()[u.value])


def matching_nodes_N(inst: HspInstance, u: BitVector, z: int) -> set[BitVector]:
    row = inst.node_tables()[u.value]
    return {BitVector(inst.t, w) for w in range(1 << inst.t) if int(row[w]) == z}


def brute_force_solve(inst: HspInstance) -> set[BitVector]:
    """Ground truth: every s with f(s) = f(0^n)."""
    if inst.n > 12:
        raise InfeasibleParams(f"brute force limited to n ≤ 12 (n={inst.n})")
    hits = np.flatnonzero(inst.f_table == inst.f_table[0])
    return {BitVector(inst.n, int(s)) for s in hits}


def planted_subgroup(inst: HspInstance) -> set[BitVector]:
    return {BitVector(inst.n, v) for v in span_ints(inst.s_basis.ints())}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    counterexample: tuple[str, str] | None = None


def _equivalence_counterexample(values: np.ndarray, reps: np.ndarray) -> tuple[int, int] | None:
    """Find (x, y) breaking values[x] == values[y] <=> reps[x] == reps[y], if any."""
    for key, other in ((reps, values), (values, reps)):
        order = np.argsort(key, kind="stable")
        k_sorted, o_sorted = key[order], other[order]
        starts = np.r_[0, np.flatnonzero(k_sorted[1:] != k_sorted[:-1]) + 1]
        group_first = np.repeat(starts, np.diff(np.r_[starts, len(order)]))
        bad = np.flatnonzero(o_sorted != o_sorted[group_first])
        if len(bad):
            i = bad[0]
            return int(order[group_first[i]]), int(order[i])
    return None


def verify_instance(inst: HspInstance) -> list[Check]:
    """Exhaustive checks of the Simon promise, the signature equivalence and the coset count."""
    n = inst.n
    checks = []

    reps = coset_representatives(n, inst.s_basis)
    bad = _equivalence_counterexample(inst.f_table, reps)
    if bad is None:
        checks.append(Check("promise", True, "f(x) = f(y) ⟺ x⊕y ∈ S for all x, y"))
    else:
        x, y = (BitVector(n, v) for v in bad)
        same = int(inst.f_table[x.value]) == int(inst.f_table[y.value])
        why = "f(x) = f(y) but x⊕y ∉ S" if same else "x⊕y ∈ S but f(x) ≠ f(y)"
        checks.append(Check("promise", False, why, (str(x), str(y))))

    sigs = np.array(all_signatures(inst), dtype=object)
    sl_reps = coset_representatives(inst.u_bits, inst.sl_basis)
    sig_ids = np.unique(sigs, return_inverse=True)[1].reshape(-1)
    bad = _equivalence_counterexample(sig_ids, sl_reps)
    if bad is None:
        checks.append(Check("signature_equivalence", True, "S(u) = S(v) ⟺ u⊕v ∈ S_l for all u, v"))
    else:
        u, v = (BitVector(inst.u_bits, x) for x in bad)
        same = sig_ids[u.value] == sig_ids[v.value]
        why = "S(u) = S(v) but u⊕v ∉ S_l" if same else "u⊕v ∈ S_l but S(u) ≠ S(v)"
        checks.append(Check("signature_equivalence", False, why, (str(u), str(v))))

    distinct = len(np.unique(inst.f_table))
    expected = 1 << (n - inst.k)
    checks.append(
        Check("coset_count", distinct == expected, f"{distinct} distinct values, expected 2^(n−k) = {expected}")
    )
    return checks
