"""Sampling rounds, exact amplitude amplification, and subgroup reconstruction.

The solvers only touch the function through ``NodeOracle`` objects; the planted
subgroup on the instance is read solely when filling post-hoc diagnostics.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .gf2 import BitVector, Gf2Basis, extend_if_independent, in_span, perp, span_ints
from .instance import (
    HspInstance,
    NodeOracle,
    PromiseViolation,
    brute_force_solve,
    make_nodes,
)
from .sim import (
    RegisterLayout,
    apply_A,
    apply_Q,
    mass_on,
    measure_first_register,
    zero_state,
)

ALGORITHMS = ("dsl", "ds", "edsl", "eds", "full")


class DegeneratePhase(ValueError):
    pass


class SolverInvariantError(RuntimeError):
    """Raised when a run breaks a bound the algorithm guarantees (simulator bug)."""


@dataclass(frozen=True)
class PhasePair:
    phi: float
    varphi: float
    r: int
    d_l: int


def compute_phases(n: int, t: int, r: int, d_l: int) -> PhasePair:
    """Rotation angles that cancel the in-span amplitude in one amplification step.

    With x = n - t - r - d_l >= 1:
    phi = 2 atan(sqrt(2^x / (3 * 2^x - 4))), varphi = acos((2^(x-1) - 1) / (2^x - 1)).
    """
    x = n - t - r - d_l
    if x < 1:
        raise DegeneratePhase(f"n−t−r−d_l must be ≥ 1, got {x}")
    p = 2.0**x
    phi = 2.0 * math.atan(math.sqrt(p / (3.0 * p - 4.0)))
    varphi = math.acos((p / 2.0 - 1.0) / (p - 1.0))
    return PhasePair(phi, varphi, r, d_l)


def phase_residual(n: int, t: int, r: int, d_l: int) -> float:
    """|e^{i varphi}(1 - e^{i phi}) b - (1 - e^{i phi}) b - e^{i phi}| with b = 1 - 2^(r+d_l+t-n)."""
    ph = compute_phases(n, t, r, d_l)
    b = 1.0 - 2.0 ** (r + d_l + t - n)
    e_phi = complex(math.cos(ph.phi), math.sin(ph.phi))
    e_varphi = complex(math.cos(ph.varphi), math.sin(ph.varphi))
    return abs(e_varphi * (1 - e_phi) * b - ((1 - e_phi) * b + e_phi))


def prepare(inst: HspInstance, nodes: Sequence[NodeOracle]):
    """A|0>: two quantum queries per node."""
    return apply_A(zero_state(RegisterLayout.for_instance(inst)), nodes)


def dsl_round(
    inst: HspInstance,
    Y: Gf2Basis,
    rng: np.random.Generator,
    nodes: Sequence[NodeOracle] | None = None,
) -> tuple[BitVector, Gf2Basis]:
    """One sampling round: measure A|0> and keep z if it is new."""
    nodes = make_nodes(inst) if nodes is None else nodes
    z = measure_first_register(prepare(inst, nodes), rng)
    Y, _ = extend_if_independent(Y, z)
    return z, Y


def amplified_state(
    inst: HspInstance, Y: Gf2Basis, d_l: int, nodes: Sequence[NodeOracle]
):
    """Q A|0> with the phases for r = rank(Y) and assumed rank d_l."""
    ph = compute_phases(inst.n, inst.t, Y.rank, d_l)
    state = prepare(inst, nodes)
    return apply_Q(state, ph.phi, ph.varphi, Y, nodes)


def qaa_round(
    inst: HspInstance,
    Y: Gf2Basis,
    d_l: int,
    rng: np.random.Generator,
    nodes: Sequence[NodeOracle] | None = None,
) -> BitVector:
    nodes = make_nodes(inst) if nodes is None else nodes
    return measure_first_register(amplified_state(inst, Y, d_l, nodes), rng)


@dataclass
class Iteration:
    d_l: int
    y_size: int  # |Y| counting the implicit zero vector
    z: str
    branch: str  # "extend" or "increment"
    bad_mass: float | None  # probability on span(Y) after amplification


@dataclass
class SolverTrace:
    algorithm: str
    iterations: list[Iteration] = field(default_factory=list)
    sl_basis: Gf2Basis | None = None
    subgroup: set[BitVector] | None = None
    nodes: list[NodeOracle] = field(default_factory=list)
    exact: bool | None = None
    diagnostics: dict = field(default_factory=dict)

    def quantum_queries_per_node(self) -> int:
        return max((nd.query_count_quantum for nd in self.nodes), default=0)

    def classical_queries_total(self) -> int:
        return sum(nd.query_count_classical for nd in self.nodes)

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "iterations": [asdict(it) for it in self.iterations],
            "nodes": [
                {
                    "w": str(nd.w),
                    "quantum_queries": nd.query_count_quantum,
                    "classical_queries": nd.query_count_classical,
                }
                for nd in self.nodes
            ],
            "sl_basis": None if self.sl_basis is None else [str(v) for v in self.sl_basis],
            "subgroup": None if self.subgroup is None else sorted(str(s) for s in self.subgroup),
            "exact": self.exact,
            "diagnostics": self.diagnostics,
        }


def edsl(
    inst: HspInstance,
    rng: np.random.Generator,
    nodes: Sequence[NodeOracle] | None = None,
    trace: SolverTrace | None = None,
) -> Gf2Basis:
    """Exact search for S_l: one amplified measurement per iteration.

    Y holds only the independent nonzero samples; |Y| counting zero is rank + 1.
    """
    nodes = make_nodes(inst) if nodes is None else nodes
    width = inst.u_bits
    Y = Gf2Basis(width)
    d_l = 0
    iterations = 0
    while Y.rank + 1 != width + 1 - d_l:
        if iterations >= width:
            raise SolverInvariantError(f"EDSL exceeded n−t = {width} iterations")
        state = amplified_state(inst, Y, d_l, nodes)
        bad = mass_on(state, Y)
        z = measure_first_register(state, rng)
        if trace is not None:
            branch = "increment" if in_span(z, Y) else "extend"
            trace.iterations.append(Iteration(d_l, Y.rank + 1, str(z), branch, bad))
        if in_span(z, Y):
            d_l += 1
        else:
            Y, _ = extend_if_independent(Y, z)
        iterations += 1
    if trace is not None:
        trace.diagnostics["final_d_l"] = d_l
    return perp(Y)


@dataclass
class Reconstruction:
    subgroup: set[BitVector]
    matched: list[tuple[BitVector, BitVector]]  # (e, v) pairs with f(0 v) = f(e 0)
    unmatched: list[BitVector]


def _reconstruct(
    inst: HspInstance, basis: Gf2Basis, nodes: Sequence[NodeOracle], strict: bool
) -> Reconstruction:
    t, width = inst.t, inst.u_bits
    zero_u = BitVector.zero(width)
    by_w = sorted(nodes, key=lambda nd: nd.index)
    # Every node once: f(0^(n-t) w).
    column = [nd.query(zero_u) for nd in by_w]
    # Node 0^t once per basis vector: f(e 0^t).
    targets = [by_w[0].query(e) for e in basis]

    matched: list[tuple[BitVector, BitVector]] = []
    unmatched: list[BitVector] = []
    for e, target in zip(basis, targets):
        hits = [w for w, value in enumerate(column) if value == target]
        if hits:
            matched.append((e, BitVector(t, hits[0])))
        elif strict:
            raise PromiseViolation(f"no node w with f(0^(n−t) w) = f({e} 0^t)")
        else:
            unmatched.append(e)

    subgroup: set[BitVector] = set()
    for j in range(1 << len(matched)):
        left, right = 0, 0
        for i, (e, v) in enumerate(matched):
            if (j >> i) & 1:
                left ^= e.value
                right ^= v.value
        target = column[right]
        for v, value in enumerate(column):
            if value == target:
                subgroup.add(BitVector(inst.n, (left << t) | v))
    return Reconstruction(subgroup, matched, unmatched)


def eds(
    inst: HspInstance, sl_basis: Gf2Basis, nodes: Sequence[NodeOracle] | None = None
) -> set[BitVector]:
    """Assemble S from a basis of S_l with 2^t + k_l classical queries."""
    nodes = make_nodes(inst) if nodes is None else nodes
    return _reconstruct(inst, sl_basis, nodes, strict=True).subgroup


@dataclass
class DsResult:
    subgroup: set[BitVector]
    e_l: list[BitVector]  # basis vectors of S'_l that lie in S_l
    k_hat_l: int
    missing: list[BitVector]  # elements of S absent from the result


def ds(
    inst: HspInstance, sl_prime_basis: Gf2Basis, nodes: Sequence[NodeOracle] | None = None
) -> DsResult:
    """Non-exact assembly from an arbitrary candidate S'_l.

    Only the candidate basis vectors that find a matching node contribute; those
    are exactly the ones inside S_l.
    """
    nodes = make_nodes(inst) if nodes is None else nodes
    rec = _reconstruct(inst, sl_prime_basis, nodes, strict=False)
    e_l = [e for e, _ in rec.matched]
    planted_sl = set(span_ints(inst.sl_basis.ints()))
    if [e for e in sl_prime_basis if e.value in planted_sl] != e_l:
        raise SolverInvariantError("node matching disagrees with S_l membership")
    truth = brute_force_solve(inst)
    return DsResult(rec.subgroup, e_l, len(e_l), sorted(truth - rec.subgroup))


def _left_span(inst: HspInstance, subgroup: set[BitVector]) -> Gf2Basis:
    return Gf2Basis.spanning(inst.u_bits, (s.split(inst.u_bits)[0] for s in subgroup))


def _edsl_diagnostics(inst: HspInstance, trace: SolverTrace) -> dict:
    sl_perp = set(span_ints(perp(inst.sl_basis).ints()))
    final = [it for it in trace.iterations if it.d_l == inst.k_l]
    return {
        "k_l": inst.k_l,
        "iteration_count": len(trace.iterations),
        "d_l_never_exceeds_k_l": all(it.d_l <= inst.k_l for it in trace.iterations),
        "all_z_in_sl_perp": all(int(it.z, 2) in sl_perp for it in trace.iterations),
        "max_bad_probability": max((it.bad_mass for it in final), default=0.0),
    }


def run_dsl_rounds(
    inst: HspInstance,
    rng: np.random.Generator,
    rounds: int,
    nodes: Sequence[NodeOracle],
    trace: SolverTrace | None = None,
) -> Gf2Basis:
    """Repeat the sampling round; returns S'_l = <Y>^perp."""
    Y = Gf2Basis(inst.u_bits)
    for _ in range(rounds):
        size = Y.rank + 1
        z, new_Y = dsl_round(inst, Y, rng, nodes)
        if trace is not None:
            branch = "extend" if new_Y.rank > Y.rank else "keep"
            trace.iterations.append(Iteration(0, size, str(z), branch, None))
        Y = new_Y
    return perp(Y)


def solve(
    inst: HspInstance,
    seed: int,
    algorithm: str = "full",
    *,
    rounds: int | None = None,
    sl_override: Gf2Basis | None = None,
) -> SolverTrace:
    """Run one pipeline and fill a trace, including the exactness verdict.

    dsl: ``rounds`` sampling rounds (default n - t), reports <Y>^perp.
    ds: S'_l from ``sl_override`` or from dsl rounds, then non-exact assembly.
    edsl: exact S_l search. eds: assembly from ``sl_override`` or from edsl.
    full: edsl followed by eds.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    rng = np.random.default_rng(seed)
    nodes = make_nodes(inst)
    trace = SolverTrace(algorithm, nodes=nodes)
    truth = brute_force_solve(inst)
    true_sl = _left_span(inst, truth)
    rounds = inst.u_bits if rounds is None else rounds

    if algorithm in ("dsl", "ds"):
        if sl_override is not None and algorithm == "ds":
            sl = sl_override
        else:
            sl = run_dsl_rounds(inst, rng, rounds, nodes, trace)
        trace.sl_basis = sl
        if algorithm == "dsl":
            trace.exact = sl.same_span(true_sl)
        else:
            res = ds(inst, sl, nodes)
            trace.subgroup = res.subgroup
            trace.exact = res.subgroup == truth
            trace.diagnostics.update(
                e_l=[str(e) for e in res.e_l],
                k_hat_l=res.k_hat_l,
                missing=[str(s) for s in res.missing],
                subset_of_truth=res.subgroup <= truth,
            )
        return _count_queries(trace)

    if algorithm == "eds" and sl_override is not None:
        sl = sl_override
    else:
        sl = edsl(inst, rng, nodes, trace)
        trace.diagnostics.update(_edsl_diagnostics(inst, trace))
    trace.sl_basis = sl
    if algorithm == "edsl":
        trace.exact = sl.same_span(true_sl)
    else:
        trace.subgroup = eds(inst, sl, nodes)
        trace.exact = trace.subgroup == truth
        trace.diagnostics["subgroup_size"] = len(trace.subgroup)
    return _count_queries(trace)


def _count_queries(trace: SolverTrace) -> SolverTrace:
    trace.diagnostics["quantum_queries_per_node"] = trace.quantum_queries_per_node()
    trace.diagnostics["classical_queries_total"] = trace.classical_queries_total()
    return trace
