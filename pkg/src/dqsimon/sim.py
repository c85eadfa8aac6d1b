"""Sparse state-vector simulation of the distributed Simon circuit.

Register layout, left to right: the u register (n - t qubits), 2^t slot
registers of m qubits (one per node, slot w at bit offset BI(w)*m of the slot
block), and the sorted-signature register (2^t*m qubits).

A state is stored in coordinate form: parallel arrays of u values, packed slot
blocks, sorted-register words and complex amplitudes, one entry per basis key
with non-negligible amplitude. Oracle and sort layers are permutations of the
keys; the Hadamard layer groups keys by their (slots, sorted) part and runs a
Walsh-Hadamard transform over u within each group.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .gf2 import BitVector, Gf2Basis, span_ints
from .instance import HspInstance, NodeOracle

PRUNE = 1e-12


@dataclass(frozen=True)
class RegisterLayout:
    u_bits: int
    slot_count: int
    slot_bits: int

    @classmethod
    def for_instance(cls, inst: HspInstance) -> RegisterLayout:
        return cls(inst.u_bits, 1 << inst.t, inst.m)

    @property
    def sorted_bits(self) -> int:
        return self.slot_count * self.slot_bits

    @property
    def total_qubits(self) -> int:
        return self.u_bits + 2 * self.sorted_bits

    def slot_offset(self, w: int) -> int:
        return w * self.slot_bits


class BasisKey(NamedTuple):
    u: BitVector
    slots: tuple[int, ...]
    sorted: int


def _u64(x: int) -> np.uint64:
    return np.uint64(x)


class QuantumState:
    """Sparse map from basis keys to amplitudes. Operations return new states."""

    __slots__ = ("amp", "layout", "slots", "srt", "u")

    def __init__(self, layout: RegisterLayout, u, slots, srt, amp):
        self.layout = layout
        self.u = np.asarray(u, dtype=np.int64)
        self.slots = np.asarray(slots, dtype=np.uint64)
        self.srt = np.asarray(srt, dtype=np.uint64)
        self.amp = np.asarray(amp, dtype=np.complex128)

    def __len__(self) -> int:
        return len(self.amp)

    def _with(self, u=None, slots=None, srt=None, amp=None) -> QuantumState:
        return QuantumState(
            self.layout,
            self.u if u is None else u,
            self.slots if slots is None else slots,
            self.srt if srt is None else srt,
            self.amp if amp is None else amp,
        )

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amp) ** 2)))

    def scaled(self, c: complex) -> QuantumState:
        return self._with(amp=self.amp * c)

    def unpack_slots(self) -> np.ndarray:
        """Shape (len, slot_count): the value held in every slot register."""
        lay = self.layout
        shifts = np.array([lay.slot_offset(w) for w in range(lay.slot_count)], dtype=np.uint64)
        mask = _u64((1 << lay.slot_bits) - 1)
        return (self.slots[:, None] >> shifts[None, :]) & mask

    def to_dict(self) -> dict[BasisKey, complex]:
        lay = self.layout
        fields = self.unpack_slots()
        return {
            BasisKey(BitVector(lay.u_bits, int(u)), tuple(int(v) for v in row), int(s)): complex(a)
            for u, row, s, a in zip(self.u, fields, self.srt, self.amp)
        }

    @classmethod
    def from_dict(cls, layout: RegisterLayout, entries: Mapping[BasisKey, complex]) -> QuantumState:
        us, slots, srts, amps = [], [], [], []
        for key, a in entries.items():
            if abs(a) < PRUNE:
                continue
            packed = 0
            for w, v in enumerate(key.slots):
                packed |= int(v) << layout.slot_offset(w)
            us.append(key.u.value)
            slots.append(packed)
            srts.append(key.sorted)
            amps.append(a)
        return cls(layout, us, slots, srts, amps)

    def dump(self) -> str:
        """One line per key, ``u|slot0,slot1,...|sorted : re,im``, sorted by key."""
        lay = self.layout

        def num(x: float) -> str:
            return format(0.0 if abs(x) < 1e-15 else x, ".12g")

        lines = []
        for key, a in self.to_dict().items():
            slots = ",".join(format(v, f"0{lay.slot_bits}b") for v in key.slots)
            srt = format(key.sorted, f"0{lay.sorted_bits}b")
            lines.append(f"{key.u}|{slots}|{srt} : {num(a.real)},{num(a.imag)}")
        return "\n".join(sorted(lines))


def zero_state(layout: RegisterLayout) -> QuantumState:
    return QuantumState(layout, [0], [0], [0], [1.0 + 0j])


def _wht_rows(mat: np.ndarray, bits: int) -> np.ndarray:
    rows = mat.shape[0]
    for i in range(bits):
        mat = mat.reshape(rows, 1 << i, 2, 1 << (bits - i - 1))
        a, b = mat[:, :, 0, :], mat[:, :, 1, :]
        mat = np.stack((a + b, a - b), axis=2)
    return mat.reshape(rows, 1 << bits) * (2.0 ** (-bits / 2))


def _group_rest(state: QuantumState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct (slots, sorted) pairs and each entry's group index."""
    if 2 * state.layout.sorted_bits <= 64:
        combined = (state.slots << _u64(state.layout.sorted_bits)) | state.srt
        _, first, inverse = np.unique(combined, return_index=True, return_inverse=True)
    else:
        pairs = np.stack((state.slots, state.srt), axis=1)
        _, first, inverse = np.unique(pairs, axis=0, return_index=True, return_inverse=True)
    return state.slots[first], state.srt[first], inverse.reshape(-1)


def hadamard_u(state: QuantumState) -> QuantumState:
    """H on every qubit of the u register; identity elsewhere."""
    bits = state.layout.u_bits
    slots, srt, group = _group_rest(state)
    mat = np.zeros((len(slots), 1 << bits), dtype=np.complex128)
    mat[group, state.u] = state.amp
    mat = _wht_rows(mat, bits)
    g, u = np.nonzero(np.abs(mat) >= PRUNE)
    return QuantumState(state.layout, u, slots[g], srt[g], mat[g, u])


def apply_node_oracle(state: QuantumState, node: NodeOracle) -> QuantumState:
    """XOR f_w(u) into slot BI(w). Counts one quantum query on ``node``."""
    node.query_count_quantum += 1
    offset = _u64(state.layout.slot_offset(node.index))
    return state._with(slots=state.slots ^ (node.truth_table()[state.u] << offset))


def apply_usort(state: QuantumState) -> QuantumState:
    """XOR the ascending-sorted concatenation of the slot values into the sorted register."""
    lay = state.layout
    ordered = np.sort(state.unpack_slots(), axis=1)
    shifts = np.array(
        [(lay.slot_count - 1 - i) * lay.slot_bits for i in range(lay.slot_count)], dtype=np.uint64
    )
    packed = np.bitwise_or.reduce(ordered << shifts[None, :], axis=1)
    return state._with(srt=state.srt ^ packed)


def _a_steps(nodes: Sequence[NodeOracle]):
    ordered = sorted(nodes, key=lambda nd: nd.index)
    steps = [hadamard_u]
    # Product order: the 0^t oracle acts first; primed order: 1^t first.
    steps += [lambda s, nd=nd: apply_node_oracle(s, nd) for nd in ordered]
    steps.append(apply_usort)
    steps += [lambda s, nd=nd: apply_node_oracle(s, nd) for nd in reversed(ordered)]
    steps.append(hadamard_u)
    return steps


def apply_A(state: QuantumState, nodes: Sequence[NodeOracle]) -> QuantumState:
    for step in _a_steps(nodes):
        state = step(state)
    return state


def apply_A_dagger(state: QuantumState, nodes: Sequence[NodeOracle]) -> QuantumState:
    # Every layer is self-inverse, so the adjoint is the reversed sequence.
    for step in reversed(_a_steps(nodes)):
        state = step(state)
    return state


def apply_R0(state: QuantumState, phi: float) -> QuantumState:
    hit = (state.u == 0) & (state.slots == 0) & (state.srt == 0)
    amp = state.amp.copy()
    amp[hit] *= np.exp(1j * phi)
    return state._with(amp=amp)


def span_mask(Y: Gf2Basis) -> np.ndarray:
    """Boolean array over all u: True where u lies in the span of Y."""
    mask = np.zeros(1 << Y.ambient_width, dtype=bool)
    mask[span_ints(Y.ints())] = True
    return mask


def apply_RA(state: QuantumState, varphi: float, Y: Gf2Basis) -> QuantumState:
    if Y.ambient_width != state.layout.u_bits:
        raise ValueError("Y must live in the u register")
    outside = ~span_mask(Y)[state.u]
    amp = state.amp.copy()
    amp[outside] *= np.exp(1j * varphi)
    return state._with(amp=amp)


def apply_Q(
    state: QuantumState, phi: float, varphi: float, Y: Gf2Basis, nodes: Sequence[NodeOracle]
) -> QuantumState:
    """-A R0(phi) A^dagger (R_A(varphi, Y) x I), applied right to left."""
    state = apply_RA(state, varphi, Y)
    state = apply_A_dagger(state, nodes)
    state = apply_R0(state, phi)
    state = apply_A(state, nodes)
    return state.scaled(-1.0)


def marginal(state: QuantumState) -> np.ndarray:
    """Dense first-register probabilities indexed by the integer value of u."""
    return np.bincount(
        state.u, weights=np.abs(state.amp) ** 2, minlength=1 << state.layout.u_bits
    )


def first_register_distribution(state: QuantumState) -> dict[BitVector, float]:
    probs = marginal(state)
    bits = state.layout.u_bits
    return {BitVector(bits, int(u)): float(probs[u]) for u in np.flatnonzero(probs)}


def measure_first_register(state: QuantumState, rng: np.random.Generator) -> BitVector:
    probs = marginal(state)
    u = rng.choice(len(probs), p=probs / probs.sum())
    return BitVector(state.layout.u_bits, int(u))


def mass_on(state: QuantumState, Y: Gf2Basis) -> float:
    """First-register probability on span(Y)."""
    return float(np.sum(np.abs(state.amp[span_mask(Y)[state.u]]) ** 2))


def project_first_register(state: QuantumState, allowed: Iterable[int] | np.ndarray) -> QuantumState:
    """Unnormalized projection onto keys whose u is in ``allowed``."""
    mask = np.zeros(1 << state.layout.u_bits, dtype=bool)
    mask[np.fromiter(allowed, dtype=np.int64) if not isinstance(allowed, np.ndarray) else allowed] = True
    keep = mask[state.u]
    return state._with(u=state.u[keep], slots=state.slots[keep], srt=state.srt[keep], amp=state.amp[keep])


def _keyed(state: QuantumState) -> dict[tuple[int, int, int], complex]:
    return {
        (int(u), int(sl), int(sr)): complex(a)
        for u, sl, sr, a in zip(state.u, state.slots, state.srt, state.amp)
    }


def inner(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>."""
    kb = _keyed(b)
    return sum((amp.conjugate() * kb.get(key, 0.0) for key, amp in _keyed(a).items()), 0j)


def add(a: QuantumState, b: QuantumState, cb: complex = 1.0) -> QuantumState:
    """a + cb*b, keys merged."""
    merged = _keyed(a)
    for key, amp in _keyed(b).items():
        merged[key] = merged.get(key, 0j) + cb * amp
    items = [(k, v) for k, v in merged.items() if abs(v) >= PRUNE]
    if not items:
        return QuantumState(a.layout, [], [], [], [])
    keys, vals = zip(*items)
    u, sl, sr = zip(*keys)
    return QuantumState(a.layout, u, sl, sr, vals)


def max_abs_diff(a: QuantumState, b: QuantumState) -> float:
    diff = add(a, b, -1.0)
    return float(np.max(np.abs(diff.amp))) if len(diff) else 0.0


def random_state(layout: RegisterLayout, rng: np.random.Generator, size: int = 16) -> QuantumState:
    """Normalized random superposition over ``size`` random basis keys (for property tests)."""
    u = rng.integers(0, 1 << layout.u_bits, size=size)
    slots = rng.integers(0, 1 << min(layout.sorted_bits, 63), size=size, dtype=np.uint64)
    srt = rng.integers(0, 1 << min(layout.sorted_bits, 63), size=size, dtype=np.uint64)
    amp = rng.normal(size=size) + 1j * rng.normal(size=size)
    keyed: dict[tuple[int, int, int], complex] = {}
    for key in zip(u.tolist(), slots.tolist(), srt.tolist()):
        keyed[key] = complex(amp[len(keyed)])
    keys, vals = zip(*keyed.items())
    us, sls, srs = zip(*keys)
    vals = np.array(vals)
    vals /= np.linalg.norm(vals)
    return QuantumState(layout, us, sls, srs, vals)


__all__ = [
    "BasisKey",
    "QuantumState",
    "RegisterLayout",
    "apply_A",
    "apply_A_dagger",
    "apply_Q",
    "apply_R0",
    "apply_RA",
    "apply_node_oracle",
    "apply_usort",
    "first_register_distribution",
    "hadamard_u",
    "inner",
    "marginal",
    "mass_on",
    "measure_first_register",
    "project_first_register",
    "zero_state",
]
