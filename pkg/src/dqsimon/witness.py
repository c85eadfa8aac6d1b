"""Search for inputs on which the non-exact assembly misses part of S."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .algorithms import ds, run_dsl_rounds
from .gf2 import BitVector, Gf2Basis
from .instance import HspInstance, ProblemParams, generate, make_nodes


@dataclass
class DsWitness:
    instance: HspInstance
    sl_prime: Gf2Basis
    rounds: int
    result: set[BitVector]
    missing: list[BitVector]

    def to_json(self) -> dict:
        p = self.instance.params
        return {
            "params": {"n": p.n, "t": p.t, "m": p.m, "k": p.k, "seed": p.seed},
            "s_basis": [str(v) for v in self.instance.s_basis],
            "sl_basis": [str(v) for v in self.instance.sl_basis],
            "sl_prime_basis": [str(v) for v in self.sl_prime],
            "dsl_rounds": self.rounds,
            "result": sorted(str(s) for s in self.result),
            "missing": [str(s) for s in self.missing],
        }


def find_ds_witness(
    max_n: int = 6, ts: Iterable[int] = (1, 2), seeds: Iterable[int] = range(20)
) -> DsWitness | None:
    """First (instance, S'_l) in a fixed scan order where the assembly loses elements of S.

    S'_l is <Y>^perp after too few sampling rounds, the situation in which the
    sampled Y need not span all of S_l^perp.
    """
    seeds = list(seeds)
    for n in range(3, max_n + 1):
        for t in ts:
            if t >= n:
                continue
            for k in range(1, n + 1):
                for seed in seeds:
                    inst = generate(ProblemParams(n, t, max(n - k, 1), k, seed))
                    if inst.k_l == 0:
                        continue
                    for rounds in range(inst.u_bits - inst.k_l):
                        rng = np.random.default_rng(seed)
                        nodes = make_nodes(inst)
                        sl_prime = run_dsl_rounds(inst, rng, rounds, nodes)
                        res = ds(inst, sl_prime, nodes)
                        if res.missing:
                            return DsWitness(inst, sl_prime, rounds, res.subgroup, res.missing)
    return None
