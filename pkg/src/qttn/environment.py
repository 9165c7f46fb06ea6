"""Renormalized operator environments on a tree tensor network.

Cutting the link between neighbouring nodes ``src`` and ``dst`` splits the
tree in two.  The environment ``env[src -> dst]`` describes the region on
the ``src`` side, renormalized onto the link:

* ``H`` is the sum of Hamiltonian terms supported entirely inside the
  region (``None`` if there are none);
* ``ops[(site, pauli)]`` are the single-site factors of two-site terms
  that straddle the cut, each renormalized onto the link.

Operators are matrices acting as ``out[i] = sum_j op[i, j] T[j]`` on a leg
of the ``dst`` tensor.  While the center sits at ``c`` every edge pointing
toward ``c`` holds a valid entry; moving the center from ``a`` to ``b`` only
recomputes ``env[a -> b]``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .precision import Precision
from .symmetric import IN, Z2Link, bcontract, sparsify
from .tensor import Tensor, contract

__all__ = ["EnvBlock", "Environment", "EffectiveHamiltonian", "pauli_matrix", "pauli_operator"]

_PAULI = {
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}
_PAULI_CHARGE = {"X": 1, "Z": 0}
PHYS_LINK = Z2Link((1, 1), IN)


def pauli_matrix(p: str) -> np.ndarray:
    return _PAULI[p].copy()


def pauli_operator(p: str, precision: Precision, backend: str, symmetric: bool):
    if symmetric:
        return sparsify(Tensor(_PAULI[p], precision, backend), [PHYS_LINK, PHYS_LINK.flip()],
                        charge=_PAULI_CHARGE[p])
    return Tensor(_PAULI[p], precision, backend)


@dataclass
class EnvBlock:
    H: object = None
    ops: dict = field(default_factory=dict)

    def astype(self, precision):
        return EnvBlock(None if self.H is None else self.H.astype(precision),
                        {k: v.astype(precision) for k, v in self.ops.items()})


_EMPTY = EnvBlock()


def _project(t, applied, leg_out: int):
    """``<T| applied>`` over every leg but ``leg_out`` (which must be last)."""
    if t.is_symmetric:
        return bcontract(t.conj(), applied, [0, 1], [0, 1])
    return contract(t.conj(), applied, [0, 1], [0, 1])


class Environment:
    """Cache of ``env[src -> dst]`` blocks for one Hamiltonian."""

    def __init__(self, state, terms):
        self.state = state
        self.topology = state.topology
        self.terms = terms
        self.const = 0.0
        self.single = defaultdict(list)
        self.pairs = []
        n = self.topology.num_sites
        for t in terms:
            if any(s >= n for s in t.sites):
                raise ValueError(f"term {t} references a site outside the lattice")
            if len(t.factors) == 0:
                self.const += t.weight
            elif len(t.factors) == 1:
                self.single[t.factors[0][0]].append((t.weight, t.factors[0][1]))
            elif len(t.factors) == 2:
                self.pairs.append((t.weight, t.factors[0], t.factors[1]))
            else:
                raise ValueError("environments support terms with at most two factors")
        self.blocks: dict = {}
        self._edge_plans: dict = {}
        self._center_plans: dict = {}
        self._build(state.center)

    # -------------------------------------------------------------- regions
    def _region(self, src, dst):
        """Site interval ``(lo, hi, inside)``: inside or outside ``[lo, hi)``."""
        if src is None:
            return (0, 0, True)
        if self.topology.contains(src, dst):
            lo, hi = self.topology.site_range(dst)
            return (lo, hi, False)
        lo, hi = self.topology.site_range(src)
        return (lo, hi, True)

    @staticmethod
    def _in(site, region):
        lo, hi, inside = region
        return (lo <= site < hi) == inside

    def copy_for(self, state) -> "Environment":
        new = object.__new__(Environment)
        new.__dict__.update(self.__dict__)
        new.state = state
        new.blocks = dict(self.blocks)
        return new

    def astype(self, precision):
        precision = Precision.parse(precision)
        self.blocks = {k: v.astype(precision) for k, v in self.blocks.items()}

    def _precision(self):
        return self.state.precision

    # ---------------------------------------------------------------- leaves
    def _leaf(self, site):
        st = self.state
        prec, be, sym = st.precision, st.backend, st.symmetric
        h = None
        for w, p in self.single.get(site, ()):
            op = pauli_operator(p, prec, be, sym) * w
            h = op if h is None else h + op
        ops = {}
        needed = set()
        for _, f1, f2 in self.pairs:
            if f1[0] == site and f2[0] != site:
                needed.add(f1)
            elif f2[0] == site and f1[0] != site:
                needed.add(f2)
        for f in needed:
            ops[f] = pauli_operator(f[1], prec, be, sym)
        return EnvBlock(h, ops)

    # ----------------------------------------------------------------- plans
    def _edge_plan(self, src, dst):
        key = (src, dst)
        plan = self._edge_plans.get(key)
        if plan is not None:
            return plan
        topo = self.topology
        nbrs = [u for u in topo.neighbors(src) if u != dst]
        legs = [topo.leg_towards(src, u) if u is not None else 2 for u in nbrs]
        leg_dst = topo.leg_towards(src, dst)
        regions = [self._region(u, src) for u in nbrs]
        out_region = self._region(src, dst)
        cross = []
        needed = []
        for w, f1, f2 in self.pairs:
            in1, in2 = self._in(f1[0], out_region), self._in(f2[0], out_region)
            if in1 and in2:
                side1 = 0 if self._in(f1[0], regions[0]) else 1
                side2 = 0 if self._in(f2[0], regions[0]) else 1
                if side1 != side2:
                    cross.append((w, (side1, f1), (side2, f2)))
            elif in1 != in2:
                f = f1 if in1 else f2
                needed.append((0 if self._in(f[0], regions[0]) else 1, f))
        needed = sorted(set(needed))
        plan = (nbrs, legs, leg_dst, _group_cross(cross), needed)
        self._edge_plans[key] = plan
        return plan

    def _center_plan(self, node):
        plan = self._center_plans.get(node)
        if plan is not None:
            return plan
        topo = self.topology
        nbrs = topo.neighbors(node)
        regions = [self._region(u, node) for u in nbrs]
        cross = []
        for w, f1, f2 in self.pairs:
            s1 = next(k for k in range(3) if self._in(f1[0], regions[k]))
            s2 = next(k for k in range(3) if self._in(f2[0], regions[k]))
            if s1 != s2:
                cross.append((w, (s1, f1), (s2, f2)))
        plan = (nbrs, _group_cross(cross))
        self._center_plans[node] = plan
        return plan

    # -------------------------------------------------------------- updates
    def _block(self, src, dst):
        if src is None:
            return _EMPTY
        if src[0] < 0:
            blk = self.blocks.get((src, dst))
            if blk is None:
                blk = self._leaf(src[1])
                self.blocks[(src, dst)] = blk
            return blk
        return self.blocks[(src, dst)]

    def _build(self, center):
        topo = self.topology

        def ensure(src, dst):
            if (src, dst) in self.blocks:
                return
            if src[0] >= 0:
                for u in topo.neighbors(src):
                    if u is not None and u != dst:
                        ensure(u, src)
            self._compute(src, dst)

        for u in topo.neighbors(center):
            if u is not None:
                ensure(u, center)

    def update_edge(self, src, dst):
        """Recompute ``env[src -> dst]`` after ``src`` became an isometry toward ``dst``."""
        self._compute(src, dst)

    def _compute(self, src, dst):
        if src[0] < 0:
            self.blocks[(src, dst)] = self._leaf(src[1])
            return
        nbrs, legs, leg_dst, cross, needed = self._edge_plan(src, dst)
        t = self.state.tensors[src].transpose(legs + [leg_dst])
        envs = [self._block(u, src) for u in nbrs]
        h_t = None
        for k in range(2):
            if envs[k].H is not None:
                part = t.apply(envs[k].H, k)
                h_t = part if h_t is None else h_t + part
        for part in _apply_cross(t, cross, envs):
            h_t = part if h_t is None else h_t + part
        H = None if h_t is None else _project(t, h_t, 2)
        ops = {}
        for side, f in needed:
            ops[f] = _project(t, t.apply(envs[side].ops[f], side), 2)
        self.blocks[(src, dst)] = EnvBlock(H, ops)


def _group_cross(cross):
    """Group ``w * A_i B_j`` terms by the factor with fewer distinct values.

    Returns ``[(leg_a, key_a, leg_b, [(w, key_b), ...]), ...]``.
    """
    if not cross:
        return []
    by_first = defaultdict(list)
    by_second = defaultdict(list)
    for w, (s1, f1), (s2, f2) in cross:
        by_first[(s1, f1, s2)].append((w, f2))
        by_second[(s2, f2, s1)].append((w, f1))
    groups = by_first if len(by_first) <= len(by_second) else by_second
    return [(la, ka, lb, items) for (la, ka, lb), items in sorted(groups.items())]


def _summed(items, env):
    acc = None
    for w, key in items:
        op = env.ops[key] * w
        acc = op if acc is None else acc + op
    return acc


def _apply_cross(t, groups, envs):
    for la, ka, lb, items in groups:
        m = _summed(items, envs[lb])
        yield t.apply(m, lb).apply(envs[la].ops[ka], la)


class EffectiveHamiltonian:
    """The Hamiltonian projected onto the tensor at ``node``."""

    def __init__(self, env: Environment, node):
        self.node = node
        nbrs, groups = env._center_plan(node)
        blocks = [env._block(u, node) for u in nbrs]
        self.const = env.const
        self.fields = [(leg, b.H) for leg, b in enumerate(blocks) if b.H is not None]
        self.pairs = [(la, blocks[la].ops[ka], lb, _summed(items, blocks[lb])) for la, ka, lb, items in groups]

    def apply(self, t):
        out = t * self.const if self.const else None
        for leg, h in self.fields:
            part = t.apply(h, leg)
            out = part if out is None else out + part
        for la, a, lb, m in self.pairs:
            part = t.apply(m, lb).apply(a, la)
            out = part if out is None else out + part
        return t.zeros_like() if out is None else out

    def matvec(self, vec: np.ndarray, template) -> np.ndarray:
        return self.apply(template.from_vector(vec)).to_vector()

    def dense_matrix(self, template) -> np.ndarray:
        """Explicit matrix in the ``to_vector`` basis of ``template`` (tests and small problems)."""
        n = template.vector_size
        dtype = template.precision.dtype
        cols = []
        for i in range(n):
            e = np.zeros(n, dtype=dtype)
            e[i] = 1
            cols.append(self.matvec(e, template))
        return np.stack(cols, axis=1)
