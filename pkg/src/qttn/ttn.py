"""Binary tree tensor network states.

Nodes are ``(layer, position)`` pairs.  Layer 0 holds the tensors whose
children are physical sites; physical sites themselves are addressed as
``(-1, site)`` so that every child reference is uniform.  Each tensor has
three legs: ``0`` left child, ``1`` right child, ``2`` parent.  The top
node's parent leg is a dimension-1 selector (in symmetric states it pins
the even parity sector).
"""

from __future__ import annotations

import copy as _copy
import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TopologyError
from .precision import Precision
from .symmetric import IN, OUT, BlockSparseTensor, Z2Link, random_block_tensor
from .tensor import Tensor, isometry_deviation, random_tensor

__all__ = [
    "TTNTopology",
    "TTNState",
    "random_state",
    "product_state",
    "move_center",
    "truncate_link",
    "expectation",
    "densify_state",
    "PHYSICAL_DIM",
]

PHYSICAL_DIM = 2
MAX_DENSE_SITES = 16

Node = tuple


class TTNTopology:
    """Complete binary tree over ``num_sites`` leaves (a power of two)."""

    def __init__(self, num_sites: int):
        num_sites = int(num_sites)
        if num_sites < 2 or num_sites & (num_sites - 1):
            raise TopologyError(f"binary trees need a power-of-two number of sites >= 2, got {num_sites}")
        self.num_sites = num_sites
        self.num_layers = num_sites.bit_length() - 1

    def __eq__(self, other):
        return isinstance(other, TTNTopology) and other.num_sites == self.num_sites

    def __hash__(self):
        return hash(self.num_sites)

    def __repr__(self):
        return f"TTNTopology(num_sites={self.num_sites})"

    @property
    def top(self) -> Node:
        return (self.num_layers - 1, 0)

    def layer_size(self, layer: int) -> int:
        return self.num_sites >> (layer + 1)

    def nodes(self) -> list[Node]:
        """All tensor nodes, lowest layer first."""
        return [(l, p) for l in range(self.num_layers) for p in range(self.layer_size(l))]

    def check_node(self, node):
        node = tuple(node)
        if len(node) != 2 or not 0 <= node[0] < self.num_layers or not 0 <= node[1] < self.layer_size(node[0]):
            raise TopologyError(f"{node} is not a node of {self}")
        return node

    def children(self, node: Node) -> tuple[Node, Node]:
        l, p = node
        return (l - 1, 2 * p), (l - 1, 2 * p + 1)

    def parent(self, node: Node):
        l, p = node
        if l == self.num_layers - 1:
            return None
        return (l + 1, p // 2)

    def neighbors(self, node: Node) -> list:
        """``[left child, right child, parent]``; the top's parent is ``None``."""
        left, right = self.children(node)
        return [left, right, self.parent(node)]

    def site_range(self, node: Node) -> tuple[int, int]:
        l, p = node
        width = 1 << (l + 1)
        return p * width, (p + 1) * width

    def contains(self, node: Node, other: Node) -> bool:
        """True if ``other`` (node or site) lies in the subtree rooted at ``node``."""
        lo, hi = self.site_range(node)
        olo, ohi = self.site_range(other)
        return other[0] <= node[0] and lo <= olo and ohi <= hi

    def leg_towards(self, node: Node, target: Node) -> int | None:
        if target == node:
            return None
        left, right = self.children(node)
        if self.contains(left, target):
            return 0
        if self.contains(right, target):
            return 1
        return 2

    def path(self, a: Node, b: Node) -> list[Node]:
        """Nodes visited when walking from ``a`` to ``b`` (both included)."""
        up_a, up_b = [a], [b]
        while not self.contains(up_a[-1], b):
            up_a.append(self.parent(up_a[-1]))
        lca = up_a[-1]
        while up_b[-1] != lca:
            up_b.append(self.parent(up_b[-1]))
        return up_a + up_b[-2::-1]

    def preorder(self) -> list[Node]:
        """Depth-first order from the top: node, left subtree, right subtree."""
        out = []
        stack = [self.top]
        while stack:
            node = stack.pop()
            out.append(node)
            if node[0] > 0:
                left, right = self.children(node)
                stack.append(right)
                stack.append(left)
        return out

    def postorder(self) -> list[Node]:
        return list(reversed([n for n in self._reverse_post()]))

    def _reverse_post(self):
        out = []
        stack = [self.top]
        while stack:
            node = stack.pop()
            out.append(node)
            if node[0] > 0:
                left, right = self.children(node)
                stack.append(left)
                stack.append(right)
        return out


def _leg_link_dim(t, leg: int) -> int:
    return t.shape[leg]


class TTNState:
    """Tree tensor network with a single isometry center.

    The state is mutated in place by its methods (sweeps own their state);
    the module-level functions return modified copies.
    """

    def __init__(self, topology: TTNTopology, tensors: dict, center: Node, max_bond_dim: int,
                 symmetric: bool = False):
        self.topology = topology
        self.tensors = dict(tensors)
        self.center = topology.check_node(center)
        self.max_bond_dim = int(max_bond_dim)
        self.symmetric = bool(symmetric)
        self.env = None
        self.energy: float | None = None

    # ------------------------------------------------------------------ info
    @property
    def precision(self) -> Precision:
        return self.tensors[self.topology.top].precision

    @property
    def backend(self) -> str:
        return self.tensors[self.topology.top].backend

    @property
    def num_sites(self) -> int:
        return self.topology.num_sites

    def __repr__(self):
        return (f"TTNState(num_sites={self.num_sites}, chi={self.max_bond_dim}, precision={self.precision.value}, "
                f"center={self.center}, symmetric={self.symmetric})")

    def copy(self) -> "TTNState":
        new = TTNState(self.topology, self.tensors, self.center, self.max_bond_dim, self.symmetric)
        new.energy = self.energy
        if self.env is not None:
            new.env = self.env.copy_for(new)
        return new

    def link_dims(self) -> dict:
        """Dimension of every node's parent link."""
        return {n: self.tensors[n].shape[2] for n in self.topology.nodes()}

    def nbytes(self) -> int:
        return sum(t.nbytes for t in self.tensors.values())

    def norm(self) -> float:
        return self.tensors[self.center].norm()

    def normalize(self) -> "TTNState":
        nrm = self.norm()
        if nrm > 0:
            self.tensors[self.center] = self.tensors[self.center] / nrm
        return self

    def astype(self, precision) -> "TTNState":
        """Convert every tensor (and the attached environment) in place."""
        precision = Precision.parse(precision)
        self.tensors = {n: t.astype(precision) for n, t in self.tensors.items()}
        if self.env is not None:
            self.env.astype(precision)
        return self

    def isometry_errors(self) -> dict:
        """``max |Q^H Q - I|`` for every non-center tensor, with its center-facing leg as column."""
        out = {}
        for node, t in self.tensors.items():
            if node == self.center:
                continue
            leg = self.topology.leg_towards(node, self.center)
            dense = t.densify() if self.symmetric else t
            out[node] = isometry_deviation(dense, leg)
        return out

    def check_isometries(self, tol: float | None = None) -> bool:
        tol = self.precision.isometry_tol if tol is None else tol
        return all(err <= tol for err in self.isometry_errors().values())

    # ------------------------------------------------------------- mutation
    def attach_environment(self, terms):
        from .environment import Environment

        self.env = Environment(self, terms)
        return self.env

    def _decompose_kwargs(self, t, leg):
        if self.symmetric:
            return {"bond_direction": t.links[leg].direction}
        return {}

    def step(self, a: Node, b: Node, mode: str = "qr", max_rank: int | None = None, cutoff: float = 1e-9,
             algorithm: str = "direct", tile: int | None = None) -> float:
        """Move the center from ``a`` to its neighbor ``b``; returns the truncation error.

        ``mode="qr"`` is exact; ``mode="svd"`` truncates the shared link.
        """
        topo = self.topology
        if a != self.center:
            raise TopologyError(f"center is at {self.center}, not {a}")
        leg_a = topo.leg_towards(a, b)
        leg_b = topo.leg_towards(b, a)
        if b not in topo.neighbors(a) or leg_a is None:
            raise TopologyError(f"{a} and {b} are not adjacent")
        t = self.tensors[a]
        others = [i for i in range(3) if i != leg_a]
        order = others + [leg_a]
        inverse = list(np.argsort(order))
        kw = self._decompose_kwargs(t, leg_a)
        if mode == "qr":
            q, carry = t.qr(others, [leg_a], **kw)
            err = 0.0
        elif mode == "svd":
            res = t.svd(others, [leg_a], max_rank=max_rank, cutoff=cutoff, algorithm=algorithm, tile=tile, **kw)
            q, carry, err = res.U, res.sv(), res.truncation_error
        else:
            raise ValueError(f"unknown step mode {mode!r}")
        self.tensors[a] = q.transpose(inverse)
        self.tensors[b] = self.tensors[b].apply(carry, leg_b)
        self.center = b
        if self.env is not None:
            self.env.update_edge(a, b)
        return float(err)

    def move_to(self, target: Node, mode: str = "qr", **kwargs) -> float:
        target = self.topology.check_node(target)
        path = self.topology.path(self.center, target)
        worst = 0.0
        for a, b in zip(path, path[1:]):
            worst = max(worst, self.step(a, b, mode=mode, **kwargs))
        return worst


# --------------------------------------------------------------- builders
def _dense_link_dims(topology: TTNTopology, chi: int) -> dict:
    dims = {}
    for node in topology.nodes():
        l, _ = node
        if node == topology.top:
            dims[node] = 1
            continue
        if l == 0:
            dl = dr = PHYSICAL_DIM
        else:
            left, right = topology.children(node)
            dl, dr = dims[left], dims[right]
        dims[node] = min(chi, dl * dr)
    return dims


def _z2_link_dims(topology: TTNTopology, chi: int) -> dict:
    dims = {}
    phys = (1, 1)
    for node in topology.nodes():
        l, _ = node
        if node == topology.top:
            dims[node] = (1, 0)
            continue
        if l == 0:
            a, b = phys, phys
        else:
            left, right = topology.children(node)
            a, b = dims[left], dims[right]
        f0 = a[0] * b[0] + a[1] * b[1]
        f1 = a[0] * b[1] + a[1] * b[0]
        if f0 + f1 <= chi:
            dims[node] = (f0, f1)
        else:
            d0 = min(f0, -(-chi // 2))
            d1 = min(f1, chi - d0)
            d0 = min(f0, chi - d1)
            dims[node] = (d0, d1)
    return dims


def _child_dim(topology, dims, node, k, symmetric):
    if node[0] == 0:
        return (1, 1) if symmetric else PHYSICAL_DIM
    return dims[topology.children(node)[k]]


def _isometrize(state: TTNState):
    """QR every tensor toward the top, bottom-up, then normalize the top."""
    topo = state.topology
    state.center = topo.top
    for node in topo.nodes():
        if node == topo.top:
            continue
        t = state.tensors[node]
        kw = state._decompose_kwargs(t, 2)
        q, r = t.qr([0, 1], [2], **kw)
        parent = topo.parent(node)
        state.tensors[node] = q
        state.tensors[parent] = state.tensors[parent].apply(r, topo.leg_towards(parent, node))
    state.normalize()
    return state


def random_state(topology: TTNTopology, chi: int, precision: Precision | str = Precision.D, seed=None,
                 backend: str = "optimized", symmetric: bool = False) -> TTNState:
    """Random isometrized state, center at the top, link dims ``min(chi, product of child dims)``."""
    if chi < PHYSICAL_DIM:
        raise ValueError(f"bond dimension must be >= {PHYSICAL_DIM}")
    precision = Precision.parse(precision)
    rng = np.random.default_rng(seed)
    tensors = {}
    if symmetric:
        dims = _z2_link_dims(topology, chi)
        for node in topology.nodes():
            links = [Z2Link(_child_dim(topology, dims, node, 0, True), IN),
                     Z2Link(_child_dim(topology, dims, node, 1, True), IN),
                     Z2Link(dims[node], OUT)]
            tensors[node] = random_block_tensor(links, precision, int(rng.integers(2**63)), backend=backend)
    else:
        dims = _dense_link_dims(topology, chi)
        for node in topology.nodes():
            shape = (_child_dim(topology, dims, node, 0, False), _child_dim(topology, dims, node, 1, False),
                     dims[node])
            tensors[node] = random_tensor(shape, precision, int(rng.integers(2**63)), backend)
    state = TTNState(topology, tensors, topology.top, chi, symmetric)
    return _isometrize(state)


def product_state(topology: TTNTopology, bits, chi: int = 2, precision: Precision | str = Precision.D,
                  backend: str = "optimized") -> TTNState:
    """Computational-basis product state ``|bits>`` with all internal links of dimension 1."""
    precision = Precision.parse(precision)
    bits = [int(b) for b in bits]
    if len(bits) != topology.num_sites:
        raise ShapeError("one bit per site required")
    tensors = {}
    for node in topology.nodes():
        if node[0] == 0:
            lo, _ = topology.site_range(node)
            arr = np.zeros((PHYSICAL_DIM, PHYSICAL_DIM, 1))
            arr[bits[lo], bits[lo + 1], 0] = 1.0
        else:
            arr = np.ones((1, 1, 1))
        tensors[node] = Tensor(arr, precision, backend)
    return TTNState(topology, tensors, topology.top, chi, False)


# ----------------------------------------------------------- operations
def move_center(state: TTNState, target: Node) -> TTNState:
    """Copy of ``state`` with the isometry center moved to ``target`` by QR steps."""
    target = state.topology.check_node(target)
    if target == state.center:
        return state
    new = state.copy()
    new.move_to(target, mode="qr")
    return new


def truncate_link(state: TTNState, node: Node, max_rank: int | None = None, cutoff: float = 1e-9,
                  tiling=None, algorithm: str = "direct"):
    """SVD-truncate the link between the center and its neighbor ``node``.

    The center keeps ``U diag(s)``; ``V`` is absorbed into ``node``, which
    stays an isometry.  No renormalization.  Returns ``(new_state, svd)``.
    """
    topo = state.topology
    c = state.center
    node = topo.check_node(node)
    if node not in topo.neighbors(c):
        raise TopologyError(f"{node} is not adjacent to the center {c}")
    max_rank = state.max_bond_dim if max_rank is None else max_rank
    new = state.copy()
    leg_c = topo.leg_towards(c, node)
    leg_n = topo.leg_towards(node, c)
    t = new.tensors[c]
    others = [i for i in range(3) if i != leg_c]
    tile = tiling.tile_entries(t.precision) if tiling is not None and tiling.enabled else None
    res = t.svd(others, [leg_c], max_rank=max_rank, cutoff=cutoff, algorithm=algorithm, tile=tile,
                **new._decompose_kwargs(t, leg_c))
    new.tensors[c] = res.us().transpose(list(np.argsort(others + [leg_c])))
    new.tensors[node] = new.tensors[node].apply(res.V, leg_n)
    if new.env is not None:
        new.env.update_edge(node, c)
    return new, res


def expectation(state: TTNState, terms) -> float:
    """``sum_k w_k <psi|P_k|psi>`` contracted through the tree's environments."""
    from .environment import Environment, EffectiveHamiltonian

    for t in terms:
        if any(s >= state.num_sites for s in t.sites):
            raise ValueError(f"term {t} references a site outside the lattice")
    env = state.env if state.env is not None and state.env.terms is terms else Environment(state, terms)
    heff = EffectiveHamiltonian(env, state.center)
    c = state.tensors[state.center]
    val = c.vdot(heff.apply(c))
    val = complex(val)
    if state.precision.is_double and abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value has imaginary residue {val.imag:.3e}")
    return float(val.real)


def densify_state(state: TTNState) -> np.ndarray:
    """Full ``2**num_sites`` amplitude vector, site 0 most significant."""
    topo = state.topology
    if topo.num_sites > MAX_DENSE_SITES:
        raise ShapeError(f"densify_state supports at most {MAX_DENSE_SITES} sites")
    partial = {}
    for node in topo.nodes():
        t = state.tensors[node]
        arr = (t.densify() if state.symmetric else t).data
        if node[0] == 0:
            partial[node] = arr.reshape(PHYSICAL_DIM * PHYSICAL_DIM, arr.shape[2])
        else:
            left, right = topo.children(node)
            pl, pr = partial.pop(left), partial.pop(right)
            psi = np.einsum("xa,yb,abp->xyp", pl, pr, arr)
            partial[node] = psi.reshape(pl.shape[0] * pr.shape[0], arr.shape[2])
    return partial[topo.top][:, 0].copy()


def exact_regime_chi(num_sites: int) -> int:
    """Smallest bond dimension that makes every link untruncated."""
    return 2 ** (num_sites // 2)


def log2_int(n: int) -> int:
    return int(math.log2(n))
