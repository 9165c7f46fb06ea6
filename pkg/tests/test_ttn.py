import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kron_hamiltonian
from qttn.errors import ShapeError, TopologyError
from qttn.exact import parity_expectation
from qttn.ising import IsingModelSpec, PauliString, build_hamiltonian
from qttn.search import TilingPolicy
from qttn.ttn import (TTNTopology, densify_state, exact_regime_chi, expectation, move_center, product_state,
                      random_state, truncate_link)


def dense_energy(state, terms):
    psi = densify_state(state)
    h = kron_hamiltonian(state.num_sites, terms)
    return float(np.real(np.vdot(psi, h @ psi)) / np.real(np.vdot(psi, psi)))


def overlap(a, b):
    return abs(np.vdot(densify_state(a), densify_state(b)))


def random_terms(n, seed):
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(12):
        k = int(rng.integers(1, 3))
        sites = rng.choice(n, size=k, replace=False)
        terms.append(PauliString(float(rng.normal()), {int(s): str(rng.choice(["X", "Z"])) for s in sites}))
    return terms


@pytest.mark.parametrize("num_sites", [2, 4, 8, 64, 256])
def test_topology_counts(num_sites):
    topo = TTNTopology(num_sites)
    assert topo.num_layers == int(np.log2(num_sites))
    for layer in range(topo.num_layers):
        assert topo.layer_size(layer) == num_sites // 2 ** (layer + 1)
    assert topo.layer_size(topo.num_layers - 1) == 1
    nodes = topo.nodes()
    assert len(nodes) == num_sites - 1
    assert sorted(topo.preorder()) == sorted(nodes) and topo.preorder()[0] == topo.top
    for node in nodes:
        parent = topo.parent(node)
        if node == topo.top:
            assert parent is None
        else:
            assert node in topo.children(parent)
    assert topo.postorder()[-1] == topo.top


def test_topology_errors_and_paths():
    for bad in (0, 1, 3, 12):
        with pytest.raises(TopologyError):
            TTNTopology(bad)
    topo = TTNTopology(8)
    with pytest.raises(TopologyError):
        topo.check_node((3, 0))
    assert topo.path((0, 0), (0, 3)) == [(0, 0), (1, 0), (2, 0), (1, 1), (0, 3)]
    assert topo.path((1, 1), (1, 1)) == [(1, 1)]
    assert topo.site_range((1, 1)) == (4, 8)
    assert topo.leg_towards((1, 0), (0, 1)) == 1 and topo.leg_towards((1, 0), (0, 2)) == 2
    assert topo.preorder() == [(2, 0), (1, 0), (0, 0), (0, 1), (1, 1), (0, 2), (0, 3)]


def test_random_state_shapes():
    s = random_state(TTNTopology(4), 4, seed=0)
    assert s.tensors[(0, 0)].shape == (2, 2, 4) and s.tensors[(0, 1)].shape == (2, 2, 4)
    assert s.tensors[(1, 0)].shape == (4, 4, 1)
    assert s.center == (1, 0)
    assert abs(s.norm() - 1.0) < 1e-12
    small = random_state(TTNTopology(8), 2, seed=1)
    assert all(d == 2 for n, d in small.link_dims().items() if n != small.topology.top)
    with pytest.raises(ValueError):
        random_state(TTNTopology(4), 1)


@pytest.mark.parametrize("chi", [2, 3, 8, 64])
def test_link_dims_capped(chi):
    s = random_state(TTNTopology(16), chi, seed=2)
    for node, d in s.link_dims().items():
        lo, hi = s.topology.site_range(node)
        cap = 1 if node == s.topology.top else min(chi, 2 ** (hi - lo))
        assert d == cap
    assert s.check_isometries()


def test_norm_and_isometries_all_precisions():
    for p in "SCDZ":
        s = random_state(TTNTopology(8), 8, p, seed=3)
        assert s.precision.value == p
        assert abs(s.norm() - 1.0) < (1e-5 if p in "SC" else 1e-12)
        assert s.check_isometries()


def test_move_center_noop_and_round_trip():
    s = random_state(TTNTopology(8), 4, seed=4)
    same = move_center(s, s.center)
    for n in s.topology.nodes():
        assert np.array_equal(same.tensors[n].data, s.tensors[n].data)
    leaf = move_center(s, (0, 2))
    assert leaf.center == (0, 2) and leaf.check_isometries()
    back = move_center(leaf, s.topology.top)
    assert abs(overlap(back, s) - 1.0) < 1e-12
    assert abs(np.linalg.norm(densify_state(leaf)) - 1.0) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.lists(st.integers(0, 6), min_size=1, max_size=5), st.sampled_from("DZ"))
def test_gauge_invariance(seed, moves, p):
    topo = TTNTopology(8)
    nodes = topo.nodes()
    terms = random_terms(8, seed)
    s = random_state(topo, 4, p, seed=seed)
    e0 = expectation(s, terms)
    psi0 = densify_state(s)
    for m in moves:
        s = move_center(s, nodes[m])
        assert s.check_isometries()
        assert abs(expectation(s, terms) - e0) < 1e-10
    assert abs(abs(np.vdot(psi0, densify_state(s))) - 1.0) < 1e-12


def test_expectation_matches_statevector():
    terms = build_hamiltonian(IsingModelSpec(N=2, g=1.3)) + random_terms(8, 9)
    terms = [t for t in terms if max(t.sites) < 8]
    for p in "DZ":
        s = random_state(TTNTopology(8), 8, p, seed=5)
        assert abs(expectation(s, terms) - dense_energy(s, terms)) < 1e-10


def test_expectation_trivial_cases():
    s = random_state(TTNTopology(8), 4, seed=6)
    assert abs(expectation(s, [PauliString(2.5, ())]) - 2.5) < 1e-12
    zero = product_state(TTNTopology(4), [0, 0, 0, 0])
    assert abs(expectation(zero, [PauliString(-1.0, {i: "Z"}) for i in range(4)]) + 4.0) < 1e-14
    with pytest.raises(ValueError):
        expectation(zero, [PauliString(1.0, {4: "Z"})])


def test_densify_product_states():
    psi = densify_state(product_state(TTNTopology(2), [0, 0]))
    assert np.array_equal(psi, [1.0, 0.0, 0.0, 0.0])
    bits = [1, 0, 1, 1, 0, 0, 1, 0]
    topo = TTNTopology(8)
    s = product_state(topo, bits, chi=exact_regime_chi(8))
    idx = int("".join(map(str, bits)), 2)
    expected = np.zeros(256)
    expected[idx] = 1.0
    assert np.max(np.abs(densify_state(s) - expected)) <= 1e-12
    moved = move_center(s, (0, 3))
    assert np.max(np.abs(np.abs(densify_state(moved)) - expected)) <= 1e-12
    with pytest.raises(ShapeError):
        product_state(topo, [0, 1])


def test_densify_size_guard():
    s = random_state(TTNTopology(32), 2, seed=0)
    with pytest.raises(ShapeError):
        densify_state(s)


def test_truncate_product_state_to_rank_one():
    s = random_state(TTNTopology(4), 4, seed=7)
    # Replace the top by a rank-one matrix: left and right halves are unentangled.
    a = np.random.default_rng(0).standard_normal(4)
    top = np.einsum("i,j->ij", a, a)[:, :, None]
    s.tensors[(1, 0)] = type(s.tensors[(1, 0)])(top / np.linalg.norm(top))
    new, res = truncate_link(s, (0, 0), cutoff=1e-9)
    assert res.kept_rank == 1
    assert new.tensors[(0, 0)].shape[2] == 1
    assert abs(overlap(new, s) - 1.0) < 1e-12


def test_truncate_keeps_largest_values():
    s = random_state(TTNTopology(8), 16, seed=8)
    top = s.tensors[s.center].data
    full = np.linalg.svd(top.transpose(1, 2, 0).reshape(16, 16), compute_uv=False)
    new, res = truncate_link(s, (1, 0), max_rank=8, cutoff=1e-12)
    assert res.kept_rank == 8
    assert np.allclose(res.singular_values, full[:8], atol=1e-12)
    assert new.tensors[(1, 0)].shape[2] == 8
    assert new.check_isometries()


def test_truncation_error_is_frobenius_distance():
    s = random_state(TTNTopology(4), 4, seed=9)
    for rank in (1, 2, 3):
        new, res = truncate_link(s, (0, 1), max_rank=rank)
        dist = np.linalg.norm(densify_state(s) - densify_state(new))
        assert abs(dist - res.truncation_error) < 1e-12


def test_truncate_tiling_rounds_up():
    s = random_state(TTNTopology(16), 64, "Z", seed=10)
    spectrum = np.concatenate([np.linspace(1.0, 0.5, 13), np.full(51, 1e-12)])
    s.tensors[s.center] = type(s.tensors[s.center])(np.diag(spectrum)[:, :, None], "Z")
    _, plain = truncate_link(s, (2, 0))
    new, tiled = truncate_link(s, (2, 0), tiling=TilingPolicy(True))
    assert plain.kept_rank == 13 and tiled.kept_rank == 16
    assert np.allclose(tiled.singular_values[:13], plain.singular_values)
    assert new.check_isometries()
    with pytest.raises(TopologyError):
        truncate_link(s, (0, 0))


def test_astype_round_trip():
    s = random_state(TTNTopology(8), 8, seed=11)
    psi = densify_state(s)
    z = s.copy().astype("Z")
    assert z.precision.value == "Z"
    assert np.max(np.abs(densify_state(z) - psi)) < 1e-15
    single = s.copy().astype("S")
    assert np.max(np.abs(densify_state(single) - psi)) < 1e-5


def test_symmetric_state_is_even_and_gauge_invariant():
    topo = TTNTopology(8)
    s = random_state(topo, 8, seed=12, symmetric=True)
    psi = densify_state(s)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
    assert abs(parity_expectation(psi) - 1.0) < 1e-12
    assert s.check_isometries()
    terms = build_hamiltonian(IsingModelSpec(N=2, g=0.7))
    e0 = expectation(s, terms)
    assert abs(e0 - dense_energy(s, terms)) < 1e-10
    moved = move_center(s, (0, 1))
    assert moved.check_isometries()
    assert abs(expectation(moved, terms) - e0) < 1e-10
    assert abs(overlap(moved, s) - 1.0) < 1e-12
