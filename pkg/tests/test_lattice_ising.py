import itertools

import numpy as np
import pytest

from oracles import E_N2_G3, PAULI, dense_ground_energy, ising_terms_row_major, kron_hamiltonian, kron_operator
from qttn.ising import IsingModelSpec, PauliString, build_hamiltonian, term_charges
from qttn.lattice import MAPPINGS, leaf_order, morton_code


def test_morton_code():
    assert [morton_code(x, 0) for x in range(4)] == [0, 1, 4, 5]
    assert [morton_code(0, y) for y in range(4)] == [0, 2, 8, 10]
    assert morton_code(3, 3) == 15


@pytest.mark.parametrize("mapping", sorted(MAPPINGS))
@pytest.mark.parametrize("n", [2, 4, 8])
def test_leaf_order_is_permutation(mapping, n):
    leaf = leaf_order(n, mapping)
    assert sorted(leaf.tolist()) == list(range(n * n))


@pytest.mark.parametrize("n", [4, 8, 16])
def test_morton_subtrees_are_square_blocks(n):
    leaf = leaf_order(n)
    for size in (4, 16):
        if size > n * n:
            continue
        side = int(np.sqrt(size))
        for start in range(0, n * n, size):
            cells = [(i % n, i // n) for i in range(n * n) if start <= leaf[i] < start + size]
            xs = {x for x, _ in cells}
            ys = {y for _, y in cells}
            assert len(xs) == side and len(ys) == side


def test_unknown_mapping():
    with pytest.raises(ValueError):
        leaf_order(4, "hilbert")


def test_spec_validation():
    with pytest.raises(ValueError):
        IsingModelSpec(N=1)
    with pytest.raises(ValueError):
        IsingModelSpec(N=2, boundary="periodic")
    assert IsingModelSpec(N=4).num_bonds == 24


def test_pauli_string_validation():
    p = PauliString(-1, {3: "x", 1: "X"})
    assert p.factors == ((1, "X"), (3, "X")) and p.sites == (1, 3) and len(p) == 2
    with pytest.raises(ValueError):
        PauliString(1.0, ((0, "X"), (0, "Z")))
    with pytest.raises(ValueError):
        PauliString(1.0, ((0, "Y"),))


@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_term_counts(n):
    spec = IsingModelSpec(N=n, J=1.0, g=2.0)
    terms = build_hamiltonian(spec)
    bonds = [t for t in terms if len(t) == 2]
    fields = [t for t in terms if len(t) == 1]
    assert len(bonds) == 2 * n * (n - 1) and len(fields) == n * n
    assert all(t.weight == -1.0 for t in bonds) and all(t.weight == -2.0 for t in fields)
    assert all(s < n * n for t in terms for s in t.sites)
    assert len({t.sites for t in bonds}) == len(bonds)


def test_term_charges():
    assert term_charges(PauliString(-1, {0: "X", 1: "X"})) == {0: 1, 1: 1}
    assert term_charges(PauliString(-1, {2: "Z"})) == {2: 0}
    for t in build_hamiltonian(IsingModelSpec(N=4)):
        assert sum(term_charges(t).values()) % 2 == 0


@pytest.mark.parametrize("mapping", sorted(MAPPINGS))
def test_mapping_is_a_relabelling(mapping):
    # The spectrum cannot depend on which leaf hosts which lattice site.
    spec = IsingModelSpec(N=2, g=3.0)
    h = kron_hamiltonian(4, build_hamiltonian(spec, mapping))
    ref = kron_hamiltonian(4, ising_terms_row_major(2, 1.0, 3.0))
    assert np.allclose(np.linalg.eigvalsh(h), np.linalg.eigvalsh(ref), atol=1e-12)


def test_hermitian_and_parity_symmetric():
    h = kron_hamiltonian(4, build_hamiltonian(IsingModelSpec(N=2, g=1.7)))
    parity = kron_operator(4, {i: "Z" for i in range(4)})
    assert np.max(np.abs(h - h.conj().T)) < 1e-14
    assert np.max(np.abs(h @ parity - parity @ h)) < 1e-14


def test_classical_limit():
    terms = build_hamiltonian(IsingModelSpec(N=4, g=0.0))
    assert np.isclose(dense_ground_energy(16, terms), -24.0, atol=1e-9)


def test_ground_state_parity_even():
    h = kron_hamiltonian(4, build_hamiltonian(IsingModelSpec(N=2, g=3.0)))
    w, v = np.linalg.eigh(h)
    parity = kron_operator(4, {i: "Z" for i in range(4)})
    gs = v[:, 0]
    assert abs(gs @ parity @ gs - 1.0) < 1e-10
    assert np.isclose(w[0], E_N2_G3, atol=1e-12)
