import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import PAULI
from qttn.errors import ChargeError, PrecisionError
from qttn.precision import Precision
from qttn.symmetric import (IN, OUT, BlockSparseTensor, Z2Link, bcontract, beigh, bqr, bsvd, densify,
                            random_block_tensor, sparsify)
from qttn.tensor import Tensor, contract, isometry_deviation, svd


def sector_dims():
    return st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda d: d[0] + d[1] > 0)


def conserved(t):
    t.check_conservation()
    return True


def test_link_and_conservation():
    link = Z2Link((2, 3), IN)
    assert link.total == 5 and link.flip().direction == OUT
    with pytest.raises(ValueError):
        Z2Link((1, 1), "sideways")
    links = [Z2Link((1, 1), IN), Z2Link((1, 1), OUT)]
    with pytest.raises(ChargeError):
        BlockSparseTensor(links, {(0, 1): np.ones((1, 1))})
    t = BlockSparseTensor(links, {(1, 1): np.ones((1, 1))})
    assert t.allowed_keys() == [(0, 0), (1, 1)]


def test_identity_and_sigma_x():
    links = [Z2Link((2, 1), IN), Z2Link((2, 1), OUT)]
    eye = sparsify(Tensor(np.eye(3)), links)
    a = random_block_tensor([Z2Link((2, 1), IN), Z2Link((1, 2), OUT)], seed=1)
    assert np.array_equal(bcontract(eye, a, [1], [0]).densify().data, a.densify().data)

    phys = [Z2Link((1, 1), IN), Z2Link((1, 1), OUT)]
    sx = sparsify(Tensor(PAULI["X"]), phys, charge=1)
    assert sorted(sx.block_arrays()) == [(0, 1), (1, 0)]
    sq = bcontract(sx, sx, [1], [0])
    assert sq.charge == 0
    assert sorted(sq.block_arrays()) == [(0, 0), (1, 1)]
    assert np.array_equal(sq.densify().data, np.eye(2))
    with pytest.raises(ChargeError):
        sparsify(Tensor(PAULI["X"]), phys, charge=0)


def test_densify_edge_cases():
    links = [Z2Link((2, 1), IN), Z2Link((2, 1), OUT)]
    assert not np.any(BlockSparseTensor(links).densify().data)
    t = BlockSparseTensor(links, {(0, 0): np.ones((2, 2))})
    d = t.densify().data
    assert np.all(d[:2, :2] == 1) and not np.any(d[2:, :]) and not np.any(d[:, 2:])


@settings(max_examples=30, deadline=None)
@given(sector_dims(), sector_dims(), sector_dims(), st.integers(0, 1), st.integers(0, 2**31), st.sampled_from("SDCZ"))
def test_sparsify_round_trip(d0, d1, d2, charge, seed, p):
    links = [Z2Link(d0, IN), Z2Link(d1, OUT), Z2Link(d2, IN)]
    a = random_block_tensor(links, p, seed, charge)
    b = sparsify(a.densify(), links, charge)
    assert conserved(b)
    for key in a.allowed_keys():
        assert np.array_equal(a.block_arrays()[key], b.block_arrays()[key])


@settings(max_examples=40, deadline=None)
@given(sector_dims(), sector_dims(), sector_dims(), sector_dims(), st.integers(0, 1), st.integers(0, 1),
       st.integers(0, 2**31))
def test_bcontract_commutes_with_densify(d0, d1, d2, d3, ca, cb, seed):
    a = random_block_tensor([Z2Link(d0, IN), Z2Link(d1, OUT), Z2Link(d2, IN)], "D", seed, ca)
    b = random_block_tensor([Z2Link(d2, OUT), Z2Link(d3, OUT), Z2Link(d1, IN)], "D", seed + 1, cb)
    c = bcontract(a, b, [1, 2], [2, 0])
    assert conserved(c)
    ref = contract(a.densify(), b.densify(), [1, 2], [2, 0])
    assert np.max(np.abs(c.densify().data - ref.data)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(sector_dims(), sector_dims(), sector_dims(), st.integers(0, 2**31), st.sampled_from("DZ"))
def test_unary_ops_commute_with_densify(d0, d1, d2, seed, p):
    links = [Z2Link(d0, IN), Z2Link(d1, IN), Z2Link(d2, OUT)]
    a = random_block_tensor(links, p, seed)
    b = random_block_tensor(links, p, seed + 1)
    dense = a.densify().data
    assert np.allclose(a.transpose([2, 0, 1]).densify().data, dense.transpose(2, 0, 1))
    assert np.allclose((a + b * 0.5).densify().data, dense + 0.5 * b.densify().data)
    assert np.allclose(a.conj().densify().data, dense.conj())
    assert np.isclose(a.vdot(b), np.vdot(dense, b.densify().data))
    assert np.isclose(a.norm(), np.linalg.norm(dense))
    op = random_block_tensor([Z2Link(d1, IN), Z2Link(d1, OUT)], p, seed + 2, charge=1)
    applied = a.apply(op, 1)
    op_dense = op.densify().data
    assert conserved(applied) and applied.charge == 1
    assert np.allclose(applied.densify().data, np.einsum("ij,ajb->aib", op_dense, dense))
    v = a.to_vector()
    assert v.size == a.vector_size
    assert np.array_equal(a.from_vector(v).densify().data, dense)


@settings(max_examples=30, deadline=None)
@given(sector_dims(), sector_dims(), sector_dims(), st.integers(0, 1), st.integers(0, 2**31), st.sampled_from("DZ"))
def test_bqr_and_bsvd_commute_with_densify(d0, d1, d2, charge, seed, p):
    links = [Z2Link(d0, IN), Z2Link(d1, IN), Z2Link(d2, OUT)]
    a = random_block_tensor(links, p, seed, charge)
    assume(a.allowed_keys())
    dense = a.densify().data
    q, r = bqr(a, [0, 1], [2])
    assert conserved(q) and conserved(r)
    assert isometry_deviation(q.densify(), 2) < 1e-12
    assert np.max(np.abs(bcontract(q, r, [2], [0]).densify().data - dense)) < 1e-12

    res = bsvd(a, [0, 1], [2], cutoff=0)
    assert conserved(res.U) and conserved(res.V)
    assert isometry_deviation(res.U.densify(), 2) < 1e-12
    merged = res.merged_values()
    dense_s = np.linalg.svd(dense.reshape(-1, dense.shape[2]), compute_uv=False)
    k = len(merged)
    assert np.allclose(merged, dense_s[:k], atol=1e-12)
    assert np.max(np.abs(bcontract(res.U, res.sv(), [2], [0]).densify().data - dense)) < 1e-11


def test_bsvd_keeps_global_largest():
    links = [Z2Link((1, 1), IN), Z2Link((1, 1), OUT)]
    a = BlockSparseTensor(links, {(0, 0): [[3.0]], (1, 1): [[2.0]]})
    res = bsvd(a, [0], [1], max_rank=1)
    assert res.kept_rank == 1
    assert list(res.singular_values[0]) == [3.0] and len(res.singular_values[1]) == 0
    assert res.merged == [(3.0, 0)]
    assert np.isclose(res.truncation_error, 2.0)
    tie = BlockSparseTensor(links, {(0, 0): [[2.0]], (1, 1): [[2.0]]})
    assert bsvd(tie, [0], [1], max_rank=1).merged == [(2.0, 0)]


def test_bsvd_truncation_matches_dense():
    rng = np.random.default_rng(3)
    links = [Z2Link((4, 3), IN), Z2Link((5, 2), OUT)]
    a = BlockSparseTensor(links, {(0, 0): rng.standard_normal((4, 5)), (1, 1): rng.standard_normal((3, 2))})
    dense = a.densify()
    for k in (1, 2, 3, 5):
        res = bsvd(a, [0], [1], max_rank=k, cutoff=0)
        ref = svd(dense, [0], [1], max_rank=k, cutoff=0)
        recon = bcontract(res.U, res.sv(), [1], [0]).densify().data
        err = np.linalg.norm(recon - dense.data)
        assert abs(err - ref.truncation_error) < 1e-10
        assert abs(res.truncation_error - ref.truncation_error) < 1e-10


def test_beigh_merges_blocks():
    rng = np.random.default_rng(4)
    m0 = rng.standard_normal((3, 3))
    m1 = rng.standard_normal((2, 2))
    h0, h1 = m0 + m0.T, m1 + m1.T
    links = [Z2Link((3, 2), OUT), Z2Link((3, 2), IN)]
    a = BlockSparseTensor(links, {(0, 0): h0, (1, 1): h1})
    w, charges, vecs = beigh(a)
    expected = sorted([(x, 0) for x in np.linalg.eigvalsh(h0)] + [(x, 1) for x in np.linalg.eigvalsh(h1)])
    assert np.allclose(w, [x for x, _ in expected])
    assert list(charges) == [q for _, q in expected]
    assert np.all(np.diff(w) >= 0)
    assert conserved(vecs)


def test_errors():
    a = random_block_tensor([Z2Link((1, 2), IN), Z2Link((2, 1), OUT)], seed=5)
    b = random_block_tensor([Z2Link((1, 2), IN), Z2Link((2, 2), OUT)], seed=6)
    with pytest.raises(ChargeError):
        bcontract(a, b, [1], [1])
    with pytest.raises(ChargeError):
        bcontract(a, a, [0], [0])
    with pytest.raises(PrecisionError):
        bcontract(a, a.conj().astype("Z"), [1], [1])
    with pytest.raises(ChargeError):
        sparsify(np.ones((3, 3)), [Z2Link((1, 2), IN), Z2Link((2, 1), OUT)])


def test_block_dimensions_smaller_than_dense():
    links = [Z2Link((8, 8), IN), Z2Link((8, 8), IN), Z2Link((16, 16), OUT)]
    a = random_block_tensor(links, seed=7)
    assert len(a.block_arrays()) == 4
    for blk in a.block_arrays().values():
        assert all(bd <= dd for bd, dd in zip(blk.shape, a.shape))
    assert a.nbytes == a.densify().nbytes // 2
