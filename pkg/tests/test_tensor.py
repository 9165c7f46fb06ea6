import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import PAULI, loop_contract3, loop_matmul, two_site_energy
from qttn.backends import BackendId, available_backends
from qttn.errors import NumericError, PrecisionError, ShapeError
from qttn.precision import Precision
from qttn.search import TilingPolicy
from qttn.tensor import (Tensor, contract, convert, eigh, fuse, isometry_deviation, permute, qr, random_tensor,
                         select_rank, split, svd, tiled_rank)

ALL = list(Precision)


def T(arr, p="D", backend="optimized"):
    return Tensor(np.asarray(arr), p, backend)


# ------------------------------------------------------------------ precision
def test_precision_sizes_and_order():
    assert [p.bytes_per_scalar for p in (Precision.S, Precision.C, Precision.D, Precision.Z)] == [4, 8, 8, 16]
    assert Precision.S.can_upcast_to(Precision.D) and Precision.D.can_upcast_to(Precision.Z)
    assert Precision.S.can_upcast_to(Precision.C) and Precision.C.can_upcast_to(Precision.Z)
    assert not Precision.D.can_upcast_to(Precision.S)
    assert not Precision.C.can_upcast_to(Precision.D)
    assert not Precision.D.can_upcast_to(Precision.C)
    assert Precision.parse("z") is Precision.Z
    with pytest.raises(ValueError):
        Precision.parse("Q")


def test_tensor_basics():
    a = random_tensor((2, 3, 4), "D", seed=1)
    assert a.size == 24 and a.shape == (2, 3, 4)
    assert np.isclose(a.norm(), np.sqrt(np.sum(a.data ** 2)))
    assert Tensor(np.arange(3)).precision is Precision.D
    with pytest.raises(NumericError):
        Tensor([1.0, np.nan])
    with pytest.raises(PrecisionError):
        random_tensor((2,), "D") + random_tensor((2,), "S")


# ---------------------------------------------------------------- contract
def test_contract_identity_and_pauli():
    v = T([0.3, -1.2])
    assert np.array_equal(contract(T(np.eye(2)), v, [1], [0]).data, v.data)
    sx = T(PAULI["X"])
    assert np.array_equal(contract(sx, sx, [1], [0]).data, np.eye(2))


def test_contract_matches_loop_oracle():
    rng = np.random.default_rng(11)
    a = rng.integers(-5, 6, size=(2, 3)).astype(float)
    b = rng.integers(-5, 6, size=(3, 4)).astype(float)
    assert np.array_equal(contract(T(a), T(b), [1], [0]).data, loop_matmul(a, b))


def test_contract_errors():
    with pytest.raises(ShapeError):
        contract(random_tensor((2, 3)), random_tensor((2, 3)), [1], [0])
    with pytest.raises(PrecisionError):
        contract(random_tensor((2, 3), "D"), random_tensor((3, 2), "Z"), [1], [0])


def test_contract_free_axis_order():
    a = random_tensor((2, 3, 4), seed=2)
    b = random_tensor((4, 5, 3), seed=3)
    c = contract(a, b, [1, 2], [2, 0])
    assert c.shape == (2, 5)
    assert np.allclose(c.data, np.einsum("ijk,klj->il", a.data, b.data), atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_contraction_associativity(d0, d1, d2, d3, seed):
    a = random_tensor((d0, d1, 2), seed=seed)
    b = random_tensor((2, d2, 3), seed=seed + 1)
    c = random_tensor((3, d3, 2), seed=seed + 2)
    left = contract(contract(a, b, [2], [0]), c, [3], [0])
    right = contract(a, contract(b, c, [2], [0]), [2], [0])
    assert np.max(np.abs(left.data - right.data)) < 1e-12


# ------------------------------------------------------------- reshaping
def test_permute_involution_and_errors():
    a = random_tensor((2, 3), seed=4)
    assert np.array_equal(permute(permute(a, [1, 0]), [1, 0]).data, a.data)
    with pytest.raises(ShapeError):
        permute(a, [0, 0])


def test_fuse_split():
    a = random_tensor((2, 2, 4), seed=5)
    assert fuse(a, [[0, 1], [2]]).shape == (4, 4)
    b = random_tensor((2, 3, 4), seed=6)
    assert np.array_equal(split(fuse(b, [[0, 1], [2]]), 0, (2, 3)).data, b.data)
    with pytest.raises(ShapeError):
        split(b, 2, (3, 2))
    with pytest.raises(ShapeError):
        fuse(b, [[0, 2], [1]])


def test_fuse_matmul_split_matches_brute_force():
    a = random_tensor((2, 2, 2), seed=7)
    b = random_tensor((2, 2, 2), seed=8)
    via_matrix = fuse(a, [[0], [1, 2]]).data @ fuse(b, [[0, 1], [2]]).data
    assert np.allclose(via_matrix, loop_contract3(a.data, b.data), atol=1e-14)


# ------------------------------------------------------------------- svd
def test_svd_rank_one():
    u = np.array([0.6, 0.8])
    v = np.array([0.0, 1.0, 0.0])
    res = svd(T(np.outer(u, v)), [0], [1])
    assert res.kept_rank == 1
    assert np.isclose(res.singular_values[0], 1.0)


def test_svd_diagonal_truncation():
    res = svd(T(np.diag([3.0, 2.0, 1.0])), [0], [1], max_rank=2)
    assert np.allclose(res.singular_values, [3.0, 2.0])
    assert np.isclose(res.truncation_error, 1.0)


@pytest.mark.parametrize("p", ALL)
@pytest.mark.parametrize("algorithm", ["direct", "via_eigh"])
def test_svd_properties(p, algorithm):
    a = random_tensor((3, 4, 5), p, seed=9)
    res = svd(a, [0, 2], [1], max_rank=3, algorithm=algorithm)
    s = res.singular_values
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
    tol = p.isometry_tol
    assert isometry_deviation(res.U, 2) < tol
    assert isometry_deviation(res.V, 0) < tol
    mat = a.data.transpose(0, 2, 1).reshape(15, 4)
    recon = res.U.data.reshape(15, -1) @ np.diag(s) @ res.V.data
    full = np.linalg.svd(mat.astype(np.complex128), compute_uv=False)
    assert abs(np.linalg.norm(mat - recon) - res.truncation_error) < (1e-10 if p.is_double else 1e-4)
    assert abs(res.truncation_error - np.sqrt(np.sum(full[3:] ** 2))) < (1e-10 if p.is_double else 1e-4)


def test_svd_algorithms_agree():
    a = random_tensor((8, 8), "D", seed=10)
    s1 = svd(a, [0], [1], cutoff=0).singular_values
    s2 = svd(a, [0], [1], cutoff=0, algorithm="via_eigh").singular_values
    assert np.allclose(s1, s2, rtol=1e-9, atol=0)


def test_svd_cutoff_is_relative():
    res = svd(T(np.diag([10.0, 1e-3, 1e-9])), [0], [1], cutoff=1e-9)
    assert res.kept_rank == 2
    assert select_rank(np.array([5.0, 6e-9, 4e-9]), None, 1e-9) == 2


def test_svd_zero_and_nonfinite():
    res = svd(T(np.zeros((3, 2))), [0], [1])
    assert res.kept_rank == 1 and res.singular_values[0] == 0.0
    assert isometry_deviation(res.U, 1) == 0.0
    with pytest.raises(NumericError):
        svd(T([[1.0, np.inf], [0.0, 1.0]]), [0], [1])
    with pytest.raises(ValueError):
        svd(T(np.eye(2)), [0], [1], max_rank=0)


def test_eckart_young():
    rng = np.random.default_rng(12)
    for k in (1, 2, 3):
        m = rng.standard_normal((6, 6))
        res = svd(T(m), [0], [1], max_rank=k, cutoff=0)
        err = np.linalg.norm(m - res.us().data @ res.V.data)
        for _ in range(100):
            q, _ = np.linalg.qr(rng.standard_normal((6, k)))
            assert err <= np.linalg.norm(m - q @ (q.T @ m)) + 1e-12


def test_tiled_rank():
    assert tiled_rank(13, 40, 64, 16) == 16
    assert tiled_rank(13, 14, 64, 16) == 14
    assert tiled_rank(13, 40, 15, 16) == 15
    assert tiled_rank(16, 40, 64, 16) == 16
    assert tiled_rank(13, 40, 64, None) == 13


def test_tiling_only_adds_values():
    rng = np.random.default_rng(13)
    q1, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    q2, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    spectrum = np.concatenate([np.linspace(1.0, 0.5, 13), np.full(27, 1e-12)])
    a = T(q1 @ np.diag(spectrum) @ q2.T, "Z")
    plain = svd(a, [0], [1], max_rank=64, cutoff=1e-9)
    tiled = svd(a, [0], [1], max_rank=64, cutoff=1e-9, tile=TilingPolicy(True).tile_entries("Z"))
    assert plain.kept_rank == 13
    assert tiled.kept_rank == 16
    assert np.allclose(tiled.singular_values[:13], plain.singular_values, atol=1e-12)


# -------------------------------------------------------------------- qr
def test_qr_cases():
    q, r = qr(T(np.eye(4)), [0], [1])
    assert np.allclose(q.data @ r.data, np.eye(4))
    m = random_tensor((6, 3), "D", seed=14)
    q, r = qr(m, [0], [1])
    assert isometry_deviation(q, 1) < 1e-12
    z = random_tensor((5, 7), "Z", seed=15)
    q, r = qr(z, [0], [1])
    assert np.linalg.norm(q.data @ r.data - z.data) < 1e-12
    assert np.all(np.diagonal(r.data).real >= 0)
    with pytest.raises(NumericError):
        qr(T([[np.nan, 0.0]]), [0], [1])


# ------------------------------------------------------------------ eigh
def test_eigh_pauli_and_two_site_block():
    w, _ = eigh(T(PAULI["Z"]))
    assert np.allclose(w, [-1, 1])
    w, _ = eigh(T(PAULI["X"]))
    assert np.allclose(w, [-1, 1])
    j, g = 1.0, 1.0
    w, _ = eigh(T([[-2 * g, -j], [-j, 2 * g]]))
    assert np.isclose(w[0], two_site_energy(j, g), atol=1e-14)
    assert np.isclose(w[0], -np.sqrt(5))


def test_eigh_reconstruction_and_errors():
    a = random_tensor((2, 3, 2, 3), "Z", seed=16)
    h = contract(a, a.conj(), [2, 3], [2, 3])
    w, v = eigh(h)
    assert np.all(np.diff(w) >= 0)
    vm = v.data.reshape(6, 6)
    assert np.allclose(vm @ np.diag(w) @ vm.conj().T, h.data.reshape(6, 6), atol=1e-12)
    with pytest.raises(ValueError):
        eigh(T([[0.0, 1.0], [0.0, 0.0]]))


# --------------------------------------------------------------- convert
def test_convert_round_trips():
    a = random_tensor((3, 4), "S", seed=17)
    assert np.array_equal(convert(convert(a, "Z"), "S").data, a.data)
    c = convert(random_tensor((3,), "D", seed=18), "C")
    assert np.all(c.data.imag == 0)
    d = random_tensor((50, 50), "D", seed=19)
    assert abs(convert(d, "S").norm() - d.norm()) / d.norm() < 1e-6
    with pytest.raises(PrecisionError):
        convert(random_tensor((3,), "Z", seed=20), "D")


# ---------------------------------------------------------------- random
def test_random_tensor_determinism_and_mean():
    assert np.array_equal(random_tensor((4, 4), "C", seed=3).data, random_tensor((4, 4), "C", seed=3).data)
    assert not np.array_equal(random_tensor((4, 4), seed=3).data, random_tensor((4, 4), seed=4).data)
    big = random_tensor((100_000,), "D", seed=5).data
    assert abs(big.mean()) < 0.02
    assert big.min() >= -1 and big.max() <= 1


# --------------------------------------------------------------- backends
def test_backend_registry():
    assert available_backends() == ["optimized", "reference"]
    with pytest.raises(ValueError):
        BackendId("cuda")
    with pytest.raises(ValueError):
        BackendId("optimized", 0)


@pytest.mark.parametrize("p", ALL)
def test_backend_equivalence(p):
    tol = p.equivalence_tol
    a_ref = random_tensor((4, 5, 6), p, seed=21, backend="reference")
    b_ref = random_tensor((6, 5, 3), p, seed=22, backend="reference")
    a_opt, b_opt = a_ref.with_backend("optimized"), b_ref.with_backend("optimized")
    c_ref = contract(a_ref, b_ref, [1, 2], [1, 0])
    c_opt = contract(a_opt, b_opt, [1, 2], [1, 0])
    assert np.max(np.abs(c_ref.data - c_opt.data)) < tol
    op = random_tensor((5, 5), p, seed=23)
    assert np.max(np.abs(a_ref.apply(op.with_backend("reference"), 1).data - a_opt.apply(op, 1).data)) < tol
    s_ref = svd(a_ref, [0, 1], [2])
    s_opt = svd(a_opt, [0, 1], [2])
    assert np.max(np.abs(s_ref.singular_values - s_opt.singular_values)) < tol
    assert np.max(np.abs(s_ref.U.data - s_opt.U.data)) < tol
    assert np.max(np.abs(s_ref.V.data - s_opt.V.data)) < tol
    q_ref, r_ref = qr(a_ref, [0, 1], [2])
    q_opt, r_opt = qr(a_opt, [0, 1], [2])
    assert np.max(np.abs(q_ref.data - q_opt.data)) < tol
    assert np.max(np.abs(r_ref.data - r_opt.data)) < tol
    w_ref, v_ref = contract(a_ref, a_ref.conj(), [0, 1], [0, 1]).eigh()
    w_opt, v_opt = contract(a_opt, a_opt.conj(), [0, 1], [0, 1]).eigh()
    assert np.max(np.abs(w_ref - w_opt)) < tol
    assert np.max(np.abs(v_ref.data - v_opt.data)) < tol
