"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code: Hamiltonians are
assembled from Kronecker products and diagonalized with LAPACK / ARPACK.
"""

import itertools

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}

# Ground energies of the open-boundary N x N model with J = 1, from
# kron_hamiltonian + eigvalsh (N = 2) and ARPACK eigsh at tol 1e-14 (N = 4).
E_N2_CRITICAL = -12.518878764219876
E_N2_G3 = -12.346784241457337
E_N4_CRITICAL = -50.85817810220089
E_N4_G3 = -50.18662388277779
# Ordered phase: the odd sector lies only 7.8e-5 above (eigsh k=2, tol 1e-14).
E_N4_G1 = -26.86050463952782
CRITICAL_G = 3.04438


def kron_operator(num_qubits, factors, sparse=False):
    """Tensor product with ``factors = {site: 'X' | 'Z'}``; site 0 is the leftmost factor."""
    if sparse:
        out = sp.identity(1, format="csr")
        for s in range(num_qubits):
            out = sp.kron(out, sp.csr_matrix(PAULI[factors.get(s, "I")]), format="csr")
        return out
    out = np.ones((1, 1))
    for s in range(num_qubits):
        out = np.kron(out, PAULI[factors.get(s, "I")])
    return out


def kron_hamiltonian(num_qubits, terms, sparse=False):
    """``sum_k w_k P_k`` from ``(weight, {site: pauli})`` pairs or objects with ``weight``/``factors``."""
    dim = 2 ** num_qubits
    h = sp.csr_matrix((dim, dim)) if sparse else np.zeros((dim, dim))
    for t in terms:
        weight, factors = (t.weight, dict(t.factors)) if hasattr(t, "weight") else t
        h = h + weight * kron_operator(num_qubits, factors, sparse)
    return h


def ising_terms_row_major(n, j=1.0, g=CRITICAL_G):
    """The model written directly on row-major site labels ``y * n + x``."""
    terms = []
    for y, x in itertools.product(range(n), range(n)):
        i = y * n + x
        if x + 1 < n:
            terms.append((-j, {i: "X", i + 1: "X"}))
        if y + 1 < n:
            terms.append((-j, {i: "X", i + n: "X"}))
    for i in range(n * n):
        terms.append((-g, {i: "Z"}))
    return terms


def dense_ground_energy(num_qubits, terms):
    h = kron_hamiltonian(num_qubits, terms, sparse=num_qubits > 10)
    if num_qubits > 10:
        return float(sla.eigsh(h, k=1, which="SA", tol=1e-14)[0][0])
    return float(np.linalg.eigvalsh(h)[0])


def loop_matmul(a, b):
    """Triple-loop matrix product."""
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m), dtype=np.result_type(a, b))
    for i in range(n):
        for j in range(m):
            acc = 0
            for q in range(k):
                acc += a[i, q] * b[q, j]
            out[i, j] = acc
    return out


def loop_contract3(a, b):
    """``sum_{jk} a[i, j, k] b[j, k, l]`` by explicit loops."""
    out = np.zeros((a.shape[0], b.shape[2]), dtype=np.result_type(a, b))
    for i, j, k, l in itertools.product(range(a.shape[0]), range(a.shape[1]), range(a.shape[2]), range(b.shape[2])):
        out[i, l] += a[i, j, k] * b[j, k, l]
    return out


def two_site_energy(j, g):
    """Lowest eigenvalue of ``-J XX - g (Z1 + Z2)``: the even block [[-2g, -J], [-J, 2g]]."""
    return -np.sqrt(4 * g * g + j * j)
