"""The 2D transverse-field Ising model and its exact ground energies.

Sites of the N x N lattice are placed on tree leaves along a Z-order
curve, so each subtree covers a square block.
"""

from qttn.exact import DenseProblem, ground_state, parity_expectation
from qttn.ising import CRITICAL_FIELD, IsingModelSpec, build_hamiltonian, term_charges
from qttn.lattice import leaf_order

n = 4
print("leaf index of each lattice site (row y, column x):")
print(leaf_order(n).reshape(n, n))

spec = IsingModelSpec(N=n, g=CRITICAL_FIELD)
terms = build_hamiltonian(spec)
bonds = sum(len(t) == 2 for t in terms)
print(f"{bonds} bond terms, {len(terms) - bonds} field terms")
assert all(sum(term_charges(t).values()) % 2 == 0 for t in terms)

for size in (2, 4):
    for g in (1.0, CRITICAL_FIELD, 5.0):
        problem = DenseProblem(size * size, build_hamiltonian(IsingModelSpec(N=size, g=g)))
        energy, psi = ground_state(problem)
        # Deep in the ordered phase (small g) the even and odd sectors are nearly
        # degenerate, so the returned vector need not have a definite parity.
        parity = parity_expectation(psi)
        print(f"N={size} g={g:<8} E0 = {energy:.10f}  E0/site = {energy / size**2:.6f}  parity {parity:+.3f}")
