"""Tree tensor network states: isometry center, gauge freedom and truncation."""

import numpy as np

from qttn.ising import IsingModelSpec, build_hamiltonian
from qttn.ttn import TTNTopology, densify_state, expectation, move_center, random_state, truncate_link

topo = TTNTopology(16)
state = random_state(topo, chi=8, precision="D", seed=4)
print("parent link dims per layer:")
for layer in range(topo.num_layers):
    dims = [state.link_dims()[(layer, p)] for p in range(topo.layer_size(layer))]
    print(f"  layer {layer}: {dims}")
print("center", state.center, "norm", state.norm())

terms = build_hamiltonian(IsingModelSpec(N=4, g=3.0))
e0 = expectation(state, terms)

# Moving the center changes the gauge only.
psi = densify_state(state)
for target in [(0, 3), (1, 2), (0, 7), topo.top]:
    state = move_center(state, target)
    overlap = abs(np.vdot(psi, densify_state(state)))
    print(f"center at {target}: energy {expectation(state, terms):.12f}  overlap {overlap:.12f}")
assert abs(expectation(state, terms) - e0) < 1e-10

# Truncating the link below the top: the discarded weight is the distance moved.
for rank in (8, 4, 2, 1):
    cut, res = truncate_link(state, (2, 0), max_rank=rank)
    dist = np.linalg.norm(psi - densify_state(cut)) if rank < 8 else 0.0
    print(f"rank {rank}: truncation error {res.truncation_error:.4f}, |psi - psi'| = {dist:.4f}")
