"""Parity-symmetric (Z2 block-sparse) tensors and a symmetric ground-state search."""

import numpy as np

from qttn.exact import parity_expectation
from qttn.ising import IsingModelSpec
from qttn.search import SweepConfig, find_ground_state
from qttn.symmetric import IN, OUT, Z2Link, bsvd, random_block_tensor
from qttn.ttn import densify_state

links = [Z2Link((8, 8), IN), Z2Link((8, 8), IN), Z2Link((16, 16), OUT)]
t = random_block_tensor(links, "D", seed=0)
print(f"{len(t.block_arrays())} blocks, {t.nbytes} bytes vs {t.densify().nbytes} dense")
for key, blk in sorted(t.block_arrays().items()):
    print(f"  charges {key}: {blk.shape}")

res = bsvd(t, [0, 1], [2], max_rank=20)
kept = {q: len(s) for q, s in sorted(res.singular_values.items())}
print(f"kept per charge sector {kept}, total {res.kept_rank}, error {res.truncation_error:.3f}")

spec = IsingModelSpec(N=4)
sym, _ = find_ground_state(spec, SweepConfig("DDDDDD", chi=32, symmetric=True))
dense, _ = find_ground_state(spec, SweepConfig("DDDDDD", chi=32))
print(f"symmetric {sym.energy:.12f}  dense {dense.energy:.12f}")
psi = densify_state(sym)
print(f"parity of the symmetric ground state {parity_expectation(psi):+.12f}")
print(f"state memory: symmetric {sym.nbytes()} bytes, dense {dense.nbytes()} bytes")
assert np.isclose(sym.energy, dense.energy, rtol=1e-6)
