"""Dense tensors: precisions, contraction, truncated SVD and tiling.

Run with ``python3 demos/01_tensors.py``.
"""

import numpy as np

from qttn import Precision
from qttn.search import TilingPolicy
from qttn.tensor import Tensor, contract, isometry_deviation, qr, random_tensor, svd

# Four scalar types, one letter each.
for p in Precision:
    print(f"{p.value}: {p.dtype}, {p.bytes_per_scalar} bytes per scalar")

a = random_tensor((4, 3, 5), "D", seed=1)
b = random_tensor((3, 5, 2), "D", seed=2)
c = contract(a, b, [1, 2], [0, 1])
print("contracted shape", c.shape)

# A matrix with 13 dominant singular values and a tail of tiny ones.
rng = np.random.default_rng(0)
q1, _ = np.linalg.qr(rng.standard_normal((40, 40)))
q2, _ = np.linalg.qr(rng.standard_normal((40, 40)))
spectrum = np.concatenate([np.linspace(1.0, 0.5, 13), np.full(27, 1e-12)])
m = Tensor(q1 @ np.diag(spectrum) @ q2.T, "Z")

plain = svd(m, [0], [1], max_rank=64, cutoff=1e-9)
tile = TilingPolicy(enabled=True).tile_entries("Z")
tiled = svd(m, [0], [1], max_rank=64, cutoff=1e-9, tile=tile)
print(f"kept rank without tiling {plain.kept_rank}, with {tile}-entry tiles {tiled.kept_rank}")
print(f"truncation errors {plain.truncation_error:.2e} vs {tiled.truncation_error:.2e}")

q, r = qr(random_tensor((6, 4), "D", seed=3), [0], [1])
print(f"QR isometry deviation {isometry_deviation(q, 1):.1e}")
