"""Tree tensor network ground states for the 2D transverse-field Ising model."""

from .backends import BackendId, available_backends, get_backend
from .errors import ChargeError, NumericError, PrecisionError, ShapeError, SolverError, TopologyError, TTNError
from .exact import DenseProblem, apply_hamiltonian, ground_energy, ground_state
from .ising import CRITICAL_FIELD, IsingModelSpec, PauliString, build_hamiltonian, term_charges
from .lanczos import LanczosResult, lanczos_ground
from .precision import Precision
from .search import (LanczosConfig, PrecisionSchedule, SearchError, SweepConfig, SweepRecord, TilingPolicy,
                     ergt_nodes, find_ground_state, is_ergt, local_optimize, sweep)
from .symmetric import BlockSparseTensor, Z2Link, bcontract, bqr, bsvd, densify, sparsify
from .tensor import SvdResult, Tensor, contract, convert, eigh, fuse, permute, qr, random_tensor, split, svd
from .ttn import (TTNState, TTNTopology, densify_state, expectation, move_center, product_state, random_state,
                  truncate_link)

__version__ = "0.1.0"
