"""Variational ground-state search with precision schedules and ERGT skipping.

Compares the energy and wall time of several schedules on the 4 x 4
lattice against exact diagonalization.
"""

from qttn.exact import DenseProblem, ground_energy
from qttn.ising import IsingModelSpec, build_hamiltonian
from qttn.search import SweepConfig, find_ground_state

spec = IsingModelSpec(N=4)
exact = ground_energy(DenseProblem(16, build_hamiltonian(spec)))
print(f"exact ground energy {exact:.10f}")


def show(record):
    print(f"  sweep {record.sweep_index} [{record.precision}] E = {record.energy_after:.10f} "
          f"opt {record.local_opts_performed:>2} skip {record.local_opts_skipped:>2} "
          f"trunc {record.max_truncation_error:.1e} {record.wall_time_s * 1e3:6.1f} ms")


for pattern in ("DDDDDD", "SSSSDD", "ZZZZZZ"):
    print(pattern, "chi=32")
    state, records = find_ground_state(spec, SweepConfig(pattern, chi=32), callback=show)
    total = sum(r.wall_time_s for r in records)
    print(f"  final {state.energy:.10f}  rel err {abs(state.energy - exact) / abs(exact):.1e}  sweeps {total:.3f} s")

print("exact regime chi=256 with and without skipping exact tensors")
for skip in (False, True):
    state, records = find_ground_state(spec, SweepConfig("DDDD", chi=256, skip_ergt=skip))
    performed = sum(r.local_opts_performed for r in records)
    print(f"  skip_ergt={skip}: E = {state.energy:.12f}, {performed} local optimizations")
