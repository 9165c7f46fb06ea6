"""2D transverse-field Ising model as a sum of weighted Pauli strings."""

from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import lattice_index, leaf_order

__all__ = ["IsingModelSpec", "PauliString", "build_hamiltonian", "term_charges", "CRITICAL_FIELD"]

# Transverse field at the 2D quantum critical point for J = 1.
CRITICAL_FIELD = 3.04438

PAULI_CHARGE = {"X": 1, "Z": 0}


@dataclass(frozen=True)
class IsingModelSpec:
    N: int
    J: float = 1.0
    g: float = CRITICAL_FIELD
    boundary: str = "open"

    def __post_init__(self):
        if int(self.N) < 2:
            raise ValueError("linear size N must be >= 2")
        if self.boundary != "open":
            raise ValueError("only open boundaries are supported")

    @property
    def num_sites(self) -> int:
        return self.N * self.N

    @property
    def num_bonds(self) -> int:
        return 2 * self.N * (self.N - 1)


@dataclass(frozen=True)
class PauliString:
    """``weight * prod_i P_i`` with ``factors`` a sorted tuple of ``(site, 'X' | 'Z')``."""

    weight: float
    factors: tuple = field(default=())

    def __post_init__(self):
        items = dict(self.factors).items() if isinstance(self.factors, dict) else self.factors
        facs = tuple(sorted((int(s), str(p).upper()) for s, p in items))
        sites = [s for s, _ in facs]
        if len(set(sites)) != len(sites):
            raise ValueError("a Pauli string acts at most once per site")
        for s, p in facs:
            if p not in PAULI_CHARGE:
                raise ValueError(f"unsupported Pauli factor {p!r}; expected X or Z")
            if s < 0:
                raise ValueError("site indices must be non-negative")
        object.__setattr__(self, "factors", facs)
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.factors)

    def __len__(self):
        return len(self.factors)


def build_hamiltonian(spec: IsingModelSpec, mapping: str = "morton") -> list[PauliString]:
    """Bond terms ``-J X_i X_j`` followed by field terms ``-g Z_i``, on leaf indices."""
    n = spec.N
    leaf = leaf_order(n, mapping)
    terms = []
    for y in range(n):
        for x in range(n):
            here = int(leaf[lattice_index(x, y, n)])
            if x + 1 < n:
                terms.append(PauliString(-spec.J, ((here, "X"), (int(leaf[lattice_index(x + 1, y, n)]), "X"))))
            if y + 1 < n:
                terms.append(PauliString(-spec.J, ((here, "X"), (int(leaf[lattice_index(x, y + 1, n)]), "X"))))
    for i in range(n * n):
        terms.append(PauliString(-spec.g, ((int(leaf[i]), "Z"),)))
    return terms


def term_charges(term: PauliString) -> dict[int, int]:
    """Z2 charge shift per site: X flips parity (1), Z keeps it (0)."""
    return {s: PAULI_CHARGE[p] for s, p in term.factors}
