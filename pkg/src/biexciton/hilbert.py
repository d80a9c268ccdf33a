"""Operators on truncated tensor-product Hilbert spaces.

The composite space is an ordered product of factors: a 4-level exciton
manifold with basis (G, H, V, B), truncated boson modes, and two-level
sensor qubits.  Everything is a dense complex matrix; composite dimensions
stay small enough (a few thousand at most) that sparsity buys nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

# Basis order of the 4-level manifold: ground, H exciton, V exciton, biexciton.
G, H, V, B = 0, 1, 2, 3

#: Largest composite dimension accepted by default; dense solvers scale as dim^6.
DEFAULT_DIM_CAP = 4096

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class HilbertFactor:
    """One tensor factor: 'biexciton4' (dim 4), 'boson' (dim n_max+1) or 'qubit'."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("biexciton4", "boson", "qubit"):
            raise ValueError(f"unknown factor kind {self.kind!r}")
        expected = {"biexciton4": 4, "qubit": 2}.get(self.kind)
        if expected is not None and self.dim != expected:
            raise ValueError(f"{self.kind} factor must have dim {expected}, got {self.dim}")
        if self.dim < 2:
            raise ValueError("factor dimension must be >= 2")


def biexciton_factor() -> HilbertFactor:
    return HilbertFactor("biexciton4", 4)


def boson_factor(n_max: int) -> HilbertFactor:
    """Boson mode truncated at occupation n_max (dimension n_max + 1)."""
    if n_max < 1:
        raise ValueError("boson truncation n_max must be >= 1")
    return HilbertFactor("boson", n_max + 1)


def qubit_factor() -> HilbertFactor:
    return HilbertFactor("qubit", 2)


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor product of factors."""

    factors: tuple[HilbertFactor, ...]
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.dim > self.dim_cap:
            raise ValueError(
                f"composite dimension {self.dim} exceeds cap {self.dim_cap}; "
                "lower the boson truncation or raise dim_cap explicitly"
            )

    @property
    def dim(self) -> int:
        return int(np.prod([f.dim for f in self.factors], initial=1))

    def extended(self, *extra: HilbertFactor) -> "CompositeSpace":
        """New space with additional factors appended."""
        return CompositeSpace(self.factors + tuple(extra), dim_cap=self.dim_cap)

    def identity(self) -> "Operator":
        return Operator(self, np.eye(self.dim, dtype=complex))


@dataclass
class Operator:
    """Dense complex matrix acting on a composite space.

    Immutable by convention: arithmetic returns new instances and the matrix
    is never mutated in place, so operators are safe to share across workers.
    """

    space: CompositeSpace
    matrix: np.ndarray
    hermitian: bool = field(default=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match space dim {d}")
        if self.hermitian:
            dev = np.max(np.abs(self.matrix - self.matrix.conj().T))
            if dev > HERMITIAN_TOL:
                raise ValueError(f"operator asserted Hermitian but deviates by {dev:.3e}")

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def _check_space(self, other: "Operator"):
        if self.space.factors != other.space.factors:
            raise ValueError("operators act on different composite spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def expect(self, rho: np.ndarray) -> complex:
        """Tr[op rho] for a density matrix on the same space."""
        return complex(np.trace(self.matrix @ rho))


def lowering_biexciton(pol: str) -> Operator:
    """Polarized lowering operator of the 4-level manifold, on the bare factor.

    Derived from the spin-exciton pair: with sigma_up = |G><up| + |down><B|
    and sigma_down = |G><down| + |up><B|, the linear combinations give

        sigma_H = (sigma_up + sigma_down)/sqrt(2) = |G><H| + |H><B|
        sigma_V = (sigma_up - sigma_down)/sqrt(2) = |G><V| - |V><B|

    The relative minus on the V cascade's upper leg is not removable by any
    basis phase choice once sigma_H is fixed all-positive; it is what makes
    the circular combination (sigma_H + i sigma_V)/sqrt(2) a three-level
    ladder through (|H> - i|V>)/sqrt(2) rather than two decoupled two-level
    blocks.  Each polarization steps down its own cascade: sigma_pol^2 maps
    B to +-G and sigma_pol^3 = 0.
    """
    if pol not in ("H", "V"):
        raise ValueError(f"polarization must be 'H' or 'V', got {pol!r}")
    x = H if pol == "H" else V
    m = np.zeros((4, 4), dtype=complex)
    m[G, x] = 1.0
    m[x, B] = 1.0 if pol == "H" else -1.0
    return Operator(CompositeSpace((biexciton_factor(),)), m)


def qubit_lowering() -> Operator:
    m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    return Operator(CompositeSpace((qubit_factor(),)), m)


def boson_annihilator(space: CompositeSpace, factor_index: int) -> Operator:
    """Truncated annihilator <n-1|a|n> = sqrt(n), embedded at `factor_index`."""
    if not 0 <= factor_index < len(space.factors):
        raise IndexError(f"factor index {factor_index} out of range")
    f = space.factors[factor_index]
    if f.kind != "boson":
        raise ValueError(f"factor {factor_index} is {f.kind}, not boson")
    m = np.diag(np.sqrt(np.arange(1, f.dim, dtype=float)), k=1).astype(complex)
    bare = Operator(CompositeSpace((f,)), m)
    return embed(bare, space, factor_index)


def embed(op: Operator, target: CompositeSpace, slot: int) -> Operator:
    """Lift a single-factor operator to identity (x) ... (x) op (x) ... (x) identity."""
    if not 0 <= slot < len(target.factors):
        raise IndexError(f"slot {slot} out of range")
    if len(op.space.factors) != 1 or op.space.factors[0] != target.factors[slot]:
        raise ValueError("operator does not act on the factor at the requested slot")
    mats = [
        op.matrix if i == slot else np.eye(f.dim, dtype=complex)
        for i, f in enumerate(target.factors)
    ]
    return Operator(target, reduce(np.kron, mats), hermitian=op.hermitian)


def basis_state(space: CompositeSpace, occupations: tuple[int, ...]) -> np.ndarray:
    """Product basis ket |occupations> as a flat state vector."""
    if len(occupations) != len(space.factors):
        raise ValueError("one occupation index per factor required")
    vecs = []
    for n, f in zip(occupations, space.factors):
        if not 0 <= n < f.dim:
            raise ValueError(f"occupation {n} outside factor of dim {f.dim}")
        v = np.zeros(f.dim, dtype=complex)
        v[n] = 1.0
        vecs.append(v)
    return reduce(np.kron, vecs)
