"""Real Clifford algebras CL(m) with negative-definite signature, complexified.

Generators e_1, ..., e_m satisfy e_i^2 = -1 and e_i e_j = -e_j e_i for
i != j.  Elements are stored as sparse coefficient tables over the 2^m
basis blades; a blade is an ascending product e_{i_1} ... e_{i_k} encoded
as the bitmask with bits i_1-1, ..., i_k-1 set.  Coefficients may be
complex (the "tensor i" of the complexification is the scalar 1j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConstructionError

__all__ = ["CliffordElement", "generator", "blade", "check_relations"]


def _reorder_sign(a: int, b: int) -> float:
    """Sign from sorting the concatenation of blades a and b."""
    swaps = 0
    x = a >> 1
    while x:
        swaps += (x & b).bit_count()
        x >>= 1
    return -1.0 if swaps & 1 else 1.0


def _blade_mul(a: int, b: int) -> tuple[int, float]:
    sign = _reorder_sign(a, b)
    if (a & b).bit_count() & 1:
        sign = -sign  # each contracted pair contributes e_i^2 = -1
    return a ^ b, sign


@dataclass
class CliffordElement:
    """Element of CL(m) (x) C as a blade-indexed coefficient table."""

    m: int
    coeffs: dict[int, complex] = field(default_factory=dict)

    def _trim(self, tol: float = 1e-14) -> "CliffordElement":
        self.coeffs = {k: v for k, v in self.coeffs.items() if abs(v) > tol}
        return self

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return CliffordElement(self.m, out)._trim()

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return self + (-1.0) * other

    def __rmul__(self, scalar: complex) -> "CliffordElement":
        return CliffordElement(self.m, {k: scalar * v for k, v in self.coeffs.items()})._trim()

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        out: dict[int, complex] = {}
        for ka, va in self.coeffs.items():
            for kb, vb in other.coeffs.items():
                k, s = _blade_mul(ka, kb)
                out[k] = out.get(k, 0.0) + s * va * vb
        return CliffordElement(self.m, out)._trim()

    def commutator(self, other: "CliffordElement") -> "CliffordElement":
        return self * other - other * self

    @property
    def grading(self) -> str:
        """'even', 'odd', or 'mixed' by blade parity."""
        pars = {k.bit_count() & 1 for k in self.coeffs}
        if pars <= {0}:
            return "even"
        if pars == {1}:
            return "odd"
        return "mixed"

    def is_zero(self, tol: float = 1e-12) -> bool:
        return all(abs(v) <= tol for v in self.coeffs.values())

    def norm(self) -> float:
        return sum(abs(v) ** 2 for v in self.coeffs.values()) ** 0.5


def generator(m: int, i: int) -> CliffordElement:
    """e_i in CL(m), 1-based."""
    if not 1 <= i <= m:
        raise ValueError(f"generator index {i} outside 1..{m}")
    return CliffordElement(m, {1 << (i - 1): 1.0})


def blade(m: int, *indices: int) -> CliffordElement:
    """Ascending product e_{i_1}...e_{i_k}; indices must be strictly increasing."""
    if list(indices) != sorted(set(indices)):
        raise ValueError("blade indices must be strictly increasing")
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return CliffordElement(m, {mask: 1.0})


def check_relations(m: int, tol: float = 1e-12) -> None:
    """Verify e_i^2 = -1 and anticommutation on all generator pairs."""
    one = CliffordElement(m, {0: 1.0})
    for i in range(1, m + 1):
        ei = generator(m, i)
        if not (ei * ei + one).is_zero(tol):
            raise ConstructionError(f"clifford relation e_{i}^2 = -1 violated")
        for j in range(i + 1, m + 1):
            ej = generator(m, j)
            if not (ei * ej + ej * ei).is_zero(tol):
                raise ConstructionError(f"clifford anticommutation e_{i}e_{j} violated")
