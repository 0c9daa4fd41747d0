"""Exact linear algebra over the rationals and prime fields

Matrices are numpy object arrays. Over the rationals the entries are ``Fraction`` objects,
over a prime field they are python integers in ``range(p)``. All reductions go through
:class:`FieldSpec` so no floating point value is ever produced.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from qha.errors import ValidationError

logger = logging.getLogger(__name__)

Mat = np.ndarray


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    characteristic: int = 0

    def __post_init__(self):
        if self.characteristic != 0 and not _is_prime(self.characteristic):
            raise ValidationError(
                f"characteristic must be 0 or prime, got {self.characteristic}",
                {"characteristic": self.characteristic},
            )

    @property
    def kind(self) -> str:
        return "rationals" if self.characteristic == 0 else "prime-field"

    @property
    def zero(self) -> Any:
        return Fraction(0) if self.characteristic == 0 else 0

    @property
    def one(self) -> Any:
        return Fraction(1) if self.characteristic == 0 else 1

    def __call__(self, x: Any) -> Any:
        """Coerce an integer, fraction or string ``p/q`` into a field element"""
        if isinstance(x, str):
            x = Fraction(x.strip())
        x = Fraction(x)
        if self.characteristic == 0:
            return x
        p = self.characteristic
        if x.denominator % p == 0:
            raise ValidationError(f"{x} has no image in F_{p}", {"value": str(x)})
        return x.numerator * pow(x.denominator, -1, p) % p

    def inv(self, x: Any) -> Any:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.characteristic == 0:
            return Fraction(1) / x
        return pow(int(x), -1, self.characteristic)

    def reduce(self, a: Any) -> Any:
        if self.characteristic == 0:
            return a
        return a % self.characteristic

    def format(self, x: Any) -> str:
        return str(Fraction(x)) if self.characteristic == 0 else str(int(x) % self.characteristic)

    def zeros(self, rows: int, cols: int) -> Mat:
        out = np.empty((rows, cols), dtype=object)
        out.fill(self.zero)
        return out

    def identity(self, n: int) -> Mat:
        out = self.zeros(n, n)
        for i in range(n):
            out[i, i] = self.one
        return out

    def matrix(self, rows: Sequence[Sequence[Any]], cols: Optional[int] = None) -> Mat:
        """Build an exact matrix from nested rows

        :param rows: Row-major entries; anything :meth:`__call__` accepts
        :param cols: Column count, needed only when ``rows`` is empty
        :return: Object array of coerced entries
        """
        rows = [list(r) for r in rows]
        if not rows:
            return self.zeros(0, cols or 0)
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValidationError("ragged matrix rows", {"widths": [len(r) for r in rows]})
        out = self.zeros(len(rows), width)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                out[i, j] = self(x)
        return out

    def coerce_array(self, a: Mat) -> Mat:
        out = np.empty(a.shape, dtype=object)
        out.flat[:] = [self(x) for x in a.flat]
        return out

    def matmul(self, a: Mat, b: Mat) -> Mat:
        if a.shape[1] != b.shape[0]:
            raise ValidationError(f"shape mismatch {a.shape} @ {b.shape}")
        if a.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        return self.reduce(a.dot(b))


RATIONALS = FieldSpec(0)


def prime_field(p: int) -> FieldSpec:
    return FieldSpec(p)


def is_zero(m: Mat) -> bool:
    return m.size == 0 or not np.any(m != 0)


def hstack(blocks: Sequence[Mat], rows: int, field: FieldSpec = RATIONALS) -> Mat:
    blocks = [b for b in blocks if b.shape[1] > 0]
    if not blocks:
        return field.zeros(rows, 0)
    return np.hstack(blocks)


def vstack(blocks: Sequence[Mat], cols: int, field: FieldSpec = RATIONALS) -> Mat:
    blocks = [b for b in blocks if b.shape[0] > 0]
    if not blocks:
        return field.zeros(0, cols)
    return np.vstack(blocks)


def block_diag(blocks: Sequence[Mat], field: FieldSpec = RATIONALS) -> Mat:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = field.zeros(rows, cols)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r, c = r + b.shape[0], c + b.shape[1]
    return out


def kron(a: Mat, b: Mat, field: FieldSpec = RATIONALS) -> Mat:
    p, q = a.shape
    r, s = b.shape
    if 0 in (p, q, r, s):
        return field.zeros(p * r, q * s)
    out = np.multiply.outer(a, b).transpose(0, 2, 1, 3).reshape(p * r, q * s)
    return field.reduce(out)


def row_reduce(m: Mat, field: FieldSpec = RATIONALS) -> Tuple[Mat, List[int], int]:
    """Reduced row echelon form by Gauss-Jordan elimination

    :param m: Matrix to reduce (left untouched)
    :param field: Field the entries live in
    :return: Tuple of rref, pivot column indices and rank
    """
    r = np.array(m, dtype=object, copy=True)
    n_rows, n_cols = r.shape
    pivots = []
    piv_r = 0
    for piv_c in range(n_cols):
        if piv_r == n_rows:
            break
        for i_row in range(piv_r, n_rows):
            if r[i_row, piv_c] != 0:
                break
        else:
            continue
        if i_row != piv_r:
            r[[piv_r, i_row]] = r[[i_row, piv_r]]
        r[piv_r, piv_c:] = field.reduce(r[piv_r, piv_c:] * field.inv(r[piv_r, piv_c]))
        for i in range(n_rows):
            if i != piv_r and r[i, piv_c] != 0:
                r[i, piv_c:] = field.reduce(r[i, piv_c:] - r[i, piv_c] * r[piv_r, piv_c:])
        pivots.append(piv_c)
        piv_r += 1
    return r, pivots, len(pivots)


def _kernel_from_rref(rref: Mat, pivots: List[int], n_cols: int, field: FieldSpec) -> Mat:
    free = [c for c in range(n_cols) if c not in set(pivots)]
    kernel = field.zeros(n_cols, len(free))
    for k, f in enumerate(free):
        kernel[f, k] = field.one
        for row, p in enumerate(pivots):
            kernel[p, k] = field.reduce(-rref[row, f])
    return kernel


def solve_and_kernel(
    m: Mat, b: Mat, field: FieldSpec = RATIONALS
) -> Tuple[Optional[Mat], Mat]:
    """Solve ``m x = b`` and describe the null space of ``m``

    :param m: Coefficient matrix
    :param b: Right hand side with ``m.shape[0]`` rows (several columns are solved at once)
    :param field: Field the entries live in
    :return: Particular solution (``None`` when inconsistent) and a matrix whose columns
        are a basis of the kernel of ``m``
    """
    rows, cols = m.shape
    assert b.shape[0] == rows, f"{b.shape = } does not match {m.shape = }"
    rref, pivots, _ = row_reduce(hstack([m, b], rows, field), field)
    kernel = _kernel_from_rref(rref, [p for p in pivots if p < cols], cols, field)
    if any(p >= cols for p in pivots):
        return None, kernel
    particular = field.zeros(cols, b.shape[1])
    for row, p in enumerate(pivots):
        particular[p] = rref[row, cols:]
    return particular, kernel


def kernel(m: Mat, field: FieldSpec = RATIONALS) -> Mat:
    rref, pivots, _ = row_reduce(m, field)
    return _kernel_from_rref(rref, pivots, m.shape[1], field)


def solve(m: Mat, b: Mat, field: FieldSpec = RATIONALS) -> Optional[Mat]:
    particular, _ = solve_and_kernel(m, b, field)
    return particular


def rank(m: Mat, field: FieldSpec = RATIONALS) -> int:
    return row_reduce(m, field)[2]


def image_basis(m: Mat, field: FieldSpec = RATIONALS) -> Mat:
    _, pivots, _ = row_reduce(m, field)
    return m[:, pivots]


def inverse(m: Mat, field: FieldSpec = RATIONALS) -> Mat:
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValidationError(f"cannot invert a {m.shape} matrix")
    if n == 0:
        return field.zeros(0, 0)
    rref, pivots, r = row_reduce(hstack([m, field.identity(n)], n, field), field)
    if r < n or pivots[n - 1] >= n:
        raise ValidationError("matrix is singular")
    return rref[:, n:]


def contains(big: Mat, small: Mat, field: FieldSpec = RATIONALS) -> bool:
    """Whether the column span of ``small`` lies in the column span of ``big``"""
    if small.shape[1] == 0:
        return True
    return rank(hstack([big, small], big.shape[0], field), field) == rank(big, field)


def same_span(a: Mat, b: Mat, field: FieldSpec = RATIONALS) -> bool:
    return contains(a, b, field) and contains(b, a, field)


def quotient_map(sub: Mat, field: FieldSpec = RATIONALS) -> Tuple[Mat, Mat]:
    """Projection onto ``V / span(sub)`` together with a section

    The complement is spanned by standard basis vectors, so coordinates of the quotient
    are labelled by the coordinates of ``V`` that survive.

    :param sub: ``n x k`` matrix whose columns span the subspace
    :return: ``q x n`` projection with kernel ``span(sub)`` and ``n x q`` section
    """
    n = sub.shape[0]
    indep = image_basis(sub, field)
    _, pivots, _ = row_reduce(indep.T, field)
    free = [j for j in range(n) if j not in set(pivots)]
    section = field.identity(n)[:, free]
    basis = hstack([indep, section], n, field)
    projection = inverse(basis, field)[indep.shape[1] :, :]
    return projection, section
