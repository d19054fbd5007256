"""Exact polynomial arithmetic used for Lie derivatives and transition functions.

Two tiny immutable polynomial types built on ``fractions.Fraction``:

* ``Poly1`` — univariate, coefficient list in ascending degree;
* ``Poly2`` — bivariate, sparse map ``(i, j) -> coeff`` for ``x**i * y**j``.

Only the operations the rest of the package needs are implemented (ring
arithmetic, differentiation, evaluation, composition with shifts).  float
evaluation goes through a compiled closure so that integrator right-hand
sides stay cheap.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

Q = Fraction


def _q(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)  # exact binary expansion
    raise TypeError(f"cannot coerce {type(v)!r} to Fraction")


# ---------------------------------------------------------------------------
# univariate
# ---------------------------------------------------------------------------

class Poly1:
    """Univariate polynomial with exact rational coefficients (ascending)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):  # trailing zeros trimmed
        cs = [_q(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(cs)

    # -- basic ring ops ----------------------------------------------------
    def __add__(self, other: "Poly1") -> "Poly1":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly1([
            (self.coeffs[i] if i < len(self.coeffs) else 0)
            + (other.coeffs[i] if i < len(other.coeffs) else 0)
            for i in range(n)
        ])

    def __sub__(self, other: "Poly1") -> "Poly1":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly1") -> "Poly1":
        if not self.coeffs or not other.coeffs:
            return Poly1()
        out = [Q(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly1(out)

    def scale(self, c) -> "Poly1":
        c = _q(c)
        return Poly1([c * a for a in self.coeffs])

    # -- calculus ------------------------------------------------------------
    def diff(self, order: int = 1) -> "Poly1":
        p = self
        for _ in range(order):
            p = Poly1([i * c for i, c in enumerate(p.coeffs)][1:])
        return p

    def integrate(self) -> "Poly1":
        """Antiderivative vanishing at 0."""
        return Poly1([Q(0)] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    # -- evaluation ------------------------------------------------------------
    def eval_exact(self, x) -> Fraction:
        x = _q(x)
        acc = Q(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def shift(self, a) -> "Poly1":
        """Return p(x + a) as a polynomial in x (exact)."""
        a = _q(a)
        out = Poly1()
        # Horner on shifted variable: p(x+a) = sum c_i (x+a)^i
        xs = Poly1([a, 1])
        power = Poly1([1])
        for c in self.coeffs:
            out = out + power.scale(c)
            power = power * xs
        return out

    def valuation(self) -> int:
        """Smallest degree with nonzero coefficient (0 for the zero poly)."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return 0

    def is_zero(self) -> bool:
        return not self.coeffs

    @staticmethod
    def monomial(degree: int, coeff=1) -> "Poly1":
        return Poly1([0] * degree + [coeff])

    def shift_down(self, m: int) -> "Poly1":
        """Divide by x**m exactly; requires valuation >= m."""
        if any(c != 0 for c in self.coeffs[:m]):
            raise ValueError("polynomial not divisible by x^m")
        return Poly1(self.coeffs[m:])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly1) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly1({[str(c) for c in self.coeffs]})"


# ---------------------------------------------------------------------------
# bivariate
# ---------------------------------------------------------------------------

class Poly2:
    """Sparse bivariate polynomial ``sum c_{ij} x^i y^j`` over the rationals."""

    __slots__ = ("terms", "_fast")

    def __init__(self, terms: Dict[Tuple[int, int], object] | None = None):
        clean: Dict[Tuple[int, int], Fraction] = {}
        for (i, j), c in (terms or {}).items():
            c = _q(c)
            if c != 0:
                clean[(int(i), int(j))] = c
        self.terms = clean
        self._fast: Callable[[float, float], float] | None = None

    # -- constructors -----------------------------------------------------------
    @staticmethod
    def const(c) -> "Poly2":
        return Poly2({(0, 0): c})

    @staticmethod
    def x() -> "Poly2":
        return Poly2({(1, 0): 1})

    @staticmethod
    def y() -> "Poly2":
        return Poly2({(0, 1): 1})

    @staticmethod
    def from_poly1_in_x(p: Poly1) -> "Poly2":
        return Poly2({(i, 0): c for i, c in enumerate(p.coeffs)})

    # -- ring ops -----------------------------------------------------------------
    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Q(0)) + c
        return Poly2(out)

    def __sub__(self, other: "Poly2") -> "Poly2":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly2") -> "Poly2":
        out: Dict[Tuple[int, int], Fraction] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, Q(0)) + c1 * c2
        return Poly2(out)

    def scale(self, c) -> "Poly2":
        c = _q(c)
        return Poly2({k: c * v for k, v in self.terms.items()})

    def __neg__(self) -> "Poly2":
        return self.scale(-1)

    def pow(self, n: int) -> "Poly2":
        out = Poly2.const(1)
        base = self
        while n > 0:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    __pow__ = pow

    # -- calculus ----------------------------------------------------------------
    def diff_x(self) -> "Poly2":
        return Poly2({(i - 1, j): i * c for (i, j), c in self.terms.items() if i > 0})

    def diff_y(self) -> "Poly2":
        return Poly2({(i, j - 1): j * c for (i, j), c in self.terms.items() if j > 0})

    # -- evaluation -----------------------------------------------------------------
    def eval_exact(self, x, y) -> Fraction:
        x, y = _q(x), _q(y)
        acc = Q(0)
        for (i, j), c in self.terms.items():
            acc += c * x**i * y**j
        return acc

    def compiled(self) -> Callable[[float, float], float]:
        """Return (and cache) a fast float evaluator."""
        if self._fast is None:
            if not self.terms:
                self._fast = lambda x, y: 0.0
            else:
                keys = sorted(self.terms)
                ii = np.array([k[0] for k in keys], dtype=np.int64)
                jj = np.array([k[1] for k in keys], dtype=np.int64)
                cc = np.array([float(self.terms[k]) for k in keys])

                def _eval(x: float, y: float, ii=ii, jj=jj, cc=cc) -> float:
                    return float(np.dot(cc, (x ** ii) * (y ** jj)))

                self._fast = _eval
        return self._fast

    def __call__(self, x: float, y: float) -> float:
        return self.compiled()(x, y)

    # -- structure -----------------------------------------------------------------
    def at_y0(self) -> Poly1:
        """Restriction to y = 0 as a univariate polynomial in x."""
        coeffs: List[Fraction] = []
        for (i, j), c in self.terms.items():
            if j == 0:
                while len(coeffs) <= i:
                    coeffs.append(Q(0))
                coeffs[i] += c
        return Poly1(coeffs)

    def divide_out_y(self) -> "Poly2":
        """Divide by y exactly; requires every term to carry y."""
        if any(j == 0 for (_, j) in self.terms):
            raise ValueError("polynomial not divisible by y")
        return Poly2({(i, j - 1): c for (i, j), c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly2) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        body = " + ".join(
            f"({c})x^{i}y^{j}" for (i, j), c in sorted(self.terms.items())
        )
        return f"Poly2[{body or '0'}]"


# ---------------------------------------------------------------------------
# structured-text monomial serialization
# ---------------------------------------------------------------------------
# A component is a block of rows "x_exp y_exp numerator denominator"; blocks
# are separated by a line holding just "--".  Blank lines and '#' comments are
# ignored.

def poly2_to_rows(p: Poly2) -> List[Tuple[int, int, int, int]]:
    return [
        (i, j, c.numerator, c.denominator) for (i, j), c in sorted(p.terms.items())
    ]


def poly2_from_rows(rows: Iterable[Tuple[int, int, int, int]]) -> Poly2:
    terms: Dict[Tuple[int, int], Fraction] = {}
    for i, j, num, den in rows:
        terms[(int(i), int(j))] = terms.get((int(i), int(j)), Q(0)) + Q(num, den)
    return Poly2(terms)


def polys_to_text(components: Sequence[Poly2]) -> str:
    blocks = []
    for p in components:
        lines = [f"{i} {j} {num} {den}" for i, j, num, den in poly2_to_rows(p)]
        blocks.append("\n".join(lines) if lines else "0 0 0 1")
    return "\n--\n".join(blocks) + "\n"


def polys_from_text(text: str) -> List[Poly2]:
    blocks: List[List[Tuple[int, int, int, int]]] = [[]]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "--":
            blocks.append([])
            continue
        i, j, num, den = line.split()
        blocks[-1].append((int(i), int(j), int(num), int(den)))
    return [poly2_from_rows(rows) for rows in blocks]
