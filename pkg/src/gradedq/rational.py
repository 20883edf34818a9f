"""Exact rational functions in the base coordinates x1..xn.

Numerators and denominators are sparse multivariate polynomials over QQ
(sympy's ``PolyElement``).  Every value is kept in canonical form: the
gcd is cancelled and the denominator is monic, so two equal rational
functions compare equal syntactically.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache

from sympy import QQ
from sympy.polys.rings import PolyRing, PolyElement


class ExpressionError(ValueError):
    """Raised for malformed scalar or graded expressions."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at column {position})"
        super().__init__(message)
        self.position = position


@lru_cache(maxsize=None)
def base_ring(n: int) -> PolyRing:
    if n < 1:
        raise ValueError("dimension must be positive")
    return PolyRing([f"x{i}" for i in range(1, n + 1)], QQ)


def _to_qq(c):
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    return QQ(c)


class RationalFunction:
    """Canonical quotient of two polynomials in x1..xn."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: PolyElement, den: PolyElement | None = None, _canonical=False):
        ring = num.ring
        if den is None:
            den = ring.one
        if not _canonical:
            num, den = _canonicalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, n: int, c) -> "RationalFunction":
        ring = base_ring(n)
        return cls(ring(_to_qq(c)), ring.one, _canonical=True)

    @classmethod
    def zero(cls, n: int) -> "RationalFunction":
        ring = base_ring(n)
        return cls(ring.zero, ring.one, _canonical=True)

    @classmethod
    def one(cls, n: int) -> "RationalFunction":
        ring = base_ring(n)
        return cls(ring.one, ring.one, _canonical=True)

    @classmethod
    def variable(cls, n: int, i: int) -> "RationalFunction":
        """The coordinate function x_{i+1} (0-based index)."""
        ring = base_ring(n)
        return cls(ring.gens[i], ring.one, _canonical=True)

    @property
    def ring(self) -> PolyRing:
        return self.num.ring

    @property
    def n(self) -> int:
        return self.num.ring.ngens

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return self.den.is_one

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_one

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.den.is_one and self.num == self.num.ring(_to_qq(other))
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction)):
            ring = self.ring
            return RationalFunction(ring(_to_qq(other)), ring.one, _canonical=True)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.den.is_one and other.den.is_one:
            return RationalFunction(self.num + other.num, self.den, _canonical=True)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.den.is_one and other.den.is_one:
            return RationalFunction(self.num * other.num, self.den, _canonical=True)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if not self.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunction(self.num**k, self.den**k, _canonical=True)

    # calculus ---------------------------------------------------------
    def diff(self, i: int) -> "RationalFunction":
        """Partial derivative with respect to x_{i+1}."""
        x = self.ring.gens[i]
        if self.den.is_one:
            return RationalFunction(self.num.diff(x), self.den, _canonical=True)
        return RationalFunction(
            self.num.diff(x) * self.den - self.num * self.den.diff(x), self.den**2
        )

    def compose(self, images) -> "RationalFunction":
        """Substitute x_i -> images[i] (rational functions, possibly in another ring)."""
        return _eval_poly(self.num, images) / _eval_poly(self.den, images)

    # output -----------------------------------------------------------
    def __str__(self):
        num = _poly_str(self.num)
        if self.den.is_one:
            return num
        den = _poly_str(self.den)
        if len(self.num.terms()) > 1:
            num = f"({num})"
        if len(self.den.terms()) > 1 or not _is_monomial_str(den):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"RationalFunction({self})"


def _is_monomial_str(s):
    return all(ch not in s for ch in "+-*")


def _canonicalize(num, den):
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    ring = num.ring
    if not num:
        return ring.zero, ring.one
    if den.is_ground:
        c = den.LC
        return num.quo_ground(c), ring.one
    g, num, den = num.cofactors(den)
    lc = den.LC
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
    if den.is_ground:
        return num, ring.one
    return num, den


def _eval_poly(poly, images):
    target_n = images[0].n if images else poly.ring.ngens
    acc = RationalFunction.zero(target_n)
    powers = {}
    for exps, coeff in poly.terms():
        term = RationalFunction.constant(target_n, Fraction(int(coeff.numerator), int(coeff.denominator)))
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = images[i] ** e
                term = term * powers[key]
        acc = acc + term
    return acc


def _poly_str(poly):
    if not poly:
        return "0"
    names = poly.ring.symbols
    parts = []
    for exps, coeff in poly.terms():
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(str(name))
            elif e > 1:
                factors.append(f"{name}^{e}")
        c = Fraction(int(coeff.numerator), int(coeff.denominator))
        sign = "-" if c < 0 else "+"
        c = abs(c)
        if not factors:
            body = str(c)
        elif c == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(c)] + factors)
        parts.append((sign, body))
    out = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# parsing ----------------------------------------------------------------

def _parse_tree(text: str):
    if "**" in text:
        raise ExpressionError("use '^' for powers", text.index("**") + 1)
    try:
        return ast.parse(text.replace("^", "**").strip() or "", mode="eval").body
    except SyntaxError as exc:
        raise ExpressionError(f"syntax error: {exc.msg}", exc.offset) from None


def evaluate_expression(text: str, leaf, const):
    """Evaluate an arithmetic expression tree.

    ``leaf(name, col)`` maps identifiers to values and ``const(int)`` maps
    integer literals.  Only + - * / ^ and parentheses are accepted.
    """
    if not isinstance(text, str):
        raise ExpressionError(f"expected an expression string, got {type(text).__name__}")

    def walk(node):
        col = getattr(node, "col_offset", None)
        col = None if col is None else col + 1
        if isinstance(node, ast.Constant) and type(node.value) is int:
            return const(node.value)
        if isinstance(node, ast.Name):
            return leaf(node.id, col)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                if not (isinstance(exp, ast.Constant) and type(exp.value) is int and exp.value >= 0):
                    raise ExpressionError("exponent must be a nonnegative integer literal", col)
                base = walk(node.left)
                result = const(1)
                for _ in range(exp.value):
                    result = result * base
                return result
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                try:
                    return left / right
                except ZeroDivisionError:
                    raise ExpressionError("division by the zero polynomial", col) from None
        raise ExpressionError(f"unsupported syntax {type(node).__name__}", col)

    return walk(_parse_tree(text))


def parse_scalar(text: str, n: int) -> RationalFunction:
    """Parse a scalar expression in x1..xn into canonical form.

    >>> str(parse_scalar("(x1^2+1)/x2", 2))
    '(x1^2 + 1)/x2'
    """

    def leaf(name, col):
        if name.startswith("x") and name[1:].isdigit():
            i = int(name[1:])
            if 1 <= i <= n:
                return RationalFunction.variable(n, i - 1)
        raise ExpressionError(f"unknown identifier {name!r}", col)

    return evaluate_expression(text, leaf, lambda c: RationalFunction.constant(n, c))
