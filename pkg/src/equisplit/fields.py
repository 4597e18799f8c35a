"""Exact coefficient fields: the rationals and prime fields F_l.

Rational scalars are gmpy2.mpq when available (much faster) and
fractions.Fraction otherwise; both normalize to lowest terms with positive
denominator, so equality, hashing and string forms are canonical either way.
Prime-field scalars are plain ints reduced to [0, l).
"""

try:
    from gmpy2 import mpq as _rational
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _rational


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class Field:
    """An exact coefficient field, either Q or F_l for a prime l.

    ``char`` is 0 for the rationals and l for F_l.  Scalars of the two
    kinds are different Python types; a Field instance supplies the
    arithmetic so matrix code never branches on the kind itself.
    """

    __slots__ = ("char",)

    def __init__(self, char: int = 0):
        if char != 0 and not is_prime(char):
            raise ValueError(f"field characteristic must be 0 or prime, got {char}")
        self.char = char

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def prime(cls, ell: int) -> "Field":
        if not is_prime(ell):
            raise ValueError(f"{ell} is not prime")
        return cls(ell)

    @property
    def is_rational(self) -> bool:
        return self.char == 0

    @property
    def tag(self) -> str:
        return "Q" if self.char == 0 else f"F{self.char}"

    @classmethod
    def from_tag(cls, tag: str) -> "Field":
        if tag == "Q":
            return cls.rationals()
        if tag.startswith("F"):
            return cls.prime(int(tag[1:]))
        raise ValueError(f"unknown field tag {tag!r}")

    def zero(self):
        return _rational(0) if self.char == 0 else 0

    def one(self):
        return _rational(1) if self.char == 0 else 1

    def from_int(self, n: int):
        return _rational(n) if self.char == 0 else n % self.char

    def ratio(self, num: int, den: int):
        """num/den as a field scalar; den must be invertible."""
        if self.char == 0:
            return _rational(num, den)
        if den % self.char == 0:
            raise ZeroDivisionError(f"{den} is not invertible mod {self.char}")
        return num * pow(den, -1, self.char) % self.char

    def add(self, a, b):
        return a + b if self.char == 0 else (a + b) % self.char

    def sub(self, a, b):
        return a - b if self.char == 0 else (a - b) % self.char

    def mul(self, a, b):
        return a * b if self.char == 0 else (a * b) % self.char

    def neg(self, a):
        return -a if self.char == 0 else (-a) % self.char

    def inv(self, a):
        if self.char == 0:
            return 1 / a
        return pow(a, -1, self.char)

    def is_zero(self, a) -> bool:
        return not a

    def to_str(self, a) -> str:
        return str(a)

    def parse(self, s: str):
        if self.char == 0:
            if "/" in s:
                num, den = s.split("/")
                return _rational(int(num), int(den))
            return _rational(int(s))
        return int(s) % self.char

    def divides_order(self, order: int) -> bool:
        """True when the characteristic divides ``order`` (averaging impossible)."""
        return self.char != 0 and order % self.char == 0

    def good_for_orders(self, orders) -> bool:
        """Good-field predicate: the characteristic divides none of ``orders``."""
        return all(not self.divides_order(n) for n in orders)

    def __eq__(self, other):
        return isinstance(other, Field) and self.char == other.char

    def __hash__(self):
        return hash(("Field", self.char))

    def __repr__(self):
        return f"Field({self.tag})"


QQ = Field.rationals()
