"""Uniform residual record emitted by every verification."""

import math
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class ResidualReport:
    """A named residual: ``value`` compared against ``target``.

    ``tolerance=None`` marks an exact comparison, in which case ``passed``
    means literal equality of the two rationals.
    """

    name: str
    value: object
    target: object = 0
    tolerance: float = None
    passed: bool = False
    metadata: dict = field(default_factory=dict)

    @classmethod
    def check(cls, name, value, target=0.0, tol=1e-10, **metadata):
        if tol is None:
            ok = Fraction(value) == Fraction(target)
        else:
            v, t = float(value), float(target)
            ok = math.isfinite(v) and abs(v - t) <= tol
        return cls(name, value, target, tol, bool(ok), metadata)

    @classmethod
    def exact(cls, name, value, target=0, **metadata):
        return cls.check(name, value, target, None, **metadata)

    @property
    def is_exact(self):
        return self.tolerance is None

    @property
    def deviation(self):
        if self.is_exact:
            return Fraction(self.value) - Fraction(self.target)
        return abs(float(self.value) - float(self.target))

    def to_dict(self):
        out = {"name": self.name}
        out.update(_encode("value", self.value))
        out.update(_encode("target", self.target))
        out["tolerance"] = self.tolerance
        out["pass"] = self.passed
        out["params"] = {k: _plain(v) for k, v in sorted(self.metadata.items())}
        return out


def _encode(key, v):
    if isinstance(v, Fraction):
        tag = "rational" if key == "value" else f"{key}_rational"
        return {key: _decimal(v), tag: f"{v.numerator}/{v.denominator}"}
    if isinstance(v, int) and not isinstance(v, bool):
        return {key: v}
    return {key: float(v)}


def _decimal(q):
    """Decimal string of a rational, exact if it terminates, else 17 significant digits."""
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d == 1 and q.denominator < 10**30:
        s = format(q.numerator / q.denominator, ".17g")
        if Fraction(s) == q:
            return s
    return format(float(q), ".17g")


def _plain(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if hasattr(v, "item"):
        return v.item()
    return v
