"""Exact symbolic scalar expressions on a coordinate chart.

An expression is kept permanently in a normal form: a sparse polynomial over
the rationals whose "variables" are atoms.  An atom is either a chart
variable, a transcendental call (exp/sin/cos/ln of a normal-form argument),
or an opaque wrapped polynomial used to represent reciprocals of multi-term
coefficients.  Monomials map atoms to nonzero integer exponents; negative
exponents encode reciprocals (there is no division node), e.g. 1/t is the
monomial t^-1.

Because construction normalizes eagerly, two structurally equal expressions
are the same normal form and print identically; `simplify` is the identity.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple

MAX_DIM = 12

Point = Tuple[float, ...]


class ExprError(ValueError):
    """Malformed expression construction (bad chart, bad ln argument, ...)."""


class DomainError(ArithmeticError):
    """Numeric evaluation left the expression's domain (ln <= 0, 1/0)."""

    def __init__(self, message: str, subexpr: object = None):
        super().__init__(message)
        self.subexpr = subexpr


@dataclass(frozen=True)
class Chart:
    """Ordered chart variables; `positive` names are constrained to (0, inf)."""

    vars: Tuple[str, ...]
    positive: frozenset = frozenset()

    def __post_init__(self):
        if not (1 <= len(self.vars) <= MAX_DIM):
            raise ExprError(f"chart dimension must be in 1..{MAX_DIM}, got {len(self.vars)}")
        seen = set()
        for v in self.vars:
            if not v or any(c.isspace() for c in v):
                raise ExprError(f"bad variable name {v!r}")
            if v in seen:
                raise ExprError(f"duplicate variable {v!r}")
            seen.add(v)
        if not self.positive <= seen:
            raise ExprError("positive set names unknown variables")

    @property
    def n(self) -> int:
        return len(self.vars)

    def index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise ExprError(f"unknown variable {name!r}") from None

    def env(self, point: Sequence[float]) -> dict:
        if len(point) != self.n:
            raise ExprError(f"point has {len(point)} coordinates, chart has {self.n}")
        return dict(zip(self.vars, point))

    def extend(self, name: str, positive: bool = True) -> "Chart":
        pos = set(self.positive)
        if positive:
            pos.add(name)
        return Chart(self.vars + (name,), frozenset(pos))


# --- atoms --------------------------------------------------------------

_FUNC_KINDS = ("exp", "sin", "cos", "ln")


@dataclass(frozen=True)
class Atom:
    """A multiplicative indivisible: variable, function call, or wrapped poly."""

    kind: str  # "var" | "exp" | "sin" | "cos" | "ln" | "poly"
    name: str = ""
    arg: Optional["ScalarExpr"] = None

    def sort_key(self):
        if self.kind == "var":
            return (0, self.name, "")
        if self.kind in _FUNC_KINDS:
            return (1, self.kind, str(self.arg))
        return (2, str(self.arg), "")

    def __str__(self) -> str:
        if self.kind == "var":
            return self.name
        if self.kind in _FUNC_KINDS:
            return f"{self.kind}({self.arg})"
        return f"({self.arg})"


# Monomial: tuple of (Atom, exponent) pairs sorted by Atom.sort_key, exp != 0.
Monomial = Tuple[Tuple[Atom, int], ...]

_EMPTY_MONO: Monomial = ()


def _mono_key(m: Monomial):
    return (sum(e for _, e in m), tuple((a.sort_key(), e) for a, e in m))


def _merge_exponents(*monos: Monomial) -> dict:
    exps: dict = {}
    for m in monos:
        for a, e in m:
            exps[a] = exps.get(a, 0) + e
    return {a: e for a, e in exps.items() if e != 0}


def _freeze(exps: Mapping[Atom, int]) -> Monomial:
    return tuple(sorted(((a, e) for a, e in exps.items() if e != 0),
                        key=lambda p: p[0].sort_key()))


# --- raw term-dict arithmetic (monomial -> Fraction) ---------------------

def _expand_mono(exps: Mapping[Atom, int], coeff: Fraction) -> dict:
    """Rewrite poly-atoms with positive exponents back into polynomial form."""
    plain = {}
    expansions = []
    for a, e in exps.items():
        if e == 0:
            continue
        if a.kind == "poly" and e >= 1:
            expansions.append((a.arg, e))
        else:
            plain[a] = e
    out = {_freeze(plain): coeff}
    for arg, e in expansions:
        for _ in range(e):
            out = _raw_mul(out, dict(arg._terms))
    return out


def _raw_mul(A: Mapping[Monomial, Fraction], B: Mapping[Monomial, Fraction]) -> dict:
    out: dict = {}
    for ma, ca in A.items():
        for mb, cb in B.items():
            piece = _expand_mono(_merge_exponents(ma, mb), ca * cb)
            for m, c in piece.items():
                c2 = out.get(m, _ZERO_FRAC) + c
                if c2:
                    out[m] = c2
                elif m in out:
                    del out[m]
    return out


_ZERO_FRAC = Fraction(0)
_ONE_FRAC = Fraction(1)


# --- exact division (for cancelling wrapped-poly reciprocals) ------------

def _exact_div(num: Mapping[Monomial, Fraction], den: Mapping[Monomial, Fraction]):
    """Exact polynomial division num/den over nonnegative-exponent monomials.

    Returns the quotient dict, or None if the division is not exact.  With a
    single divisor, leading-term reduction is complete for exact division.
    """
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    rem = dict(num)
    quo: dict = {}
    lead_den = max(den, key=_mono_key)
    cd = den[lead_den]
    dexp = dict(lead_den)
    guard = 0
    while rem:
        guard += 1
        if guard > 10_000:
            return None
        lead = max(rem, key=_mono_key)
        nexp = _merge_exponents(lead)
        texp = {}
        for a, e in dexp.items():
            r = nexp.get(a, 0) - e
            if r < 0:
                return None
            nexp[a] = r
        for a, e in nexp.items():
            if e:
                texp[a] = e
        # remaining exponents of the lead not present in den stay as-is
        t = _freeze(texp)
        c = rem[lead] / cd
        quo[t] = quo.get(t, _ZERO_FRAC) + c
        for m, cden in den.items():
            mm = _freeze(_merge_exponents(m, t))
            c2 = rem.get(mm, _ZERO_FRAC) - c * cden
            if c2:
                rem[mm] = c2
            elif mm in rem:
                del rem[mm]
    return quo


def _cancel_denominators(terms: dict) -> dict:
    """Divide out wrapped-poly reciprocals where the cofactor sum allows it."""
    groups: dict = {}
    for m, c in terms.items():
        den = tuple(p for p in m if p[0].kind == "poly" and p[1] < 0)
        rest = tuple(p for p in m if not (p[0].kind == "poly" and p[1] < 0))
        groups.setdefault(den, {})[rest] = c
    out: dict = {}
    for den, num in groups.items():
        den_left = dict(den)
        for atom, e in den:
            k = -e
            while k > 0:
                # clear negative non-poly exponents so division sees a polynomial
                union = {a for mm in num for a, _ in mm}
                mins = {a: min(dict(mm).get(a, 0) for mm in num) for a in union}
                clear = _freeze({a: -e2 for a, e2 in mins.items() if e2 < 0})
                cleared = {_freeze(_merge_exponents(m, clear)): c for m, c in num.items()}
                quo = _exact_div(cleared, dict(atom.arg._terms))
                if quo is None:
                    break
                back = _freeze({a: e2 for a, e2 in mins.items() if e2 < 0})
                num = {_freeze(_merge_exponents(m, back)): c for m, c in quo.items()}
                k -= 1
            if k == 0:
                del den_left[atom]
            else:
                den_left[atom] = -k
        den_mono = _freeze(den_left)
        for m, c in num.items():
            mm = _freeze(_merge_exponents(m, den_mono))
            c2 = out.get(mm, _ZERO_FRAC) + c
            if c2:
                out[mm] = c2
            elif mm in out:
                del out[mm]
    return out


# --- the expression type --------------------------------------------------

class ScalarExpr:
    """Immutable normal-form scalar expression."""

    __slots__ = ("_terms", "_hash", "_str")

    def __init__(self, terms: Mapping[Monomial, Fraction], _normalized: bool = False):
        items = {m: c for m, c in terms.items() if c}
        # cancel wrapped-poly reciprocals to a fixed point: merging groups can
        # expose a newly divisible numerator (each pass strictly shrinks the
        # multiset of denominator powers when it changes anything)
        while not _normalized and any(a.kind == "poly" and e < 0
                                      for m in items for a, e in m):
            reduced = _cancel_denominators(items)
            if reduced == items:
                break
            items = reduced
        object.__setattr__(self, "_terms",
                           tuple(sorted(items.items(), key=lambda p: _mono_key(p[0]))))
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_str", None)

    # construction helpers
    @staticmethod
    def const(value) -> "ScalarExpr":
        c = Fraction(value)
        return ScalarExpr({_EMPTY_MONO: c} if c else {})

    @staticmethod
    def var(name: str) -> "ScalarExpr":
        return ScalarExpr({((Atom("var", name), 1),): _ONE_FRAC})

    @staticmethod
    def zero() -> "ScalarExpr":
        return _ZERO

    @staticmethod
    def one() -> "ScalarExpr":
        return _ONE

    # predicates
    @property
    def is_zero_form(self) -> bool:
        return not self._terms

    @property
    def is_one(self) -> bool:
        return self._terms == ((_EMPTY_MONO, _ONE_FRAC),)

    @property
    def is_rational_const(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == _EMPTY_MONO)

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return _ZERO_FRAC
        if not self.is_rational_const:
            raise ExprError(f"not a rational constant: {self}")
        return self._terms[0][1]

    # arithmetic
    def __add__(self, other) -> "ScalarExpr":
        other = _coerce(other)
        out = dict(self._terms)
        for m, c in other._terms:
            c2 = out.get(m, _ZERO_FRAC) + c
            if c2:
                out[m] = c2
            elif m in out:
                del out[m]
        return ScalarExpr(out)

    __radd__ = __add__

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr({m: -c for m, c in self._terms}, _normalized=True)

    def __sub__(self, other) -> "ScalarExpr":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ScalarExpr":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "ScalarExpr":
        other = _coerce(other)
        return ScalarExpr(_raw_mul(dict(self._terms), dict(other._terms)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ScalarExpr":
        if not isinstance(k, int):
            raise ExprError("powers must be integers")
        if k < 0:
            return self.recip() ** (-k)
        result = _ONE
        base = self
        e = k
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def recip(self) -> "ScalarExpr":
        """Multiplicative inverse.  Single monomials invert exactly; a
        multi-term expression becomes a wrapped-poly atom to the power -1."""
        if not self._terms:
            raise ZeroDivisionError("reciprocal of zero expression")
        if len(self._terms) == 1:
            m, c = self._terms[0]
            inv = {a: -e for a, e in m}
            return ScalarExpr(_expand_mono(inv, 1 / c))
        # factor out the common monomial part and rational content
        mins: dict = {}
        atoms = {a for m, _ in self._terms for a, _ in m}
        for a in atoms:
            mins[a] = min(dict(m).get(a, 0) for m, _ in self._terms)
        m0 = _freeze(mins)
        unshift = _freeze({a: -e for a, e in mins.items()})
        shifted = ScalarExpr(_raw_mul(dict(self._terms), {unshift: _ONE_FRAC}))
        lead_c = shifted._terms[-1][1]
        content = Fraction(math.gcd(*(c.numerator for _, c in shifted._terms)),
                           math.lcm(*(c.denominator for _, c in shifted._terms)))
        if lead_c < 0:
            content = -content
        primitive = ScalarExpr({m: c / content for m, c in shifted._terms})
        atom = Atom("poly", arg=primitive)
        inv_exps = _merge_exponents(_freeze({a: -e for a, e in m0}), ((atom, -1),))
        return ScalarExpr(_expand_mono(inv_exps, 1 / content))

    # structure
    def __eq__(self, other) -> bool:
        return isinstance(other, ScalarExpr) and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self._terms))
        return self._hash

    def __str__(self) -> str:
        if self._str is None:
            object.__setattr__(self, "_str", _render(self._terms))
        return self._str

    __repr__ = __str__


_ZERO = ScalarExpr({})
_ONE = ScalarExpr({_EMPTY_MONO: _ONE_FRAC})


def _coerce(x) -> ScalarExpr:
    if isinstance(x, ScalarExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return ScalarExpr.const(x)
    raise ExprError(f"cannot use {type(x).__name__} as a scalar")


def _render(terms) -> str:
    if not terms:
        return "0"
    parts = []
    for m, c in terms:
        body = _mono_str(m, abs(c))
        if not parts:
            parts.append(("-" + body) if c < 0 else body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


def _mono_str(m: Monomial, c: Fraction) -> str:
    pieces = []
    if c != 1 or not m:
        pieces.append(str(c))
    for a, e in m:
        pieces.append(str(a) if e == 1 else f"{a}^{e}")
    return "*".join(pieces)


# --- calculus -------------------------------------------------------------

def exp_(e: ScalarExpr) -> ScalarExpr:
    if e.is_zero_form:
        return _ONE
    if len(e._terms) == 1 and e._terms[0][0] != _EMPTY_MONO:
        m, c = e._terms[0]
        if c == 1 and len(m) == 1 and m[0][0].kind == "ln" and m[0][1] == 1:
            return m[0][0].arg
    return ScalarExpr({((Atom("exp", arg=e), 1),): _ONE_FRAC})


def sin_(e: ScalarExpr) -> ScalarExpr:
    if e.is_zero_form:
        return _ZERO
    return ScalarExpr({((Atom("sin", arg=e), 1),): _ONE_FRAC})


def cos_(e: ScalarExpr) -> ScalarExpr:
    if e.is_zero_form:
        return _ONE
    return ScalarExpr({((Atom("cos", arg=e), 1),): _ONE_FRAC})


def ln_(e: ScalarExpr, positive_vars: frozenset = frozenset()) -> ScalarExpr:
    if not is_syntactically_positive(e, positive_vars):
        raise ExprError(f"ln argument is not syntactically positive: {e}")
    if e.is_one:
        return _ZERO
    if len(e._terms) == 1:
        m, c = e._terms[0]
        if c == 1 and len(m) == 1 and m[0][0].kind == "exp" and m[0][1] == 1:
            return m[0][0].arg
    return ScalarExpr({((Atom("ln", arg=e), 1),): _ONE_FRAC})


def is_syntactically_positive(e: ScalarExpr, positive_vars: frozenset = frozenset()) -> bool:
    """Conservative positivity: every term has a positive coefficient and
    only exp-atoms, positive-declared variables, or positive wrapped polys."""
    if not e._terms:
        return False
    for m, c in e._terms:
        if c <= 0:
            return False
        for a, _ in m:
            if a.kind == "exp":
                continue
            if a.kind == "var" and a.name in positive_vars:
                continue
            if a.kind == "poly" and is_syntactically_positive(a.arg, positive_vars):
                continue
            return False
    return True


_DIFF_CACHE: dict = {}


def diff(e: ScalarExpr, var: str, chart: Optional[Chart] = None) -> ScalarExpr:
    """Symbolic partial derivative with respect to the named variable.

    Expressions do not carry a chart; pass one to reject unknown variable
    names (otherwise absent names differentiate to zero as constants)."""
    if chart is not None and var not in chart.vars:
        raise ExprError(f"unknown variable {var!r} on chart {chart.vars}")
    key = (e, var)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit
    total = _ZERO
    for m, c in e._terms:
        for i, (a, k) in enumerate(m):
            da = _diff_atom(a, var)
            if da is None:
                continue
            rest_expr = ScalarExpr(
                _expand_mono({b: eb for j, (b, eb) in enumerate(m) if j != i}, c * k))
            if a.kind == "var":
                powpart = ScalarExpr(_expand_mono({a: k - 1}, _ONE_FRAC))
            elif a.kind == "exp":
                powpart = ScalarExpr(_expand_mono({a: k}, _ONE_FRAC))
            else:
                powpart = ScalarExpr(_expand_mono({a: k - 1}, _ONE_FRAC))
            total = total + rest_expr * powpart * da
    _DIFF_CACHE[key] = total
    return total


def _diff_atom(a: Atom, var: str) -> Optional[ScalarExpr]:
    """d(atom)/d(var) without the power-rule factor; None when constant.

    For exp the atom itself is left in place by the caller (d exp^k has
    exponent k, not k-1), so only the inner derivative is returned here."""
    if a.kind == "var":
        return _ONE if a.name == var else None
    inner = diff(a.arg, var)
    if inner.is_zero_form:
        return None
    if a.kind == "exp":
        return inner
    if a.kind == "sin":
        return cos_(a.arg) * inner
    if a.kind == "cos":
        return -sin_(a.arg) * inner
    if a.kind == "ln":
        return a.arg.recip() * inner
    return inner  # poly atom: chain rule, caller supplies k * atom^(k-1)


def simplify(e: ScalarExpr) -> ScalarExpr:
    """Expressions are always held in normal form; provided for API symmetry."""
    return e


# --- numeric evaluation ----------------------------------------------------

_TINY = 1e-12


def evaluate(e: ScalarExpr, env: Mapping[str, float]) -> float:
    total = 0.0
    for m, c in e._terms:
        v = float(c)
        for a, k in m:
            base = _eval_atom(a, env)
            if k < 0 and abs(base) < _TINY:
                raise DomainError(f"reciprocal of value too close to zero in {a}", a)
            try:
                v *= base ** k
            except OverflowError:
                raise DomainError(f"overflow evaluating {a}^{k}", a) from None
            except ZeroDivisionError:
                raise DomainError(f"zero to negative power in {a}", a) from None
        total += v
    return total


def _eval_atom(a: Atom, env: Mapping[str, float]) -> float:
    if a.kind == "var":
        try:
            return env[a.name]
        except KeyError:
            raise ExprError(f"variable {a.name!r} not bound at evaluation") from None
    if a.kind == "poly":
        return evaluate(a.arg, env)
    x = evaluate(a.arg, env)
    if a.kind == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise DomainError("exp overflow", a) from None
    if a.kind == "sin":
        return math.sin(x)
    if a.kind == "cos":
        return math.cos(x)
    if x <= 0:
        raise DomainError(f"ln of non-positive value {x} in {a}", a)
    return math.log(x)


def eval_at(e: ScalarExpr, chart: Chart, point: Sequence[float]) -> float:
    return evaluate(e, chart.env(point))


# --- sampling and zero classification --------------------------------------

@dataclass(frozen=True)
class Sampler:
    """Deterministic point sampler; positive variables draw from [0.5, 2]."""

    seed: int = 0
    points: int = 64
    tol: float = 1e-9

    def draw(self, chart: Chart, count: Optional[int] = None) -> Iterable[Point]:
        rng = random.Random(f"{self.seed}|{','.join(chart.vars)}")
        for _ in range(count if count is not None else self.points):
            yield tuple(
                rng.uniform(0.5, 2.0) if v in chart.positive else rng.uniform(-1.0, 1.0)
                for v in chart.vars)

    def valid_points(self, chart: Chart, exprs: Sequence[ScalarExpr]) -> list:
        """Up to `points` sample points where every expression evaluates;
        domain-error points are discarded, oversampling at most 10x."""
        out = []
        for p in self.draw(chart, 10 * self.points):
            env = chart.env(p)
            try:
                vals = [evaluate(e, env) for e in exprs]
            except DomainError:
                continue
            out.append((p, vals))
            if len(out) >= self.points:
                break
        if not out:
            raise ExprError("sampling exhausted: every point hit a domain error")
        return out


@dataclass(frozen=True)
class ZeroVerdict:
    kind: str  # "symbolic" | "numeric" | "nonzero"
    witness: Optional[Point] = None
    value: Optional[float] = None

    @property
    def is_zero(self) -> bool:
        return self.kind != "nonzero"

    @property
    def tier(self) -> str:
        return "symbolic" if self.kind == "symbolic" else "numeric"


SYMBOLIC_ZERO = ZeroVerdict("symbolic")


def is_zero(e: ScalarExpr, chart: Chart, sampler: Sampler) -> ZeroVerdict:
    """Three-way zero test: exact normal form first, sampling as fallback."""
    if e.is_zero_form:
        return SYMBOLIC_ZERO
    for p, (v,) in sampler.valid_points(chart, [e]):
        if abs(v) >= sampler.tol:
            return ZeroVerdict("nonzero", witness=p, value=v)
    return ZeroVerdict("numeric")


def is_nonvanishing(e: ScalarExpr, chart: Chart, sampler: Sampler):
    """True when |e| >= tol at every valid sample point; else (False, point)."""
    if e.is_zero_form:
        first = next(iter(sampler.draw(chart, 1)))
        return False, first
    for p, (v,) in sampler.valid_points(chart, [e]):
        if abs(v) < sampler.tol:
            return False, p
    return True, None
