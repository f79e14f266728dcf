"""Line-oriented problem DSL and the shared expression surface syntax.

Scalar syntax: infix + - * ^, rational literals p/q, chart variables, and
exp( ) sin( ) cos( ) ln( ).  Tensor syntax adds the basis tokens d/dx<i>
(vector) and dx<i> (form) and the wedge, spelled ^.  The caret is a power
only between a scalar base and an integer exponent; any graded operand
makes it a wedge (a scalar operand then acts by multiplication).

Problem files are one directive per line, # comments allowed:

    chart x0 x1 x2 y
    vol dx0^dx1^dx2^dy
    pi = (d/dx1 - x2*d/dx0)^d/dx2
    E = d/dx0
    seed 0
    points 64
    tol 1e-9
    run verify pair gv

Exactly one tensor-input style per file: pi [+ E], or theta, or
omega + Omega.  A missing vol defaults to the flat top form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .alg import DiffForm, GradedElement, MultiVector, wedge
from .expr import Chart, ExprError, ScalarExpr, cos_, exp_, ln_, sin_


class DslError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0,
                 expected: Tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = expected
        loc = f"line {line}, col {col}: " if line else ""
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{loc}{message}{exp}")


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<vec>d/d[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^/()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "vec" | "num" | "ident" | "op" | "end"
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 0) -> List[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise DslError(f"unexpected character {text[pos]!r}", line, col0 + pos + 1)
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        out.append(Token(kind, m.group(), line, col0 + m.start() + 1))
    out.append(Token("end", "", line, col0 + len(text) + 1))
    return out


Value = Union[ScalarExpr, GradedElement]

_FUNCS = {"exp": exp_, "sin": sin_, "cos": cos_}


class _ExprParser:
    """Pratt parser over mixed scalar / graded values."""

    def __init__(self, chart: Chart, tokens: List[Token]):
        self.chart = chart
        self.toks = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        t = self.next()
        if t.kind != "op" or t.text != op:
            raise DslError(f"got {t.text!r}", t.line, t.col, (op,))

    def parse(self) -> Value:
        v = self.expr(0)
        t = self.peek()
        if t.kind != "end":
            raise DslError(f"trailing input {t.text!r}", t.line, t.col,
                           ("+", "-", "*", "^", "end of expression"))
        return v

    def expr(self, min_bp: int) -> Value:
        t = self.next()
        left = self.prefix(t)
        while True:
            t = self.peek()
            if t.kind != "op" or t.text not in ("+", "-", "*", "^"):
                break
            bp = {"+": 10, "-": 10, "*": 20, "^": 30}[t.text]
            if bp < min_bp:
                break
            self.next()
            if t.text == "^":
                left = self.caret(left, t)
            else:
                right = self.expr(bp + 1)
                left = self.combine(t, left, right)
        return left

    def prefix(self, t: Token) -> Value:
        if t.kind == "op" and t.text == "-":
            v = self.expr(25)  # binds tighter than +- and *, looser than ^
            return -v if isinstance(v, ScalarExpr) else v.scale(-1)
        if t.kind == "op" and t.text == "(":
            v = self.expr(0)
            self.expect_op(")")
            return v
        if t.kind == "num":
            value = Fraction(int(t.text))
            nt = self.peek()
            if nt.kind == "op" and nt.text == "/":
                self.next()
                den = self.next()
                if den.kind != "num":
                    raise DslError("malformed rational literal", den.line, den.col,
                                   ("integer denominator",))
                if int(den.text) == 0:
                    raise DslError("zero denominator", den.line, den.col)
                value /= int(den.text)
            return ScalarExpr.const(value)
        if t.kind == "vec":
            name = t.text[3:]
            if name not in self.chart.vars:
                raise DslError(f"unknown vector basis {t.text!r}", t.line, t.col,
                               tuple(f"d/d{v}" for v in self.chart.vars))
            return MultiVector.basis(self.chart, [self.chart.index(name)])
        if t.kind == "ident":
            name = t.text
            nt = self.peek()
            if nt.kind == "op" and nt.text == "(" and (name in _FUNCS or name == "ln"):
                self.next()
                arg = self.expr(0)
                self.expect_op(")")
                if not isinstance(arg, ScalarExpr):
                    raise DslError(f"{name}() takes a scalar argument", t.line, t.col)
                try:
                    if name == "ln":
                        return ln_(arg, self.chart.positive)
                    return _FUNCS[name](arg)
                except ExprError as e:
                    raise DslError(str(e), t.line, t.col) from None
            if name in self.chart.vars:
                return ScalarExpr.var(name)
            if name.startswith("d") and name[1:] in self.chart.vars:
                return DiffForm.basis(self.chart, [self.chart.index(name[1:])])
            raise DslError(f"unknown identifier {name!r}", t.line, t.col,
                           ("a chart variable", "dx<i>", "d/dx<i>",
                            "exp", "sin", "cos", "ln"))
        raise DslError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col,
                       ("a term",))

    def caret(self, left: Value, t: Token) -> Value:
        # scalar ^ integer-literal is a power; anything graded wedges
        nt = self.peek()
        neg = False
        if nt.kind == "op" and nt.text == "-":
            self.next()
            neg = True
            nt = self.peek()
        if isinstance(left, ScalarExpr) and nt.kind == "num":
            self.next()
            k = int(nt.text)
            after = self.peek()
            if after.kind == "op" and after.text == "/":
                raise DslError("exponents must be integers", after.line, after.col)
            try:
                return left ** (-k if neg else k)
            except ZeroDivisionError:
                raise DslError("negative power of the zero expression",
                               t.line, t.col) from None
        if neg:
            raise DslError("'-' after ^ needs an integer exponent", t.line, t.col)
        right = self.expr(31)
        if isinstance(left, ScalarExpr) and isinstance(right, ScalarExpr):
            raise DslError("scalar ^ scalar needs an integer literal exponent",
                           t.line, t.col)
        return self.combine(Token("op", "^", t.line, t.col), left, right)

    def combine(self, t: Token, a: Value, b: Value) -> Value:
        sc_a, sc_b = isinstance(a, ScalarExpr), isinstance(b, ScalarExpr)
        if t.text in ("+", "-"):
            if sc_a and sc_b:
                return a + b if t.text == "+" else a - b
            if sc_a or sc_b:
                raise DslError("cannot add a scalar and a graded element",
                               t.line, t.col)
            try:
                return a + b if t.text == "+" else a - b
            except Exception as e:
                raise DslError(str(e), t.line, t.col) from None
        if t.text == "*":
            if sc_a and sc_b:
                return a * b
            if sc_a:
                return b.scale(a)
            if sc_b:
                return a.scale(b)
            raise DslError("use ^ to wedge graded elements", t.line, t.col)
        # wedge (possibly with a scalar acting as grade 0)
        if sc_a and sc_b:
            raise DslError("scalar ^ scalar needs an integer literal exponent",
                           t.line, t.col)
        if sc_a:
            return b.scale(a)
        if sc_b:
            return a.scale(b)
        try:
            return wedge(a, b)
        except Exception as e:
            raise DslError(str(e), t.line, t.col) from None


def parse_value(chart: Chart, text: str, line: int = 1, col0: int = 0) -> Value:
    return _ExprParser(chart, tokenize(text, line, col0)).parse()


def parse_scalar(chart: Chart, text: str, line: int = 1) -> ScalarExpr:
    v = parse_value(chart, text, line)
    if not isinstance(v, ScalarExpr):
        raise DslError("expected a scalar expression", line, 1)
    return v


def parse_multivector(chart: Chart, text: str, line: int = 1) -> MultiVector:
    v = parse_value(chart, text, line)
    if isinstance(v, ScalarExpr):
        return MultiVector.scalar(chart, v)
    if not isinstance(v, MultiVector):
        raise DslError("expected a multivector expression", line, 1)
    return v


def parse_form(chart: Chart, text: str, line: int = 1) -> DiffForm:
    v = parse_value(chart, text, line)
    if isinstance(v, ScalarExpr):
        return DiffForm.scalar(chart, v)
    if not isinstance(v, DiffForm):
        raise DslError("expected a differential-form expression", line, 1)
    return v


# --- problem files -------------------------------------------------------------

COMMANDS = ("verify", "pair", "gv", "codim1", "poissonize", "bridge",
            "rescale", "unimodular")


@dataclass
class ProblemFile:
    chart: Chart
    vol: Optional[DiffForm]
    style: str                      # "pi" | "theta" | "lcs"
    pi: Optional[MultiVector] = None
    E: Optional[MultiVector] = None
    theta: Optional[DiffForm] = None
    omega1: Optional[DiffForm] = None
    omega2: Optional[DiffForm] = None
    seed: int = 0
    points: int = 64
    tol: float = 1e-9
    commands: Tuple[Tuple[str, Optional[str]], ...] = ()

    def canonical_text(self) -> str:
        lines = [f"chart {' '.join(self.chart.vars)}"]
        if self.vol is not None:
            lines.append(f"vol {self.vol}")
        if self.style == "pi":
            lines.append(f"pi = {self.pi}")
            if self.E is not None and not self.E.is_identically_zero:
                lines.append(f"E = {self.E}")
        elif self.style == "theta":
            lines.append(f"theta = {self.theta}")
        else:
            lines.append(f"omega = {self.omega1}")
            lines.append(f"Omega = {self.omega2}")
        if self.seed != 0:
            lines.append(f"seed {self.seed}")
        if self.points != 64:
            lines.append(f"points {self.points}")
        if self.tol != 1e-9:
            lines.append(f"tol {self.tol}")
        if self.commands:
            parts = [c if a is None else f"{c}({a})" for c, a in self.commands]
            lines.append("run " + " ".join(parts))
        return "\n".join(lines) + "\n"


def _split_commands(rest: str, line_no: int) -> List[Tuple[str, Optional[str]]]:
    out: List[Tuple[str, Optional[str]]] = []
    i = 0
    n = len(rest)
    while i < n:
        while i < n and rest[i].isspace():
            i += 1
        if i >= n:
            break
        m = re.match(r"[a-z0-9]+", rest[i:])
        if not m:
            raise DslError(f"bad command text {rest[i:]!r}", line_no, i + 1,
                           COMMANDS)
        name = m.group()
        i += m.end()
        if name not in COMMANDS:
            raise DslError(f"unknown command {name!r}", line_no, i, COMMANDS)
        arg = None
        if i < n and rest[i] == "(":
            depth = 0
            start = i + 1
            while i < n:
                if rest[i] == "(":
                    depth += 1
                elif rest[i] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                i += 1
            if depth != 0:
                raise DslError("unbalanced parentheses in command argument",
                               line_no, start)
            arg = rest[start:i]
            i += 1
        if name in ("rescale", "unimodular") and arg is None:
            raise DslError(f"{name} needs a parenthesized argument", line_no, i)
        if name not in ("rescale", "unimodular") and arg is not None:
            raise DslError(f"{name} takes no argument", line_no, i)
        out.append((name, arg))
    return out


def parse_problem(text: str) -> ProblemFile:
    chart: Optional[Chart] = None
    vol_text = None
    decls = {}
    seed, points, tol = 0, 64, 1e-9
    commands: List[Tuple[str, Optional[str]]] = []

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split(None, 1)[0]
        rest = line[len(word):].strip()
        if word == "chart":
            if chart is not None:
                raise DslError("duplicate chart declaration", line_no, 1)
            names = rest.split()
            if not names:
                raise DslError("chart needs variable names", line_no, 1)
            try:
                chart = Chart(tuple(names))
            except ExprError as e:
                raise DslError(str(e), line_no, 1) from None
            continue
        if word == "seed":
            try:
                seed = int(rest)
                if seed < 0:
                    raise ValueError
            except ValueError:
                raise DslError(f"bad seed {rest!r}", line_no, 1,
                               ("unsigned integer",)) from None
            continue
        if word == "points":
            try:
                points = int(rest)
                if points <= 0:
                    raise ValueError
            except ValueError:
                raise DslError(f"bad points {rest!r}", line_no, 1,
                               ("positive integer",)) from None
            continue
        if word == "tol":
            try:
                tol = float(rest)
                if not tol > 0:
                    raise ValueError
            except ValueError:
                raise DslError(f"bad tol {rest!r}", line_no, 1,
                               ("positive float",)) from None
            continue
        if word == "run":
            commands.extend(_split_commands(rest, line_no))
            continue
        if word == "vol":
            if chart is None:
                raise DslError("chart must be declared before vol", line_no, 1)
            if vol_text is not None:
                raise DslError("duplicate vol declaration", line_no, 1)
            vol_text = (rest, line_no)
            continue
        if word in ("pi", "E", "theta", "omega", "Omega"):
            if chart is None:
                raise DslError(f"chart must be declared before {word}", line_no, 1)
            if not rest.startswith("="):
                raise DslError(f"{word} needs '= <expression>'", line_no,
                               len(word) + 1, ("=",))
            if word in decls:
                raise DslError(f"duplicate declaration of {word}", line_no, 1)
            decls[word] = (rest[1:].strip(), line_no)
            continue
        raise DslError(f"unknown directive {word!r}", line_no, 1,
                       ("chart", "vol", "pi", "E", "theta", "omega", "Omega",
                        "seed", "points", "tol", "run"))

    if chart is None:
        raise DslError("missing chart declaration")
    styles = [s for s, keys in (("pi", ("pi",)), ("theta", ("theta",)),
                                ("lcs", ("omega", "Omega")))
              if any(k in decls for k in keys)]
    if len(styles) != 1:
        raise DslError("exactly one tensor-input style per file "
                       "(pi [E] | theta | omega Omega); got: "
                       + (", ".join(sorted(decls)) or "none"))
    style = styles[0]
    if "E" in decls and style != "pi":
        raise DslError("E only combines with pi")
    if style == "lcs" and not ("omega" in decls and "Omega" in decls):
        raise DslError("LCS input needs both omega and Omega")

    vol = None
    if vol_text is not None:
        vol = parse_form(chart, vol_text[0], vol_text[1])

    pf = ProblemFile(chart, vol, style, seed=seed, points=points, tol=tol,
                     commands=tuple(commands))
    if style == "pi":
        pf.pi = parse_multivector(chart, *decls["pi"])
        pf.E = (parse_multivector(chart, *decls["E"]) if "E" in decls
                else MultiVector.zero(chart, 1))
        if pf.pi.terms and pf.pi.grade != 2:
            raise DslError(f"pi must have grade 2, got {pf.pi.grade}",
                           decls["pi"][1], 1)
        if pf.E.terms and pf.E.grade != 1:
            raise DslError(f"E must have grade 1, got {pf.E.grade}",
                           decls["E"][1], 1)
    elif style == "theta":
        pf.theta = parse_form(chart, *decls["theta"])
        if pf.theta.grade != 1:
            raise DslError("theta must be a 1-form", decls["theta"][1], 1)
    else:
        pf.omega1 = parse_form(chart, *decls["omega"])
        pf.omega2 = parse_form(chart, *decls["Omega"])
        if pf.omega1.terms and pf.omega1.grade != 1:
            raise DslError("omega must be a 1-form", decls["omega"][1], 1)
        if pf.omega2.terms and pf.omega2.grade != 2:
            raise DslError("Omega must be a 2-form", decls["Omega"][1], 1)
    return pf
