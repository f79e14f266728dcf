"""Jacobi structures: verification, classification, defining pairs,
Godbillon-Vey representatives, Poissonization, and vanishing criteria.

A structure (pi, E) must satisfy [pi,pi] = 2 E^pi and [pi,E] = 0.  Regular
structures split by whether pi^m ^ E vanishes identically (LCS type, even
leaves) or nowhere (contact type, odd leaves); the codimension is
q = n - 2m resp. n - 2m - 1 and must satisfy 0 < q < n for the
Godbillon-Vey machinery.

Defining pairs follow the main construction:
  LCS:     alpha = phi(pi^m / m!),       beta = phi([-*pi^m, pi^m])
  contact: alpha = phi(pi^m ^ E / m!),   beta = phi([-*(pi^m ^ E), pi^m ^ E])
with gv = beta ^ (d beta)^q closed in both cases.  (The leading minus is
needed for BOTH kinds under this bracket orientation; see
_bracket_multivector.)

Poissonization note: with the bracket conventions fixed by the axiom
[pi,pi] = 2 E^pi (the ones the model structures satisfy), the bivector
t^-1 pi + E ^ d/dt is the Poisson lift; the frequently printed variant
t^-1 pi + d/dt ^ E fails [L,L] = 0 whenever E ^ pi != 0.  See the bridge
check for the matching correction to the pullback statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .alg import (AlgebraError, DiffForm, GradedElement, MultiVector,
                  contract_form_into_mv, mask_indices, power, wedge)
from .calculus import exterior_derivative, schouten
from .duality import (StarCompanion, VolumeContext, phi, phi_inv, psi, star,
                      volume_context)
from .expr import (Chart, Sampler, ScalarExpr, ZeroVerdict, evaluate,
                   is_nonvanishing)


class JacobiError(ValueError):
    """Base for structure-level failures; carries an optional witness point."""

    def __init__(self, message: str, witness: Optional[tuple] = None):
        super().__init__(message)
        self.witness = witness


class AxiomViolation(JacobiError):
    def __init__(self, which: str, witness=None):
        super().__init__(f"Jacobi axiom violated: {which}", witness)
        self.which = which


class NotRegular(JacobiError):
    pass


class CodimOutOfRange(JacobiError):
    def __init__(self, q: int, n: int):
        super().__init__(f"codimension q={q} outside 0 < q < n={n}")
        self.q = q
        self.n = n


class NotContact(JacobiError):
    pass


class NotLCS(JacobiError):
    pass


class SingularFlat(JacobiError):
    pass


class SingularMatrix(JacobiError):
    pass


class RescaleVanishes(JacobiError):
    pass


class NotCodimOne(JacobiError):
    pass


class ParityObstruction(JacobiError):
    """Poissonization bridge rejected: LCS-type leaf parity cannot match."""


class InvariantFailure(JacobiError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    tier: str          # "symbolic" | "numeric"
    passed: bool
    witness: Optional[tuple] = None
    detail: str = ""


def _record(name: str, verdict: ZeroVerdict, detail: str = "") -> CheckResult:
    return CheckResult(name, verdict.tier, verdict.is_zero, verdict.witness, detail)


# --- element-level sampling helpers -----------------------------------------

def element_zero(el: GradedElement, sampler: Sampler) -> ZeroVerdict:
    """Zero test for a whole graded element (all coefficients jointly)."""
    if el.is_identically_zero:
        return ZeroVerdict("symbolic")
    coeffs = list(el.terms.values())
    for p, vals in sampler.valid_points(el.chart, coeffs):
        for v in vals:
            if abs(v) >= sampler.tol:
                return ZeroVerdict("nonzero", witness=p, value=v)
    return ZeroVerdict("numeric")


def element_pointwise_nonzero(el: GradedElement, sampler: Sampler):
    """Classify |el| at sample points: 'all', 'none', or ('mixed', witness)."""
    if el.is_identically_zero:
        return "none", None
    coeffs = list(el.terms.values())
    hits = misses = 0
    first_miss = first_hit = None
    for p, vals in sampler.valid_points(el.chart, coeffs):
        if max(abs(v) for v in vals) >= sampler.tol:
            hits += 1
            first_hit = first_hit or p
        else:
            misses += 1
            first_miss = first_miss or p
    if hits and misses:
        return "mixed", first_miss
    return ("all", None) if hits else ("none", None)


def _bivector_matrix_at(pi: MultiVector, env) -> np.ndarray:
    n = pi.chart.n
    mat = np.zeros((n, n))
    for mask, coeff in pi.terms.items():
        i, j = mask_indices(mask)
        v = evaluate(coeff, env)
        mat[i, j] = v
        mat[j, i] = -v
    return mat


def _vector_at(e: MultiVector, env) -> np.ndarray:
    n = e.chart.n
    vec = np.zeros(n)
    for mask, coeff in e.terms.items():
        (i,) = mask_indices(mask)
        vec[i] = evaluate(coeff, env)
    return vec


def _in_column_span(mat: np.ndarray, vec: np.ndarray, tol: float = 1e-7) -> bool:
    if np.allclose(vec, 0.0, atol=tol):
        return True
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    return bool(np.linalg.norm(mat @ sol - vec) <= tol * max(1.0, np.linalg.norm(vec)))


# --- verification and classification ------------------------------------------

@dataclass(frozen=True)
class JacobiStructure:
    chart: Chart
    pi: MultiVector
    E: MultiVector
    m: int
    kind: str  # "lcs" | "contact"
    q: int
    checks: Tuple[CheckResult, ...]

    @property
    def rank(self) -> int:
        return 2 * self.m + (1 if self.kind == "contact" else 0)


def verify_jacobi(ctx: VolumeContext, pi: MultiVector, E: MultiVector,
                  sampler: Sampler, enforce_codim: bool = True) -> JacobiStructure:
    """Check the axioms, compute the rank exponent m, classify, and return
    the structure.  Raises AxiomViolation / NotRegular / CodimOutOfRange."""
    chart = ctx.chart
    if pi.chart != chart or E.chart != chart:
        raise AlgebraError("chart mismatch")
    if (pi.terms and pi.grade != 2) or (E.terms and E.grade != 1):
        raise AlgebraError("expected a bivector and a vector field")
    checks: List[CheckResult] = []

    ax1 = element_zero(schouten(pi, pi) - wedge(E, pi).scale(2), sampler)
    checks.append(_record("jacobi.axiom1", ax1, "[pi,pi] - 2E^pi"))
    if not ax1.is_zero:
        raise AxiomViolation("[pi,pi] = 2E^pi", ax1.witness)
    ax2 = element_zero(schouten(pi, E), sampler)
    checks.append(_record("jacobi.axiom2", ax2, "[pi,E]"))
    if not ax2.is_zero:
        raise AxiomViolation("[pi,E] = 0", ax2.witness)

    # rank exponent: first m with pi^(m+1) = 0 in normal form
    m = 0
    pim = MultiVector.scalar(chart, 1)
    while True:
        nxt = wedge(pim, pi)
        if nxt.is_identically_zero:
            break
        pim = nxt
        m += 1
        if 2 * (m + 1) > chart.n:
            if not wedge(pim, pi).is_identically_zero:
                raise NotRegular("pi^k does not vanish below the dimension bound")
            break
    status, witness = element_pointwise_nonzero(pim, sampler)
    if status != "all":
        raise NotRegular(f"pi^{m} vanishes at a sample point", witness)

    top = wedge(pim, E)
    status, witness = element_pointwise_nonzero(top, sampler)
    if status == "mixed":
        raise NotRegular(f"pi^{m}^E changes rank across sample points", witness)
    if status == "all":
        kind = "contact"
        q = chart.n - 2 * m - 1
    else:
        kind = "lcs"
        q = chart.n - 2 * m
        if not E.is_identically_zero:
            coeffs = list(pi.terms.values()) + list(E.terms.values())
            for p, _ in sampler.valid_points(chart, coeffs):
                env = chart.env(p)
                if not _in_column_span(_bivector_matrix_at(pi, env), _vector_at(E, env)):
                    raise NotRegular("E leaves Im pi-sharp at a sample point", p)
    checks.append(CheckResult("jacobi.regular", "numeric", True,
                              detail=f"m={m} kind={kind}"))
    if enforce_codim and not (0 < q < chart.n):
        raise CodimOutOfRange(q, chart.n)
    checks.append(CheckResult("jacobi.codim", "symbolic", 0 < q < chart.n,
                              detail=f"q={q}"))
    return JacobiStructure(chart, pi, E, m, kind, q, tuple(checks))


# --- constructions from contact / LCS data ------------------------------------

def _det(mat: List[List[ScalarExpr]]) -> ScalarExpr:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    total = ScalarExpr.zero()
    for j in range(n):
        if mat[0][j].is_zero_form:
            continue
        minor = [[row[k] for k in range(n) if k != j] for row in mat[1:]]
        cof = mat[0][j] * _det(minor)
        total = total + (cof if j % 2 == 0 else -cof)
    return total


def _solve_cramer(mat: List[List[ScalarExpr]], rhs: List[ScalarExpr],
                  det: ScalarExpr) -> List[ScalarExpr]:
    n = len(mat)
    det_inv = det.recip()
    out = []
    for j in range(n):
        col = [[rhs[i] if k == j else mat[i][k] for k in range(n)] for i in range(n)]
        out.append(_det(col) * det_inv)
    return out


def contact_to_jacobi(chart: Chart, theta: DiffForm, sampler: Sampler
                      ) -> Tuple[MultiVector, MultiVector]:
    """Reeb field and bivector of a contact form; returns (pi, E).

    E solves d theta(E,-) = 0, theta(E) = 1 via the flat map
    b(X) = d theta(X,-) + theta(X) theta(-).  The bivector is the axiom-valid
    sign pi(a,b) = -d theta(b^-1 a, b^-1 b); the opposite sign satisfies
    [pi,pi] = -2E^pi instead and fails verification.
    """
    if chart.n % 2 == 0:
        raise NotContact("contact charts have odd dimension")
    if theta.grade != 1:
        raise NotContact("theta must be a 1-form")
    n = chart.n
    half = (n - 1) // 2
    dtheta = exterior_derivative(theta)
    topform = wedge(theta, power(dtheta, half))
    status, witness = element_pointwise_nonzero(topform, sampler)
    if status != "all":
        raise NotContact("theta ^ (d theta)^m vanishes at a sample point", witness)

    th = [theta.coefficient(1 << i) for i in range(n)]
    dth = [[dtheta.coefficient((1 << i) | (1 << j)) if i < j else ScalarExpr.zero()
            for j in range(n)] for i in range(n)]
    flat = [[(dth[i][j] if i < j else -dth[j][i] if j < i else ScalarExpr.zero())
             + th[i] * th[j] for j in range(n)] for i in range(n)]
    det = _det(flat)
    if det.is_zero_form:
        raise SingularFlat("flat matrix has zero determinant in normal form")
    flat_t = [[flat[j][i] for j in range(n)] for i in range(n)]
    e_comp = _solve_cramer(flat_t, th, det)
    E = MultiVector(chart, 1, {1 << i: c for i, c in enumerate(e_comp)})
    inv_cols = [_solve_cramer(flat_t, [ScalarExpr.const(1 if r == k else 0)
                                       for r in range(n)], det) for k in range(n)]

    def pair_dtheta(u, v):
        acc = ScalarExpr.zero()
        for i in range(n):
            for j in range(i + 1, n):
                acc = acc + dth[i][j] * (u[i] * v[j] - u[j] * v[i])
        return acc

    terms: Dict[int, ScalarExpr] = {}
    for i in range(n):
        for j in range(i + 1, n):
            c = -pair_dtheta(inv_cols[i], inv_cols[j])
            if not c.is_zero_form:
                terms[(1 << i) | (1 << j)] = c
    return MultiVector(chart, 2, terms), E


def lcs_to_jacobi(chart: Chart, omega1: DiffForm, omega2: DiffForm,
                  sampler: Sampler) -> Tuple[MultiVector, MultiVector]:
    """(pi, E) of a locally conformal symplectic pair (omega1 = the closed
    1-form, omega2 = the nondegenerate 2-form).  Sign pinned by
    iota_{pi-sharp(a)} omega2 = -a together with the axioms."""
    n = chart.n
    if n % 2 != 0:
        raise NotLCS("LCS charts have even dimension")
    if (omega1.terms and omega1.grade != 1) or omega2.grade != 2:
        raise NotLCS("expected a 1-form and a 2-form")
    v1 = element_zero(exterior_derivative(omega1), sampler)
    if not v1.is_zero:
        raise NotLCS("d omega = 0 fails", v1.witness)
    v2 = element_zero(exterior_derivative(omega2) - wedge(omega1, omega2), sampler)
    if not v2.is_zero:
        raise NotLCS("d Omega = omega ^ Omega fails", v2.witness)
    status, witness = element_pointwise_nonzero(power(omega2, n // 2), sampler)
    if status != "all":
        raise NotLCS("Omega^(n/2) vanishes at a sample point", witness)

    w = [[omega2.coefficient((1 << i) | (1 << j)) if i < j else ScalarExpr.zero()
          for j in range(n)] for i in range(n)]
    full = [[w[i][j] if i < j else (-w[j][i] if j < i else ScalarExpr.zero())
             for j in range(n)] for i in range(n)]
    det = _det(full)
    if det.is_zero_form:
        raise SingularMatrix("Omega coefficient matrix is singular in normal form")
    om = [omega1.coefficient(1 << i) for i in range(n)]
    inv_cols = [_solve_cramer(full, [ScalarExpr.const(1 if r == k else 0)
                                     for r in range(n)], det) for k in range(n)]
    # E = W^-1 omega ; pi matrix C = -W^-1
    e_comp = [sum((inv_cols[k][i] * om[k] for k in range(n)), ScalarExpr.zero())
              for i in range(n)]
    E = MultiVector(chart, 1, {1 << i: c for i, c in enumerate(e_comp)})
    terms: Dict[int, ScalarExpr] = {}
    for i in range(n):
        for j in range(i + 1, n):
            c = -inv_cols[j][i]  # (W^-1)[i][j] = inv_cols[j][i]
            if not c.is_zero_form:
                terms[(1 << i) | (1 << j)] = c
    return MultiVector(chart, 2, terms), E


# --- defining pairs and the GV representative ---------------------------------

@dataclass(frozen=True)
class DefiningPair:
    alpha: DiffForm
    beta: DiffForm
    q: int
    gv: DiffForm
    companion_used: StarCompanion
    checks: Tuple[CheckResult, ...]


def _foliation_top(j: JacobiStructure) -> MultiVector:
    p = power(j.pi, j.m)
    return wedge(p, j.E) if j.kind == "contact" else p


def _bracket_multivector(j: JacobiStructure, comp: StarCompanion) -> MultiVector:
    # beta = phi([-*P, P]) for BOTH kinds: with the bracket conventions fixed
    # by [pi,pi] = 2E^pi, the contact case needs the same leading minus as
    # the LCS case (d alpha = beta ^ alpha pins it; the pair invariants and
    # the iota_beta P = psi(P) reduction both fail under the opposite sign).
    return -schouten(comp.companion, _foliation_top(j))


def defining_pair(j: JacobiStructure, ctx: VolumeContext, sampler: Sampler,
                  star_choice: int = 0) -> DefiningPair:
    """Construct (alpha, beta) and gv = beta ^ (d beta)^q, verifying
    d alpha = beta ^ alpha, d gv = 0, and the contraction rewriting of gv."""
    if not (0 < j.q < j.chart.n):
        raise CodimOutOfRange(j.q, j.chart.n)
    p = _foliation_top(j)
    comp = star(ctx, p, sampler, choice=star_choice)
    w = _bracket_multivector(j, comp)
    beta = phi(ctx, w)
    alpha = phi(ctx, p).scale(Fraction(1, math.factorial(j.m)))
    dbeta = exterior_derivative(beta)
    dbq = power(dbeta, j.q)
    gv = wedge(beta, dbq)

    checks = []
    v = element_zero(exterior_derivative(alpha) - wedge(beta, alpha), sampler)
    checks.append(_record("pair.defining", v, "d alpha = beta ^ alpha"))
    if not v.is_zero:
        raise InvariantFailure("d alpha != beta ^ alpha", v.witness)
    v = element_zero(exterior_derivative(gv), sampler)
    checks.append(_record("pair.gv_closed", v, "d(beta ^ (d beta)^q) = 0"))
    if not v.is_zero:
        raise InvariantFailure("gv representative is not closed", v.witness)
    rewritten = phi(ctx, contract_form_into_mv(dbq, phi_inv(ctx, beta))) \
        if dbq.grade <= j.chart.n - 1 else DiffForm.zero(j.chart, gv.grade)
    v = element_zero(gv - rewritten, sampler)
    checks.append(_record("pair.gv_rewrite", v, "gv = phi(iota_{(d beta)^q} phi^-1(beta))"))
    if not v.is_zero:
        raise InvariantFailure("gv contraction rewrite failed", v.witness)
    return DefiningPair(alpha, beta, j.q, gv, comp, tuple(checks))


def gv_representative(j: JacobiStructure, ctx: VolumeContext, sampler: Sampler,
                      star_choice: int = 0) -> DiffForm:
    return defining_pair(j, ctx, sampler, star_choice).gv


def gv_codim1(j: JacobiStructure, ctx: VolumeContext, sampler: Sampler) -> DiffForm:
    """Codimension-1 shortcut phi(+-iota_beta psi(W)); cross-checked against
    the generic representative before returning."""
    if j.q != 1:
        raise NotCodimOne(f"codimension is {j.q}, not 1")
    p = _foliation_top(j)
    comp = star(ctx, p, sampler)
    w = _bracket_multivector(j, comp)
    beta = phi(ctx, w)
    sign = 1 if j.chart.n % 2 == 1 else -1  # (-1)^(n+1)
    inner = contract_form_into_mv(beta, psi(ctx, w))
    result = phi(ctx, inner).scale(sign)
    generic = defining_pair(j, ctx, sampler).gv
    v = element_zero(result - generic, sampler)
    if not v.is_zero:
        raise InvariantFailure("codim-1 formula disagrees with beta^(d beta)^q",
                               v.witness)
    return result


# --- Poissonization -------------------------------------------------------------

@dataclass(frozen=True)
class Poissonization:
    chart: Chart           # base chart + distinguished positive variable
    t_name: str
    lam: MultiVector
    source: JacobiStructure
    poisson_check: CheckResult

    @property
    def base_vars(self) -> Tuple[str, ...]:
        return self.source.chart.vars


def _fresh_t(chart: Chart) -> str:
    name = "t"
    while name in chart.vars:
        name += "_"
    return name


def lift_to(chart_ext: Chart, el: GradedElement) -> GradedElement:
    """Reinterpret a base-chart element on the extended chart (pure pullback:
    the new variable is appended last, so index masks are unchanged)."""
    return type(el)(chart_ext, el.grade, dict(el.terms))


def poissonize(j: JacobiStructure, sampler: Sampler) -> Poissonization:
    """Poisson bivector t^-1 pi + E ^ d/dt on chart x (0, inf)."""
    t = _fresh_t(j.chart)
    ext = j.chart.extend(t, positive=True)
    t_inv = ScalarExpr.var(t) ** -1
    pi_l = lift_to(ext, j.pi)
    e_l = lift_to(ext, j.E)
    dt_mv = MultiVector.basis(ext, [ext.n - 1])
    lam = pi_l.scale(t_inv) + wedge(e_l, dt_mv)
    verdict = element_zero(schouten(lam, lam), sampler)
    chk = _record("poissonization.poisson", verdict, "[Lambda,Lambda] = 0")
    if not verdict.is_zero:
        raise InvariantFailure("[Lambda,Lambda] != 0 (kernel bug)", verdict.witness)
    return Poissonization(ext, t, lam, j, chk)


@dataclass(frozen=True)
class BridgeReport:
    pz: Poissonization
    A: DiffForm
    B: DiffForm
    base_beta: DiffForm
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def check_poissonization_bridge(j: JacobiStructure, ctx: VolumeContext,
                                sampler: Sampler) -> BridgeReport:
    """Pull the Poissonization's defining 1-form B back against the base beta.

    For contact type the symplectic foliation of the Poissonization is the
    pullback foliation, and with the star companion on the extended chart
    seeded from the base companion,

        B = (-1)^(q+1) pr^*(beta) - m t^-1 dt

    for the beta returned by defining_pair.  The trailing term is
    d log t^-m, a defining-pair gauge: A differs from pr^* alpha by the
    factor +-t^-m, so the two pairs present the same Godbillon-Vey data.
    (The bare equality without the gauge term only holds when m = 0.)
    """
    if j.kind != "contact":
        raise ParityObstruction(
            "LCS-type leaves are even-dimensional; the symplectic foliation "
            "of the Poissonization has odd pullback rank and cannot match")
    dp = defining_pair(j, ctx, sampler)
    pz = poissonize(j, sampler)
    ext = pz.chart
    t_idx = ext.n - 1
    t_inv = ScalarExpr.var(pz.t_name) ** -1
    vol_ext = DiffForm(ext, ext.n, {(1 << ext.n) - 1: ctx.rho})
    ctx_ext = volume_context(ext, vol_ext, sampler)
    m = j.m

    checks: List[CheckResult] = []
    lam_m1 = power(pz.lam, m + 1)
    expected = wedge(wedge(power(lift_to(ext, j.pi), m), lift_to(ext, j.E)),
                     MultiVector.basis(ext, [t_idx])).scale(
                         ScalarExpr.const(m + 1) * t_inv ** m)
    v = element_zero(lam_m1 - expected, sampler)
    checks.append(_record("bridge.power", v,
                          "Lambda^(m+1) = (m+1) t^-m pi^m ^ E ^ dt"))
    v = element_zero(power(pz.lam, m + 2), sampler)
    checks.append(_record("bridge.power_top", v, "Lambda^(m+2) = 0"))

    comp_ext = star(ctx_ext, lam_m1, sampler,
                    force_complement=dp.companion_used.complement_mask)
    b_form = phi(ctx_ext, -schouten(comp_ext.companion, lam_m1))
    a_form = phi(ctx_ext, lam_m1).scale(Fraction(1, math.factorial(m + 1)))
    v = element_zero(exterior_derivative(a_form) - wedge(b_form, a_form), sampler)
    checks.append(_record("bridge.pair", v, "dA = B ^ A on the Poissonization"))

    sign = 1 if j.q % 2 == 1 else -1  # (-1)^(q+1)
    pulled = lift_to(ext, dp.beta).scale(sign)
    gauge = DiffForm.basis(ext, [t_idx], ScalarExpr.const(-m) * t_inv)
    v = element_zero(b_form - (pulled + gauge), sampler)
    checks.append(_record("bridge.prop53", v,
                          "B = (-1)^(q+1) pr*(beta) - m t^-1 dt"))

    expected_rank = 2 * m + 2
    coeffs = list(pz.lam.terms.values())
    rank_ok, rank_witness = True, None
    for p, _ in sampler.valid_points(ext, coeffs):
        r = int(np.linalg.matrix_rank(_bivector_matrix_at(pz.lam, ext.env(p)),
                                      tol=1e-8))
        if r != expected_rank:
            rank_ok, rank_witness = False, p
            break
    checks.append(CheckResult("bridge.rank", "numeric", rank_ok, rank_witness,
                              f"rank Lambda-sharp = {expected_rank}"))
    return BridgeReport(pz, a_form, b_form, dp.beta, tuple(checks))


# --- conformal rescaling and unimodularity ---------------------------------------

@dataclass(frozen=True)
class RescaleResult:
    structure: JacobiStructure
    checks: Tuple[CheckResult, ...]


def conformal_rescale(j: JacobiStructure, a: ScalarExpr, ctx: VolumeContext,
                      sampler: Sampler) -> RescaleResult:
    """(pi, E) -> (a pi, a E - iota_{da} pi) for nonvanishing a.

    The contraction enters with a minus sign: expanding [a pi, a pi] with the
    Leibniz rule gives -2a (iota_{da} pi)^pi + a^2 [pi,pi], so the axiom
    [pi',pi'] = 2E'^pi' forces E' = aE - iota_{da} pi.
    """
    ok, witness = is_nonvanishing(a, j.chart, sampler)
    if not ok:
        raise RescaleVanishes("conformal factor vanishes near a sample point",
                              witness)
    da = exterior_derivative(DiffForm.scalar(j.chart, a))
    pi2 = j.pi.scale(a)
    e2 = j.E.scale(a) - (contract_form_into_mv(da, j.pi)
                         if not (da.is_identically_zero or j.pi.is_identically_zero)
                         else MultiVector.zero(j.chart, 1))
    j2 = verify_jacobi(ctx, pi2, e2, sampler,
                       enforce_codim=(0 < j.q < j.chart.n))
    checks = list(j2.checks)
    same = j2.m == j.m and j2.kind == j.kind and j2.q == j.q
    checks.append(CheckResult("rescale.invariants", "symbolic", same,
                              detail=f"m {j.m}->{j2.m}, kind {j.kind}->{j2.kind}"))
    if not same:
        raise InvariantFailure("conformal rescale changed (m, kind, q)")

    span_ok, span_witness = True, None
    coeffs = (list(j.pi.terms.values()) + list(j.E.terms.values())
              + list(pi2.terms.values()) + list(e2.terms.values()) + [a])
    for p, _ in sampler.valid_points(j.chart, coeffs):
        env = j.chart.env(p)
        cols1 = np.column_stack([_bivector_matrix_at(j.pi, env),
                                 _vector_at(j.E, env)])
        cols2 = np.column_stack([_bivector_matrix_at(pi2, env),
                                 _vector_at(e2, env)])
        r1 = np.linalg.matrix_rank(cols1, tol=1e-8)
        r2 = np.linalg.matrix_rank(cols2, tol=1e-8)
        r12 = np.linalg.matrix_rank(np.column_stack([cols1, cols2]), tol=1e-8)
        if not (r1 == r2 == r12):
            span_ok, span_witness = False, p
            break
    checks.append(CheckResult("rescale.distribution", "numeric", span_ok,
                              span_witness, "Im pi-sharp + <E> unchanged"))
    if not span_ok:
        raise InvariantFailure("conformal rescale moved the foliation",
                               span_witness)
    return RescaleResult(j2, tuple(checks))


@dataclass(frozen=True)
class UnimodularityResult:
    unimodular: bool
    verdict: ZeroVerdict
    psi_value: MultiVector


def unimodularity(ctx: VolumeContext, u: MultiVector,
                  sampler: Sampler) -> UnimodularityResult:
    """psi(U) = 0 test with the psi(U) expression as certificate."""
    value = psi(ctx, u)
    verdict = element_zero(value, sampler)
    return UnimodularityResult(verdict.is_zero, verdict, value)
