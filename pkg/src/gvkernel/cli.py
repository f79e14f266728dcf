"""Command-line front end: run a problem file or a registry fixture and emit
a verification report.

Exit codes: 0 all requested checks passed, 1 at least one check failed,
2 the input could not be parsed or set up.  Structured output is one
`check=<name> tier=<tier> verdict=<pass|fail> [witness=(...)]` line per
record and is byte-identical across runs with the same seed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import jacobi
from .alg import DiffForm, MultiVector
from .dsl import DslError, ProblemFile, parse_multivector, parse_problem, parse_scalar
from .duality import NoCompanion, VolumeError, volume_context
from .expr import ExprError, Sampler
from .fixtures import FIXTURE_NAMES, Fixture, get_fixture
from .jacobi import CheckResult, JacobiError, JacobiStructure


@dataclass
class Report:
    records: List[CheckResult] = field(default_factory=list)
    printouts: Dict[str, str] = field(default_factory=dict)
    input_error: Optional[str] = None

    @property
    def exit_status(self) -> int:
        if self.input_error is not None:
            return 2
        return 0 if all(r.passed for r in self.records) else 1


def _fmt_witness(w) -> str:
    return "(" + ",".join(str(float(c)) for c in w) + ")"


def emit(report: Report, fmt: str = "text") -> str:
    if fmt == "structured":
        lines = []
        for r in report.records:
            line = f"check={r.name} tier={r.tier} verdict={'pass' if r.passed else 'fail'}"
            if r.witness is not None:
                line += f" witness={_fmt_witness(r.witness)}"
            lines.append(line)
        return "\n".join(lines) + ("\n" if lines else "")
    out = []
    if report.input_error is not None:
        out.append(f"input error: {report.input_error}")
    for r in report.records:
        mark = "ok " if r.passed else "FAIL"
        line = f"[{mark}] {r.name:24s} tier={r.tier:8s}"
        if r.detail:
            line += f"  {r.detail}"
        if r.witness is not None:
            line += f"  witness={_fmt_witness(r.witness)}"
        out.append(line)
    for key, val in report.printouts.items():
        out.append(f"{key} = {val}")
    if report.records:
        n_bad = sum(not r.passed for r in report.records)
        out.append(f"{len(report.records)} checks, {n_bad} failed")
    return "\n".join(out) + ("\n" if out else "")


class _Session:
    """Executes a problem file's command list against the kernel."""

    def __init__(self, problem: ProblemFile, sampler: Sampler):
        self.problem = problem
        self.sampler = sampler
        self.report = Report()
        self.chart = problem.chart
        vol = problem.vol if problem.vol is not None else \
            DiffForm.basis(self.chart, range(self.chart.n))
        self.ctx = volume_context(self.chart, vol, sampler)
        self.pi: Optional[MultiVector] = None
        self.E: Optional[MultiVector] = None
        self._strict: Optional[JacobiStructure] = None
        self._relaxed: Optional[JacobiStructure] = None

    # tensor acquisition ----------------------------------------------------
    def tensors(self) -> Tuple[MultiVector, MultiVector]:
        if self.pi is not None:
            return self.pi, self.E
        p = self.problem
        if p.style == "pi":
            self.pi, self.E = p.pi, p.E
        elif p.style == "theta":
            pi, E = jacobi.contact_to_jacobi(self.chart, p.theta, self.sampler)
            self.report.records.append(CheckResult(
                "input.contact", "numeric", True, detail="theta -> (pi, E)"))
            self.report.printouts.setdefault("pi", str(pi))
            self.report.printouts.setdefault("E", str(E))
            self.pi, self.E = pi, E
        else:
            pi, E = jacobi.lcs_to_jacobi(self.chart, p.omega1, p.omega2,
                                         self.sampler)
            self.report.records.append(CheckResult(
                "input.lcs", "numeric", True, detail="(omega, Omega) -> (pi, E)"))
            self.report.printouts.setdefault("pi", str(pi))
            self.report.printouts.setdefault("E", str(E))
            self.pi, self.E = pi, E
        return self.pi, self.E

    def structure(self, strict: bool) -> JacobiStructure:
        cached = self._strict if strict else self._relaxed
        if cached is not None:
            return cached
        pi, e = self.tensors()
        j = jacobi.verify_jacobi(self.ctx, pi, e, self.sampler,
                                 enforce_codim=strict)
        if strict:
            self._strict = j
        else:
            self._relaxed = j
        return j

    # commands ----------------------------------------------------------------
    def run(self) -> Report:
        for name, arg in self.problem.commands:
            try:
                getattr(self, f"cmd_{name}")(arg)
            except (JacobiError, NoCompanion) as e:
                witness = getattr(e, "witness", None)
                self.report.records.append(CheckResult(
                    f"{name}.error", "numeric", False, witness,
                    f"{type(e).__name__}: {e}"))
                break  # hard error: later commands depend on this one
        return self.report

    def cmd_verify(self, arg):
        j = self.structure(strict=True)
        self.report.records.extend(j.checks)

    def cmd_pair(self, arg):
        j = self.structure(strict=True)
        dp = jacobi.defining_pair(j, self.ctx, self.sampler)
        self.report.records.extend(dp.checks)
        self.report.printouts["alpha"] = str(dp.alpha)
        self.report.printouts["beta"] = str(dp.beta)
        self.report.printouts["gv"] = str(dp.gv)

    def cmd_gv(self, arg):
        j = self.structure(strict=True)
        dp = jacobi.defining_pair(j, self.ctx, self.sampler)
        self.report.records.append(next(c for c in dp.checks
                                        if c.name == "pair.gv_closed"))
        self.report.printouts["gv"] = str(dp.gv)

    def cmd_codim1(self, arg):
        j = self.structure(strict=True)
        g = jacobi.gv_codim1(j, self.ctx, self.sampler)
        self.report.records.append(CheckResult(
            "codim1.match", "symbolic", True,
            detail="codim-1 formula agrees with beta^(d beta)^q"))
        self.report.printouts["gv_codim1"] = str(g)

    def cmd_poissonize(self, arg):
        j = self.structure(strict=False)
        pz = jacobi.poissonize(j, self.sampler)
        self.report.records.append(pz.poisson_check)
        self.report.printouts["Lambda"] = str(pz.lam)

    def cmd_bridge(self, arg):
        j = self.structure(strict=True)
        br = jacobi.check_poissonization_bridge(j, self.ctx, self.sampler)
        self.report.records.extend(br.checks)
        self.report.printouts["A"] = str(br.A)
        self.report.printouts["B"] = str(br.B)

    def cmd_rescale(self, arg):
        j = self.structure(strict=True)
        try:
            a = parse_scalar(self.chart, arg)
        except DslError as e:
            raise jacobi.JacobiError(f"bad rescale argument: {e}") from None
        rr = jacobi.conformal_rescale(j, a, self.ctx, self.sampler)
        self.report.records.extend(
            CheckResult(f"rescale.{c.name}" if not c.name.startswith("rescale")
                        else c.name, c.tier, c.passed, c.witness, c.detail)
            for c in rr.checks)

    def cmd_unimodular(self, arg):
        try:
            u = parse_multivector(self.chart, arg)
        except DslError as e:
            raise jacobi.JacobiError(f"bad unimodular argument: {e}") from None
        res = jacobi.unimodularity(self.ctx, u, self.sampler)
        self.report.records.append(CheckResult(
            "unimodular.psi", res.verdict.tier, res.unimodular,
            res.verdict.witness, f"psi = {res.psi_value}"))
        self.report.printouts["psi"] = str(res.psi_value)


def execute(problem: ProblemFile, seed: Optional[int] = None,
            points: Optional[int] = None, tol: Optional[float] = None) -> Report:
    """Run a parsed problem; CLI flags override per-file settings."""
    sampler = Sampler(seed=problem.seed if seed is None else seed,
                      points=problem.points if points is None else points,
                      tol=problem.tol if tol is None else tol)
    try:
        session = _Session(problem, sampler)
    except (VolumeError, ExprError) as e:
        report = Report()
        report.input_error = str(e)
        return report
    return session.run()


def fixture_problem(fixture: Fixture) -> ProblemFile:
    """Registry fixture as a problem file (through the DSL for round-tripping)."""
    lines = [f"# fixture: {fixture.name}",
             f"chart {' '.join(fixture.chart.vars)}",
             f"vol {fixture.vol}",
             f"pi = {fixture.pi}"]
    if not fixture.E.is_identically_zero:
        lines.append(f"E = {fixture.E}")
    lines.append("run " + " ".join(fixture.commands))
    return parse_problem("\n".join(lines) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="gvkernel",
        description="Verify Jacobi structures and compute Godbillon-Vey "
                    "representatives on a chart.")
    ap.add_argument("file", nargs="?", help="problem file (DSL)")
    ap.add_argument("--fixture", choices=FIXTURE_NAMES,
                    help="run a built-in fixture instead of a file")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--points", type=int, default=None)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--format", choices=("text", "structured"), default="text")
    args = ap.parse_args(argv)

    if (args.file is None) == (args.fixture is None):
        ap.print_usage(sys.stderr)
        print("gvkernel: need exactly one of <file> or --fixture", file=sys.stderr)
        return 2
    try:
        if args.fixture:
            problem = fixture_problem(get_fixture(args.fixture))
        else:
            with open(args.file, encoding="utf-8") as fh:
                problem = parse_problem(fh.read())
    except (DslError, ExprError, OSError) as e:
        print(f"gvkernel: {e}", file=sys.stderr)
        return 2
    report = execute(problem, seed=args.seed, points=args.points, tol=args.tol)
    sys.stdout.write(emit(report, args.format))
    if report.input_error is not None:
        print(f"gvkernel: {report.input_error}", file=sys.stderr)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
