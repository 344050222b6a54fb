"""Case configuration files and the CSV reports built from them.

Configuration format
--------------------
Flat UTF-8 ``key = value`` lines; ``#`` starts a comment; a key given more
than once forms a list.  Recognised keys::

    case_name     identifier used in output file names
    problem       1..6, or an explicit triple
                  ``k=<int>; aggregation=<none|constant>; initial=<expr>``
    n_terms       series truncation(s) n (repeatable)
    t_values      evaluation times (repeatable)
    u_min, u_max, u_step   evaluation grid in u
    r_value       monodisperse radius (problems with delta initial data)
    outputs       density | error_table | moments | oracle_compare (repeatable)
    oracle_u_max, oracle_cells, oracle_dt   grid-solver settings (optional)

``<expr>`` is a sum of terms ``c*u^p*exp(-a*u)`` (any factor optional, ``c``
may be a fraction) or ``c*delta(u-r)``.

CSV conventions: comma separated, ``\\n`` line endings, one header row per
section, numbers in ``%.16e`` (17 significant digits).  Extra sections are
preceded by a blank line and a ``# <section>`` line; ``#`` lines also carry
metadata such as the error metric.
"""
from __future__ import annotations

import io
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import algebra as alg
from . import engine, exact, oracle
from .algebra import DIRAC, ONE, Expr
from .engine import Aggregation, ProblemSpec
from .errors import ConfigError, NoExactSolution, UnsupportedClass

OUTPUTS = ("density", "error_table", "moments", "oracle_compare")
LIST_KEYS = ("n_terms", "t_values", "outputs")
SCALAR_KEYS = ("case_name", "problem", "u_min", "u_max", "u_step", "r_value",
               "oracle_u_max", "oracle_cells", "oracle_dt")


@dataclass(frozen=True)
class ExplicitProblem:
    selection_power: int
    aggregation: Aggregation
    initial: Expr


@dataclass(frozen=True)
class CaseConfig:
    case_name: str
    problem: Union[int, ExplicitProblem]
    n_terms: Tuple[int, ...]
    t_values: Tuple[float, ...] = ()
    u_min: float = 0.01
    u_max: float = 10.0
    u_step: float = 0.01
    r_value: Optional[float] = None
    outputs: Tuple[str, ...] = ("density",)
    oracle_u_max: float = 20.0
    oracle_cells: int = 2000
    oracle_dt: float = 1e-3

    def spec(self) -> ProblemSpec:
        if isinstance(self.problem, int):
            return engine.example_spec(self.problem)
        p = self.problem
        return ProblemSpec(p.selection_power, p.initial, p.aggregation,
                           has_radius=p.initial.references_r, name=self.case_name)

    @property
    def needs_radius(self) -> bool:
        if isinstance(self.problem, int):
            return self.problem in (3, 4)
        return self.problem.initial.references_r

    @property
    def exact_case(self) -> Optional[exact.ExactCase]:
        if isinstance(self.problem, int) and self.problem in (1, 2, 3, 4):
            return exact.ExactCase(self.problem, self.r_value)
        return None

    def u_grid(self) -> List[Fraction]:
        """Evaluation points ``u_min, u_min + u_step, ... <= u_max`` as exact rationals."""
        lo, hi, step = (Fraction(str(x)) for x in (self.u_min, self.u_max, self.u_step))
        count = int((hi - lo) / step + Fraction(1, 10 ** 9)) + 1
        return [lo + i * step for i in range(count)]


# --------------------------------------------------------------------------
# initial-condition expressions
# --------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"^(?P<coeff>\d+(?:/\d+)?|\d*\.\d+)?"
    r"(?:\*?(?P<u>u)(?:\^(?P<upow>\d+))?)?"
    r"(?:\*?(?P<exp>exp)\(-(?:(?P<rate>\d+(?:/\d+)?|\d*\.\d+)\*?)?u\))?"
    r"(?:\*?(?P<delta>delta\(u-r\)))?$"
)


def parse_initial(text: str) -> Expr:
    """Parse ``4*u^1*exp(-2*u) + 1/2*delta(u-r)``-style sums."""
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty initial expression")
    terms = []
    pieces, depth, start = [], 0, 0
    for i, ch in enumerate(src):
        depth += (ch == "(") - (ch == ")")
        if ch in "+-" and depth == 0 and i > start:
            pieces.append(src[start:i])
            start = i
    pieces.append(src[start:])
    for piece in pieces:
        sign = -1 if piece.startswith("-") else 1
        body = piece.lstrip("+-")
        m = _TERM_RE.match(body)
        if not m or not body:
            raise ValueError(f"cannot parse term {piece!r}")
        coeff = Fraction(m["coeff"]) if m["coeff"] else Fraction(1)
        upow = int(m["upow"]) if m["upow"] else (1 if m["u"] else 0)
        rate = Fraction(m["rate"] or 1) if m["exp"] else Fraction(0)
        dist = DIRAC if m["delta"] else ONE
        terms.append(alg.Term(sign * coeff, 0, upow, 0, rate, dist))
    return alg.normalize(terms)


def format_initial(expr: Expr) -> str:
    parts = []
    for term in expr.terms:
        if term.t_pow or term.r_pow or term.dist is alg.THETA:
            raise ValueError("initial data may only contain u-powers, exponentials and delta")
        s = f"{term.coeff}"
        if term.u_pow:
            s += f"*u^{term.u_pow}"
        if term.exp_rate:
            s += f"*exp(-{term.exp_rate}*u)"
        if term.dist is DIRAC:
            s += "*delta(u-r)"
        parts.append(s)
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def _parse_problem(value: str, line: int) -> Union[int, ExplicitProblem]:
    value = value.strip()
    if re.fullmatch(r"\d+", value):
        pid = int(value)
        if not 1 <= pid <= 6:
            raise ConfigError(f"example id must be 1..6, got {pid}", line, "problem")
        return pid
    fields = {}
    for part in value.split(";"):
        if "=" not in part:
            raise ConfigError(f"expected k=..; aggregation=..; initial=.., got {value!r}", line, "problem")
        key, val = part.split("=", 1)
        fields[key.strip()] = val.strip()
    if set(fields) != {"k", "aggregation", "initial"}:
        raise ConfigError("explicit problem needs exactly k, aggregation and initial", line, "problem")
    try:
        k = int(fields["k"])
        agg = Aggregation(fields["aggregation"])
        init = parse_initial(fields["initial"])
    except ValueError as exc:
        raise ConfigError(str(exc), line, "problem") from None
    if k < 1:
        raise ConfigError("k must be a positive integer", line, "problem")
    return ExplicitProblem(k, agg, init)


def _format_problem(problem) -> str:
    if isinstance(problem, int):
        return str(problem)
    return (f"k={problem.selection_power}; aggregation={problem.aggregation.value}; "
            f"initial={format_initial(problem.initial)}")


def parse_config(text: str) -> CaseConfig:
    """Parse configuration text; raises :class:`ConfigError` with line/field."""
    raw: Dict[str, List[Tuple[str, int]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in LIST_KEYS + SCALAR_KEYS:
            raise ConfigError("unknown key", lineno, key)
        if key in SCALAR_KEYS and key in raw:
            raise ConfigError("key given more than once", lineno, key)
        raw.setdefault(key, []).append((value, lineno))

    def scalar(key, conv, default=None, required=False):
        if key not in raw:
            if required:
                raise ConfigError("missing required key", None, key)
            return default
        value, lineno = raw[key][0]
        try:
            return conv(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"invalid value {value!r}", lineno, key) from None

    def listed(key, conv):
        out = []
        for value, lineno in raw.get(key, []):
            try:
                out.append(conv(value))
            except ValueError:
                raise ConfigError(f"invalid value {value!r}", lineno, key) from None
        return tuple(out)

    if "problem" not in raw:
        raise ConfigError("missing required key", None, "problem")
    problem_value, problem_line = raw["problem"][0]
    problem = _parse_problem(problem_value, problem_line)
    cfg = CaseConfig(
        case_name=scalar("case_name", str, default=f"case{problem}" if isinstance(problem, int) else "custom"),
        problem=problem,
        n_terms=listed("n_terms", int),
        t_values=listed("t_values", float),
        u_min=scalar("u_min", float, 0.01),
        u_max=scalar("u_max", float, 10.0),
        u_step=scalar("u_step", float, 0.01),
        r_value=scalar("r_value", float),
        outputs=listed("outputs", str),
        oracle_u_max=scalar("oracle_u_max", float, 20.0),
        oracle_cells=scalar("oracle_cells", int, 2000),
        oracle_dt=scalar("oracle_dt", float, 1e-3),
    )
    _validate(cfg, raw)
    return cfg


def _validate(cfg: CaseConfig, raw) -> None:
    def where(key):
        return raw[key][0][1] if key in raw else None

    if not re.fullmatch(r"[A-Za-z0-9_.-]+", cfg.case_name):
        raise ConfigError("case_name must be a plain identifier", where("case_name"), "case_name")
    if not cfg.n_terms:
        raise ConfigError("at least one n_terms value is required", None, "n_terms")
    for (value, lineno), n in zip(raw["n_terms"], cfg.n_terms):
        if n < 1:
            raise ConfigError("n_terms must be positive", lineno, "n_terms")
    for (value, lineno), t in zip(raw.get("t_values", []), cfg.t_values):
        if not t >= 0:
            raise ConfigError("t_values must be nonnegative", lineno, "t_values")
    for (value, lineno), out in zip(raw.get("outputs", []), cfg.outputs):
        if out not in OUTPUTS:
            raise ConfigError(f"unknown output {out!r}; choose from {', '.join(OUTPUTS)}", lineno, "outputs")
    if not cfg.u_step > 0:
        raise ConfigError("u_step must be positive", where("u_step"), "u_step")
    if not cfg.u_max > cfg.u_min:
        raise ConfigError("u_max must exceed u_min", where("u_max"), "u_max")
    if cfg.needs_radius:
        if cfg.r_value is None:
            raise ConfigError("problem references r; r_value is required", where("problem"), "r_value")
        if not cfg.r_value > 0:
            raise ConfigError("r_value must be positive", where("r_value"), "r_value")
        if not cfg.u_min > 0:
            raise ConfigError("u_min must be positive for delta initial data", where("u_min"), "u_min")
    elif cfg.r_value is not None:
        raise ConfigError("r_value given but the problem does not reference r", where("r_value"), "r_value")
    elif cfg.u_min < 0:
        raise ConfigError("u_min must be nonnegative", where("u_min"), "u_min")
    if cfg.oracle_cells < 1 or not cfg.oracle_dt > 0 or not cfg.oracle_u_max > 0:
        raise ConfigError("invalid oracle settings", None, "oracle_cells")


def emit_config(cfg: CaseConfig) -> str:
    """Inverse of :func:`parse_config`."""
    lines = [f"case_name = {cfg.case_name}", f"problem = {_format_problem(cfg.problem)}"]
    lines += [f"n_terms = {n}" for n in cfg.n_terms]
    lines += [f"t_values = {t!r}" for t in cfg.t_values]
    lines += [f"u_min = {cfg.u_min!r}", f"u_max = {cfg.u_max!r}", f"u_step = {cfg.u_step!r}"]
    if cfg.r_value is not None:
        lines.append(f"r_value = {cfg.r_value!r}")
    lines += [f"outputs = {o}" for o in cfg.outputs]
    lines += [f"oracle_u_max = {cfg.oracle_u_max!r}", f"oracle_cells = {cfg.oracle_cells}",
              f"oracle_dt = {cfg.oracle_dt!r}"]
    return "\n".join(lines) + "\n"


def canonical_config(example_id: int) -> CaseConfig:
    """Configuration reproducing the tables and figures of test case 1..6."""
    name = f"example{example_id}"
    if example_id == 1:
        return CaseConfig(name, 1, (10, 15, 20, 25, 100), (0.4, 0.8, 0.9, 1.2, 1.6),
                          outputs=("density", "error_table", "moments"))
    if example_id == 2:
        return CaseConfig(name, 2, (10, 15, 20, 25), (0.01, 0.04, 0.07, 0.1),
                          outputs=("density", "error_table", "moments"))
    if example_id in (3, 4):
        return CaseConfig(name, example_id, (5, 10, 15, 20), (0.1, 0.3, 0.5), r_value=1.0,
                          outputs=("density", "error_table", "moments"))
    if example_id == 5:
        return CaseConfig(name, 5, (5,), (0.1, 0.2, 0.4),
                          outputs=("density", "moments", "oracle_compare"))
    if example_id == 6:
        return CaseConfig(name, 6, (4,), (0.1, 0.2, 0.4),
                          outputs=("density", "moments", "oracle_compare"))
    raise ConfigError(f"no canonical configuration for example {example_id}", None, "problem")


# --------------------------------------------------------------------------
# CSV assembly
# --------------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{float(x):.16e}"


class _Csv:
    def __init__(self):
        self.buf = io.StringIO()

    def comment(self, text):
        self.buf.write(f"# {text}\n")

    def row(self, cells):
        self.buf.write(",".join(c if isinstance(c, str) else _fmt(c) for c in cells) + "\n")

    def section(self, name):
        self.buf.write(f"\n# {name}\n")

    def text(self):
        return self.buf.getvalue()


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PBE_DJM_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(func, items):
    items = list(items)
    if _workers() > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=min(_workers(), len(items))) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def _series(cfg: CaseConfig, n: int) -> engine.SeriesSolution:
    return engine.compute_series(cfg.spec(), n)


def _oracle_profiles(cfg: CaseConfig, times: Sequence[float]) -> Dict[float, oracle.GridState]:
    spec = cfg.spec()
    state = oracle.init_grid(cfg.oracle_u_max, cfg.oracle_cells, spec.initial)
    out = {}
    for t in sorted(set(times)):
        state = oracle.advance(state, spec, cfg.oracle_dt, t)
        out[t] = state
    return out


def _on_grid(state: oracle.GridState, us: np.ndarray) -> np.ndarray:
    return np.interp(us, state.nodes, state.density)


def run_density(cfg: CaseConfig) -> str:
    """Density profiles of the largest requested truncation ``n``."""
    n = max(cfg.n_terms)
    us = cfg.u_grid()
    uf = np.array([float(u) for u in us])
    case = cfg.exact_case
    spec = cfg.spec()
    with_oracle = "oracle_compare" in cfg.outputs and spec.initial.is_smooth
    csv = _Csv()
    csv.comment(f"case={cfg.case_name} n={n}")
    header = ["t", "u", "djm_value"] + (["exact_value"] if case else []) + (["oracle_value"] if with_oracle else [])
    csv.row(header)
    if not cfg.t_values:
        return csv.text()
    phi = _series(cfg, n).phi()
    profiles = _oracle_profiles(cfg, cfg.t_values) if with_oracle else {}
    diracs = []
    for t in cfg.t_values:
        djm, dirac = alg.evaluate_grid(phi, t, us, cfg.r_value)
        cols = [djm]
        if case:
            ex, ex_dirac = exact.eval_exact(case, t, uf)
            cols.append(ex)
        else:
            ex_dirac = None
        if with_oracle:
            cols.append(_on_grid(profiles[t], uf))
        for i, u in enumerate(uf):
            csv.row([t, u] + [c[i] for c in cols])
        diracs.append((t, dirac, ex_dirac))
    if cfg.needs_radius:
        csv.section("dirac")
        csv.row(["t", "r", "djm_dirac"] + (["exact_dirac"] if case else []))
        for t, d, e in diracs:
            csv.row([t, cfg.r_value, d] + ([e] if case else []))
    return csv.text()


def _error_row(args):
    cfg, phis, t = args
    us = cfg.u_grid()
    uf = np.array([float(u) for u in us])
    ex, ex_dirac = exact.eval_exact(cfg.exact_case, t, uf)
    smooth, dirac = [], []
    for phi in phis:
        v, d = alg.evaluate_grid(phi, t, us, cfg.r_value)
        smooth.append(float(np.max(np.abs(v - ex))))
        dirac.append(abs(d - ex_dirac))
    return smooth, dirac


def error_grid(cfg: CaseConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Sup-norm errors ``[t_index, n_index]`` for the smooth and Dirac channels."""
    if cfg.exact_case is None:
        raise NoExactSolution(f"{cfg.case_name}: no exact solution to compare against")
    series = _series(cfg, max(cfg.n_terms))
    phis = [series.phi(n) for n in cfg.n_terms]
    rows = _pmap(_error_row, [(cfg, phis, t) for t in cfg.t_values])
    smooth = np.array([r[0] for r in rows]).reshape(len(cfg.t_values), len(cfg.n_terms))
    dirac = np.array([r[1] for r in rows]).reshape(len(cfg.t_values), len(cfg.n_terms))
    return smooth, dirac


def run_error_table(cfg: CaseConfig) -> str:
    """Rows ``t``, columns ``n``: sup over the u-grid of ``|Phi_n - exact|``."""
    smooth, dirac = error_grid(cfg)
    csv = _Csv()
    csv.comment(f"case={cfg.case_name}")
    csv.comment(f"metric: max over u = {cfg.u_min!r}:{cfg.u_step!r}:{cfg.u_max!r} of "
                "|Phi_n(t,u) - exact(t,u)|, smooth part")
    csv.row(["t"] + [f"n={n}" for n in cfg.n_terms])
    for t, row in zip(cfg.t_values, smooth):
        csv.row([t] + list(row))
    if cfg.needs_radius:
        csv.section("dirac coefficient error |delta_n(t) - delta_exact(t)|")
        csv.row(["t"] + [f"n={n}" for n in cfg.n_terms])
        for t, row in zip(cfg.t_values, dirac):
            csv.row([t] + list(row))
    return csv.text()


def moment_table(cfg: CaseConfig) -> List[Tuple[float, List[float], List[float]]]:
    n = max(cfg.n_terms)
    series = _series(cfg, n)
    moments = [alg.total_moment(series.phi(), j) for j in range(3)]
    case = cfg.exact_case
    if case is None:
        ref_moments = [alg.total_moment(series.phi(max(n - 1, 0)), j) for j in range(3)]
    out = []
    for t in cfg.t_values:
        djm = [float(p.evaluate(t, cfg.r_value)) for p in moments]
        if case is not None:
            ref = [exact.exact_moment(case, j, t) for j in range(3)]
        else:
            ref = [float(p.evaluate(t, cfg.r_value)) for p in ref_moments]
        out.append((t, djm, ref))
    return out


def run_moments(cfg: CaseConfig) -> str:
    """Moments 0..2 of ``Phi_n`` next to the reference moments.

    The reference is the exact solution where one exists, otherwise the
    series truncated one term earlier, ``Phi_{n-1}``.
    """
    csv = _Csv()
    ref = "exact" if cfg.exact_case else f"Phi_{max(cfg.n_terms) - 1}"
    csv.comment(f"case={cfg.case_name} n={max(cfg.n_terms)} reference={ref}")
    csv.row(["t", "mu0_djm", "mu1_djm", "mu2_djm", "mu0_ref", "mu1_ref", "mu2_ref"])
    if cfg.t_values:
        for t, djm, refs in moment_table(cfg):
            csv.row([t] + djm + refs)
    return csv.text()


def oracle_comparison(cfg: CaseConfig):
    """Per-time arrays ``(u, djm, oracle, successive)`` used by the CSV report.

    ``successive[j-1]`` holds ``|Phi_j - Phi_n|`` for ``j = 1..n-1``.
    """
    spec = cfg.spec()
    if not spec.initial.is_smooth:
        raise UnsupportedClass("oracle comparison needs smooth initial data")
    n = max(cfg.n_terms)
    series = _series(cfg, n)
    us = cfg.u_grid()
    uf = np.array([float(u) for u in us])
    profiles = _oracle_profiles(cfg, cfg.t_values)
    out = []
    for t in cfg.t_values:
        phis = [alg.evaluate_grid(series.phi(j), t, us)[0] for j in range(n + 1)]
        grid = _on_grid(profiles[t], uf)
        succ = [np.abs(phis[j] - phis[n]) for j in range(1, n)]
        out.append((t, uf, phis[n], grid, succ))
    return out


def run_oracle_compare(cfg: CaseConfig) -> str:
    n = max(cfg.n_terms)
    csv = _Csv()
    csv.comment(f"case={cfg.case_name} n={n} oracle: u_max={cfg.oracle_u_max!r} "
                f"cells={cfg.oracle_cells} dt={cfg.oracle_dt!r}, linear interpolation to u")
    csv.row(["t", "u", f"djm_{n}", "oracle", "abs_diff"])
    rows = oracle_comparison(cfg) if cfg.t_values else []
    for t, uf, djm, grid, _ in rows:
        diff = np.abs(djm - grid)
        for i, u in enumerate(uf):
            csv.row([t, u, djm[i], grid[i], diff[i]])
    csv.section(f"successive truncation |Phi_j - Phi_{n}|")
    csv.row(["t", "u"] + [f"j={j}" for j in range(1, n)])
    for t, uf, _, _, succ in rows:
        for i, u in enumerate(uf):
            csv.row([t, u] + [s[i] for s in succ])
    return csv.text()


RUNNERS = {
    "density": run_density,
    "error_table": run_error_table,
    "moments": run_moments,
    "oracle_compare": run_oracle_compare,
}
