"""Input documents, report documents and the oracle cross-checks.

Input is JSON. A family document::

    {"field": "real", "dimension": 2, "vectors": [[1, 0], [0, 1]],
     "axis": [0.6, 0.8], "params": {"m": 0.5, "M": 2, "k_ij": [[...]]}}

Complex components are written as [re, im] pairs. An integral document has
``"kind": "integral"`` plus ``rule``, ``weight`` and ``functions``.
Reports are serialized with sorted keys and shortest round-trip floats, so
identical inputs give byte-identical output.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import (
    BoundReport,
    Ranking,
    TheoremId,
    band_bound_additive,
    band_bound_multiplicative,
    comb_identities,
    default_axis,
    league,
    tightest,
)
from .core import VectorFamily, defect, gram_summary, pair_indices, tol
from .errors import ConsistencyError, InvalidInputError, PreconditionError
from .hypotheses import search_band, verify_band
from .integral import (
    QuadratureRule,
    SampledVectorFunction,
    WeightFunction,
    check_g,
    integral_band_bound_additive,
    integral_band_bound_multiplicative,
    integral_gram,
    normalize_weight,
    pointwise_band,
    stacked_family,
    weighted_inner,
)

SCALAR_PARAMS = ("m", "M", "k", "rho", "eta", "p")
MATRIX_PARAMS = ("k_ij", "delta_ij")


# ---------------------------------------------------------------- parsing


def _fail(path: str, msg: str):
    raise InvalidInputError(f"{path}: {msg}")


def load_json(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _reject_constant(name):
    raise InvalidInputError(f"non-finite number {name} is not allowed")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {json.dumps(value)}")
    v = float(value)
    if not math.isfinite(v):
        _fail(path, "number must be finite")
    return v


def _component(value, path: str, is_complex: bool):
    if is_complex and isinstance(value, list):
        if len(value) != 2:
            _fail(path, "complex components are [re, im] pairs")
        return complex(_number(value[0], path + "[0]"), _number(value[1], path + "[1]"))
    return _number(value, path)


def _vector(value, path: str, d: int | None, is_complex: bool) -> list:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a non-empty array")
    if d is not None and len(value) != d:
        _fail(path, f"expected {d} components, got {len(value)}")
    return [_component(c, f"{path}[{i}]", is_complex) for i, c in enumerate(value)]


def _field(doc: dict) -> bool:
    f = doc.get("field", "real")
    if f not in ("real", "complex"):
        _fail("field", f"must be 'real' or 'complex', got {json.dumps(f)}")
    return f == "complex"


def _dimension(doc: dict) -> int | None:
    if "dimension" not in doc:
        return None
    d = doc["dimension"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        _fail("dimension", f"must be a positive integer, got {json.dumps(d)}")
    return d


def _params(raw, n: int | None) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        _fail("params", "must be an object")
    out = {}
    for key, value in raw.items():
        path = f"params.{key}"
        if key in SCALAR_PARAMS:
            if value is not None:
                out[key] = _number(value, path)
        elif key in MATRIX_PARAMS:
            if value is None:
                continue
            if not isinstance(value, list) or (n is not None and len(value) != n):
                _fail(path, f"must be a {n} x {n} matrix")
            rows = []
            for i, row in enumerate(value):
                if not isinstance(row, list) or (n is not None and len(row) != n):
                    _fail(f"{path}[{i}]", f"must have {n} entries")
                rows.append([0.0 if c is None else _number(c, f"{path}[{i}][{j}]")
                             for j, c in enumerate(row)])
            out[key] = np.array(rows, dtype=float)
        else:
            _fail(path, "unknown parameter")
    if ("m" in out) != ("M" in out):
        _fail("params", "m and M must be given together")
    return out


@dataclass(frozen=True, eq=False)
class FamilyDocument:
    family: VectorFamily
    axis: np.ndarray | None
    params: dict
    digest: str


@dataclass(frozen=True, eq=False)
class IntegralDocument:
    rule: QuadratureRule
    weight: WeightFunction
    functions: tuple
    params: dict
    g: SampledVectorFunction | None
    constant_vectors: VectorFamily | None
    digest: str


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_document(text: str):
    doc = load_json(text)
    if not isinstance(doc, dict):
        _fail("<root>", "document must be a JSON object")
    kind = doc.get("kind", "family")
    if kind == "family":
        return _parse_family(doc, digest(text))
    if kind == "integral":
        return _parse_integral(doc, digest(text))
    _fail("kind", f"must be 'family' or 'integral', got {json.dumps(kind)}")


def _parse_family(doc: dict, dig: str) -> FamilyDocument:
    is_complex = _field(doc)
    d = _dimension(doc)
    vecs = doc.get("vectors")
    if not isinstance(vecs, list) or not vecs:
        _fail("vectors", "must be a non-empty array of vectors")
    rows = []
    for i, v in enumerate(vecs):
        row = _vector(v, f"vectors[{i}]", d, is_complex)
        d = len(row)
        rows.append(row)
    fam = VectorFamily.of(rows, "complex" if is_complex else "real")
    axis = None
    if doc.get("axis") is not None:
        axis = np.array(_vector(doc["axis"], "axis", d, is_complex))
        axis = axis.astype(fam.vectors.dtype)
    params = _params(doc.get("params"), fam.n)
    return FamilyDocument(fam, axis, params, dig)


def _parse_rule(raw) -> QuadratureRule:
    if not isinstance(raw, dict):
        _fail("rule", "must be an object")
    kind = raw.get("type")
    a = _number(raw.get("a", 0.0), "rule.a")
    b = _number(raw.get("b", 1.0), "rule.b")
    if kind in ("midpoint", "gauss-legendre"):
        n = raw.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            _fail("rule.n", f"must be a positive integer, got {json.dumps(n)}")
        if kind == "midpoint":
            return QuadratureRule.midpoint(a, b, n)
        return QuadratureRule.gauss_legendre(a, b, n)
    if kind == "custom":
        nodes = raw.get("nodes")
        weights = raw.get("weights")
        if not isinstance(nodes, list) or not isinstance(weights, list):
            _fail("rule", "custom rules need 'nodes' and 'weights' arrays")
        t = [_number(x, f"rule.nodes[{i}]") for i, x in enumerate(nodes)]
        w = [_number(x, f"rule.weights[{i}]") for i, x in enumerate(weights)]
        return QuadratureRule.custom(a, b, t, w)
    _fail("rule.type", f"must be midpoint, gauss-legendre or custom, got {json.dumps(kind)}")


def _parse_function(raw, path: str, N: int, d: int | None, is_complex: bool):
    """Returns (values, constant vector or None)."""
    if isinstance(raw, dict):
        if "constant" not in raw:
            _fail(path, "object form needs a 'constant' vector")
        v = _vector(raw["constant"], path + ".constant", d, is_complex)
        return [v] * N, v
    if not isinstance(raw, list) or len(raw) != N:
        _fail(path, f"must hold one vector per node ({N})")
    return [_vector(v, f"{path}[{k}]", d, is_complex) for k, v in enumerate(raw)], None


def _parse_integral(doc: dict, dig: str) -> IntegralDocument:
    is_complex = _field(doc)
    fld = "complex" if is_complex else "real"
    d = _dimension(doc)
    rule = _parse_rule(doc.get("rule"))
    N = rule.size
    w = doc.get("weight", {"constant": 1.0})
    if isinstance(w, dict):
        if "constant" not in w:
            _fail("weight", "object form needs 'constant'")
        raw = np.full(N, _number(w["constant"], "weight.constant"))
    elif isinstance(w, list):
        if len(w) != N:
            _fail("weight", f"must hold one sample per node ({N})")
        raw = np.array([_number(x, f"weight[{k}]") for k, x in enumerate(w)])
    else:
        _fail("weight", "must be an array of samples or {'constant': value}")
    if np.any(raw < 0):
        _fail("weight", "samples must be >= 0")
    eta = normalize_weight(WeightFunction(raw), rule)

    funcs = doc.get("functions")
    if not isinstance(funcs, list) or not funcs:
        _fail("functions", "must be a non-empty array")
    fs = []
    consts = []
    for i, f in enumerate(funcs):
        vals, const = _parse_function(f, f"functions[{i}]", N, d, is_complex)
        d = len(vals[0])
        fs.append(SampledVectorFunction.of(vals, fld))
        consts.append(const)
    if any(f.field == "complex" for f in fs):
        fs = [SampledVectorFunction.of(f.values, "complex") for f in fs]
    constant_vectors = None
    if all(c is not None for c in consts):
        constant_vectors = VectorFamily.of(consts, "complex" if is_complex else None)
    g = None
    if doc.get("g") is not None:
        vals, _ = _parse_function(doc["g"], "g", N, d, is_complex)
        g = SampledVectorFunction.of(vals, fld)
    params = _params(doc.get("params"), len(fs))
    if "m" not in params:
        _fail("params", "integral documents need m and M")
    return IntegralDocument(rule, eta, tuple(fs), params, g, constant_vectors, dig)


# ---------------------------------------------------------------- reports


def jsonable(value):
    """Convert numpy values to plain JSON types; complex numbers become [re, im]."""
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def report_record(rep: BoundReport) -> dict:
    rec = {
        "theorem_id": rep.theorem_id.value,
        "league": rep.league,
        "applicable": True,
        "lhs": float(rep.lhs),
        "rhs": float(rep.rhs),
        "slack": float(rep.slack),
        "feasible": rep.feasible,
        "holds": rep.holds,
        "min_margin": rep.certificate.min_margin,
        "equality_residual_max": rep.equality_residual_max,
        "equality": rep.at_equality,
        "params_used": jsonable(rep.params),
        "hypothesis": rep.certificate.name,
        "reason": None,
    }
    if rep.certificate.notes:
        rec["notes"] = list(rep.certificate.notes)
    if rep.extras:
        rec["extras"] = jsonable(rep.extras)
    if rep.additive_slack is not None:
        rec["additive_slack"] = rep.additive_slack
    return rec


def empty_record(tid: TheoremId, reason: str) -> dict:
    return {
        "theorem_id": tid.value,
        "league": league(tid),
        "applicable": False,
        "lhs": None,
        "rhs": None,
        "slack": None,
        "feasible": False,
        "holds": None,
        "min_margin": None,
        "equality_residual_max": None,
        "equality": None,
        "params_used": None,
        "hypothesis": None,
        "reason": reason,
    }


@dataclass(eq=True)
class ReportDocument:
    command: str
    input_digest: str
    summary: dict
    records: list
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "version": self.version,
            "input_digest": self.input_digest,
            "summary": self.summary,
            "records": self.records,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        d = json.loads(text)
        return cls(d["command"], d["input_digest"], d["summary"], d["records"], d["version"])

    def record(self, tid) -> dict | None:
        tid = TheoremId(tid).value
        for rec in self.records:
            if rec["theorem_id"] == tid:
                return rec
        return None


def records_from_ranking(ranking: Ranking, ids=None) -> list:
    ids = list(TheoremId) if ids is None else [TheoremId(t) for t in ids]
    out = []
    for tid in ids:
        rep = ranking.report(tid)
        if rep is not None:
            out.append(report_record(rep))
        else:
            out.append(empty_record(tid, ranking.reason(tid) or "not evaluated"))
    return out


def analyze(doc: FamilyDocument) -> ReportDocument:
    fam = doc.family
    band = None
    if fam.n >= 2 and "m" not in doc.params:
        found = search_band(fam)
        if found is not None:
            band = {"m": found.m, "M": found.M, "coefficient": found.coefficient, "heuristic": True}
    ranking = tightest(fam, doc.axis, _tightest_params(doc.params))
    d = defect(fam)
    g = gram_summary(fam)
    try:
        axis = doc.axis if doc.axis is not None else default_axis(fam)
    except PreconditionError:
        axis = None
    summary = {
        "n": fam.n,
        "dimension": fam.d,
        "field": fam.field,
        "norm_sum": g.norm_sum,
        "sum_norm": g.sum_norm,
        "defect": {"direct": d.direct, "pairwise": d.pairwise},
        "axis": jsonable(axis),
        "axis_source": "input" if doc.axis is not None else "sum direction",
        "band_search": band,
        "ranking": {
            "quadratic": [r.theorem_id.value for r in ranking.quadratic],
            "linear": [r.theorem_id.value for r in ranking.linear],
        },
        "applicable": len(ranking.quadratic) + len(ranking.linear),
    }
    return ReportDocument("analyze", doc.digest, summary, records_from_ranking(ranking))


def _tightest_params(params: dict) -> dict:
    out = {k: params[k] for k in SCALAR_PARAMS if k in params}
    for k in MATRIX_PARAMS:
        if k in params:
            out[k] = params[k]
    return out


BAND_IDS = (TheoremId.BAND_ADD_2_19, TheoremId.BAND_MULT_3_20, TheoremId.BAND_COARSE_3_11)


def _integral_reports(doc: IntegralDocument):
    m, M = doc.params["m"], doc.params["M"]
    add = integral_band_bound_additive(doc.functions, doc.weight, doc.rule, m, M)
    mult, coarse = integral_band_bound_multiplicative(doc.functions, doc.weight, doc.rule, m, M)
    return [add, mult, coarse]


def _stacked_reports(doc: IntegralDocument):
    m, M = doc.params["m"], doc.params["M"]
    fam = stacked_family(doc.functions, doc.weight, doc.rule)
    band = verify_band(fam, m, M)
    return [band_bound_additive(fam, band)] + band_bound_multiplicative(fam, band)


def integral(doc: IntegralDocument) -> ReportDocument:
    margins = pointwise_band(doc.functions, doc.rule, doc.params["m"], doc.params["M"])
    g_norm = check_g(doc.g, doc.weight, doc.rule)
    reps = _integral_reports(doc)
    stacked = _stacked_reports(doc)
    cross = {}
    for a, b in zip(reps, stacked):
        scale = max(abs(a.lhs), abs(a.rhs), 1.0)
        cross[a.theorem_id.value] = {
            "stacked_lhs": b.lhs,
            "stacked_rhs": b.rhs,
            "relative_difference": max(abs(a.lhs - b.lhs), abs(a.rhs - b.rhs)) / scale,
        }
    summary = {
        "n": len(doc.functions),
        "dimension": doc.functions[0].d,
        "nodes": doc.rule.size,
        "interval": [doc.rule.a, doc.rule.b],
        "weight_mass": math.fsum(doc.rule.weights * doc.weight.samples),
        "pointwise_min_margin": float(np.min(margins)) if margins.size else None,
        "stacked_check": cross,
        "g_norm_sq": g_norm,
        "g_used_in_bound": False,
        "constant_functions": doc.constant_vectors is not None,
    }
    records = [report_record(r) for r in reps]
    return ReportDocument("integral", doc.digest, summary, records)


def discrete_band_records(fam: VectorFamily, m: float, M: float) -> list:
    band = verify_band(fam, m, M)
    reps = [band_bound_additive(fam, band)] + band_bound_multiplicative(fam, band)
    return [report_record(r) for r in reps]


# ---------------------------------------------------------------- oracle


@dataclass(frozen=True)
class Check:
    name: str
    discrepancy: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance


@dataclass
class OracleResult:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, discrepancy, tolerance, detail=""):
        self.checks.append(Check(name, float(discrepancy), float(tolerance), detail))


def oracle_family(doc: FamilyDocument, rel: float = 1e-10) -> OracleResult:
    fam = doc.family
    out = OracleResult()
    g = gram_summary(fam)
    S = g.norm_sum
    scale = max(S * S, 1e-300)
    d = defect(fam)
    out.add("defect: direct vs pairwise", d.discrepancy, rel * scale,
            f"direct={d.direct!r} pairwise={d.pairwise!r}")
    G = g.re_inner
    out.add("gram: symmetry", float(np.max(np.abs(G - G.T))), 0.0)
    out.add("gram: diagonal", float(np.max(np.abs(np.diag(G) - g.norms ** 2))), rel * scale)
    out.add("gram: sum equals ||sum x||^2", abs(math.fsum(G.ravel()) - g.sum_norm_sq), rel * scale)
    Q = math.fsum(g.sq_norms)
    pairs = pair_indices(fam.n)
    for k in (1.0, 2.5):
        lhs = S * S - k * g.sum_norm_sq
        rhs = 2.0 * math.fsum(g.norms[i] * g.norms[j] - k * G[i, j] for i, j in pairs) + (1.0 - k) * Q
        out.add(f"k-identity at k={k}", abs(lhs - rhs), rel * max(scale, k * g.sum_norm_sq))
    if fam.n >= 2:
        try:
            comb_identities(fam.n)
            out.add(f"comb identities at n={fam.n}", 0.0, 0.0)
        except ConsistencyError as exc:
            out.add(f"comb identities at n={fam.n}", 1.0, 0.0, str(exc))
        gaps = g.gaps()
        if "k_ij" in doc.params:
            K = doc.params["k_ij"]
            for i, j in pairs:
                short = gaps[i, j] - K[i, j]
                t = tol(g.norms[i] * g.norms[j])
                out.add(f"k_ij >= gap at pair ({i + 1}, {j + 1})", max(short, 0.0), t,
                        f"k={float(K[i, j])!r} gap={float(gaps[i, j])!r}")
        if "delta_ij" in doc.params:
            D = doc.params["delta_ij"]
            for i, j in pairs:
                over = D[i, j] - gaps[i, j]
                t = tol(g.norms[i] * g.norms[j])
                out.add(f"delta_ij <= gap at pair ({i + 1}, {j + 1})", max(over, 0.0), t,
                        f"delta={float(D[i, j])!r} gap={float(gaps[i, j])!r}")
        if "m" in doc.params:
            try:
                verify_band(fam, doc.params["m"], doc.params["M"])
                out.add("band: inner and ball forms agree", 0.0, 0.0)
            except ConsistencyError as exc:
                out.add("band: inner and ball forms agree", 1.0, 0.0, str(exc))
    return out


def oracle_integral(doc: IntegralDocument, rel: float = 1e-12) -> OracleResult:
    out = OracleResult()
    fs = doc.functions
    fam = stacked_family(fs, doc.weight, doc.rule)
    X = fam.vectors
    gi = integral_gram(fs, doc.weight, doc.rule)
    scale = max(gi.norm_sum ** 2, 1e-300)
    worst = 0.0
    for i in range(len(fs)):
        for j in range(len(fs)):
            a = weighted_inner(fs[i], fs[j], doc.weight, doc.rule)
            b = complex(np.sum(X[i] * np.conj(X[j])))
            worst = max(worst, abs(a - b))
    out.add("stacking isometry: inner products", worst, rel * scale)
    out.add("weight normalization", abs(math.fsum(doc.rule.weights * doc.weight.samples) - 1.0), 1e-12)
    try:
        reps = _integral_reports(doc)
        stacked = _stacked_reports(doc)
        for a, b in zip(reps, stacked):
            s = max(abs(a.lhs), abs(a.rhs), 1e-300)
            out.add(f"stacked bound {a.theorem_id.value}",
                    max(abs(a.lhs - b.lhs), abs(a.rhs - b.rhs)), rel * s)
    except PreconditionError as exc:
        out.add("pointwise band condition", 1.0, 0.0, str(exc))
    if doc.constant_vectors is not None:
        gd = gram_summary(doc.constant_vectors)
        diff = max(float(np.max(np.abs(gd.re_inner - gi.re_inner))), abs(gd.sum_norm_sq - gi.sum_norm_sq))
        out.add("constant functions reduce to the discrete family", diff, rel * scale)
    if doc.g is not None:
        try:
            check_g(doc.g, doc.weight, doc.rule)
            out.add("g normalization", 0.0, 0.0)
        except InvalidInputError as exc:
            out.add("g normalization", 1.0, 0.0, str(exc))
    return out


def oracle_report(doc, result: OracleResult) -> ReportDocument:
    checks = [{
        "name": c.name,
        "discrepancy": c.discrepancy,
        "tolerance": c.tolerance,
        "passed": c.passed,
        "detail": c.detail,
    } for c in result.checks]
    failed = [c["name"] for c in checks if not c["passed"]]
    summary = {"passed": result.passed, "checks": len(checks), "failed": failed}
    return ReportDocument("oracle", doc.digest, summary, checks)


__all__ = [
    "FamilyDocument", "IntegralDocument", "ReportDocument", "OracleResult", "Check",
    "parse_document", "analyze", "integral", "oracle_family", "oracle_integral",
    "oracle_report", "report_record", "empty_record", "discrete_band_records",
    "jsonable",
]
