"""Experiment runner: sample graphs, build every scheme, measure and verify, tabulate."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .errors import CompactRoutingError, RetryExhaustedError
from .graphs import (
    LabeledGraph,
    PortAssignment,
    check_coverage_lemma,
    check_degree_lemma,
    check_diameter_two,
    coverage_size,
    derived_seed,
    generate_uniform,
)
from .schemes import (
    BUILDERS,
    DEFAULT_MODELS,
    LEGAL_MODELS,
    NEEDS_PORTS,
    ModelSpec,
    RoutingScheme,
    budget_violations,
    build,
    headline_bits,
    measure_size,
)
from .simulator import route_stats, sample_pairs, verify_full_info

# largest first, matching the rows of the size table
SCHEME_ORDER = [
    "full_info",
    "sp_fixed_port",
    "sp_neighbor_known",
    "sp_relabel",
    "stretch15",
    "stretch2_hub",
    "stretch_logn",
]
SHORTEST_PATH = {"full_info", "sp_fixed_port", "sp_neighbor_known", "sp_relabel"}
STRETCH_LIMIT = {"stretch15": Fraction(3, 2), "stretch2_hub": Fraction(2)}


@dataclass
class ExperimentConfig:
    n_values: list[int]
    seeds: list[int]
    c: float = 3
    schemes: list[str] = field(default_factory=lambda: list(SCHEME_ORDER))
    models: dict[str, str] = field(default_factory=dict)
    pairs: str | int = "all"
    retries: int = 5
    degree_k: float = 2.0

    def __post_init__(self):
        for name in self.schemes:
            if name not in BUILDERS:
                raise ValueError(f"unknown scheme {name!r}")
            model = self.model_for(name)
            if model not in LEGAL_MODELS[name]:
                raise ValueError(f"{name} is not legal under {model}")
        if self.pairs != "all" and int(self.pairs) <= 0:
            raise ValueError("pairs must be 'all' or a positive sample size")

    def model_for(self, name: str) -> ModelSpec:
        return ModelSpec.parse(self.models[name]) if name in self.models else DEFAULT_MODELS[name]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def shipped_config(name: str) -> ExperimentConfig:
    """One of the JSON configs bundled with the package, e.g. ``"acceptance"``."""
    text = resources.files("compact_routing").joinpath("configs", f"{name}.json").read_text()
    return ExperimentConfig.from_dict(json.loads(text))


@dataclass
class ReportRow:
    scheme: str
    model: str
    n: int
    seed: int
    graph_seed: int
    retries: int
    status: str
    total_bits: int
    label_bits: int
    max_node_bits: int
    headline_bits: int
    budget_ok: bool
    max_stretch: Fraction
    max_traversal_stretch: Fraction
    max_traversals: int
    pairs: int
    violations: int
    claim_violations: int
    diameter_two: bool
    degree_ok: bool
    coverage_ok: bool
    runtime: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


COLUMNS = [f.name for f in fields(ReportRow)]


@dataclass
class GraphSample:
    g: LabeledGraph
    seed: int
    graph_seed: int
    retries: int
    lemmas: dict[str, bool]


def sample_graph(n: int, seed: int, c: float, retries: int = 5, degree_k: float = 2.0) -> GraphSample:
    """First graph for this seed slot that passes all three checks, resampling up to ``retries`` times."""
    for attempt in range(retries + 1):
        gs = derived_seed(seed, attempt)
        g = generate_uniform(n, gs)
        lemmas = {
            "diameter_two": check_diameter_two(g),
            "degree": check_degree_lemma(g, c, degree_k).passed,
            "coverage": check_coverage_lemma(g, c).passed,
        }
        if all(lemmas.values()):
            return GraphSample(g, seed, gs, attempt, lemmas)
    raise RetryExhaustedError(f"n={n} seed={seed}: {retries + 1} graphs all failed the lemma checks")


def verify_scheme(g: LabeledGraph, s: RoutingScheme, pairs=None) -> tuple[list[str], object]:
    """Scheme-appropriate route checks; returns failure messages and the route statistics."""
    stats = route_stats(g, s, pairs)
    failures = []
    if stats.undelivered:
        failures.append(f"{len(stats.undelivered)} pairs undelivered")
    if s.name in SHORTEST_PATH or s.name == "canonical":
        if stats.shortest_violations:
            failures.append(f"{len(stats.shortest_violations)} routes longer than shortest")
    if s.name in STRETCH_LIMIT and stats.max_stretch > STRETCH_LIMIT[s.name]:
        failures.append(f"stretch {stats.max_stretch} > {STRETCH_LIMIT[s.name]}")
    if s.name == "stretch_logn":
        limit = 2 * coverage_size(s.n, s.c)
        if stats.max_traversals > limit:
            failures.append(f"{stats.max_traversals} edge traversals > {limit}")
    if s.name == "full_info":
        rep = verify_full_info(g, s)
        if not rep.passed:
            failures.append(f"{len(rep.violations)} full-information port sets differ from BFS")
    return failures, stats


def run_one(sample: GraphSample, name: str, cfg: ExperimentConfig) -> ReportRow:
    g = sample.g
    model = cfg.model_for(name)
    t0 = time.perf_counter()
    base = dict(
        scheme=name, model=str(model), n=g.n, seed=sample.seed, graph_seed=sample.graph_seed,
        retries=sample.retries, headline_bits=round(headline_bits(name, g.n, cfg.c)),
        diameter_two=sample.lemmas["diameter_two"], degree_ok=sample.lemmas["degree"],
        coverage_ok=sample.lemmas["coverage"],
    )
    ports = PortAssignment.random(g, sample.graph_seed) if name in NEEDS_PORTS else None
    try:
        s = build(name, g, cfg.c, model, ports)
        size = measure_size(s)
        pairs = None if cfg.pairs == "all" else sample_pairs(g.n, int(cfg.pairs), sample.graph_seed)
        failures, stats = verify_scheme(g, s, pairs)
        over = budget_violations(s, size)
        status = "ok" if not failures else "verify-failed: " + "; ".join(failures)
        return ReportRow(
            **base, status=status, total_bits=size.total_bits, label_bits=sum(size.label_bits),
            max_node_bits=size.max_node_bits, budget_ok=not over,
            max_stretch=stats.max_stretch, max_traversal_stretch=stats.max_traversal_stretch,
            max_traversals=stats.max_traversals, pairs=stats.pairs,
            violations=len(stats.shortest_violations) if name in SHORTEST_PATH else len(failures),
            claim_violations=len(s.diagnostics.get("claim_violations", {})),
            runtime=time.perf_counter() - t0,
        )
    except CompactRoutingError as exc:
        return ReportRow(
            **base, status=f"error: {type(exc).__name__}: {exc}", total_bits=0, label_bits=0,
            max_node_bits=0, budget_ok=False, max_stretch=Fraction(0), max_traversal_stretch=Fraction(0),
            max_traversals=0, pairs=0, violations=0, claim_violations=0,
            runtime=time.perf_counter() - t0,
        )


def _exhausted_row(n: int, seed: int, name: str, cfg: ExperimentConfig) -> ReportRow:
    return ReportRow(
        scheme=name, model=str(cfg.model_for(name)), n=n, seed=seed, graph_seed=-1,
        retries=cfg.retries, status="retry-exhausted", total_bits=0, label_bits=0, max_node_bits=0,
        headline_bits=round(headline_bits(name, n, cfg.c)), budget_ok=False,
        max_stretch=Fraction(0), max_traversal_stretch=Fraction(0), max_traversals=0, pairs=0,
        violations=0, claim_violations=0, diameter_two=False, degree_ok=False, coverage_ok=False,
    )


def run_experiments(cfg: ExperimentConfig) -> list[ReportRow]:
    """One row per (n, seed, scheme), in a fixed order independent of execution order."""
    rows = []
    if not cfg.schemes:
        return rows
    for n in cfg.n_values:
        exhausted = []
        for seed in cfg.seeds:
            try:
                sample = sample_graph(n, seed, cfg.c, cfg.retries, cfg.degree_k)
            except RetryExhaustedError as exc:
                exhausted.append(str(exc))
                rows.extend(_exhausted_row(n, seed, name, cfg) for name in cfg.schemes)
                continue
            for name in cfg.schemes:
                rows.append(run_one(sample, name, cfg))
        if exhausted and len(exhausted) == len(cfg.seeds):
            raise RetryExhaustedError(f"every seed failed the lemma checks at n={n}: " + "; ".join(exhausted))
    order = {name: i for i, name in enumerate(SCHEME_ORDER)}
    rows.sort(key=lambda r: (r.n, r.seed, order.get(r.scheme, len(order)), r.model))
    return rows


# ----------------------------------------------------------------- output

def _fraction_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def seed_means(rows: list[ReportRow]) -> list[dict]:
    """Per (scheme, model, n): exact means over seeds of the size and stretch columns."""
    groups: dict[tuple, list[ReportRow]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.model, r.n), []).append(r)
    out = []
    for (scheme, model, n), rs in groups.items():
        k = len(rs)
        out.append({
            "scheme": scheme,
            "model": model,
            "n": n,
            "seeds": k,
            "mean_total_bits": Fraction(sum(r.total_bits for r in rs), k),
            "mean_max_node_bits": Fraction(sum(r.max_node_bits for r in rs), k),
            "max_stretch": max(r.max_stretch for r in rs),
            "all_ok": all(r.ok and r.budget_ok for r in rs),
        })
    return out


def _cell(value) -> str:
    if isinstance(value, Fraction):
        return _fraction_text(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def render_report(rows: list[ReportRow], fmt: str = "csv", timing: bool = False) -> str:
    """CSV or JSON text with a fixed column order. Runtime is left out unless ``timing``."""
    cols = COLUMNS if timing else [c for c in COLUMNS if c != "runtime"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            d = asdict(r)
            w.writerow([_cell(d[c]) for c in cols])
        return buf.getvalue()
    if fmt == "json":
        def conv(d):
            return {k: (_fraction_text(v) if isinstance(v, Fraction) else v) for k, v in d.items()}
        body = {
            "columns": cols,
            "rows": [conv({c: asdict(r)[c] for c in cols}) for r in rows],
            "means": [conv(m) for m in seed_means(rows)],
        }
        return json.dumps(body, indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(rows: list[ReportRow], fmt: str = "csv", out=None, timing: bool = False) -> str:
    text = render_report(rows, fmt, timing)
    if out is not None:
        Path(out).write_text(text)
    return text


_BOOL = {"true": True, "false": False}


def _parse_value(name: str, text):
    kind = {f.name: f.type for f in fields(ReportRow)}[name]
    if kind == "Fraction":
        return Fraction(text)
    if kind == "bool":
        return text if isinstance(text, bool) else _BOOL[text]
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return str(text)


def parse_report(text: str, fmt: str = "csv") -> list[ReportRow]:
    """Inverse of ``render_report``; missing runtime reads back as 0."""
    if fmt == "csv":
        records = list(csv.DictReader(io.StringIO(text)))
    elif fmt == "json":
        records = json.loads(text)["rows"]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return [ReportRow(**{k: _parse_value(k, v) for k, v in rec.items()}) for rec in records]
