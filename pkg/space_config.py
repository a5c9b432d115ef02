"""INI space configurations: parsing, validation and rendering.

A configuration names a carrier, its pseudometrics, a graph, a self-map and
the analysis knobs. `parse_config` collects every problem it finds before
raising a single `ConfigError`, so one run lists all of them.
"""

from __future__ import annotations

import configparser
import hashlib
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, TypeVar

from analysis import ProbeSettings
from config_utils import parse_bool, parse_number
from errors import ConfigError, GContractionError
from graph import (
    EXPLICIT,
    FORWARD,
    INTERVAL_ORDER,
    PREDICATES,
    REVERSED,
    UNDIRECTED,
    DirectedGraph,
    reverse,
    undirected_closure,
)
from maps import Piece, SelfMap
from space import (
    FINITE,
    REAL_LINE,
    BasicEntourage,
    Carrier,
    Interval,
    Pseudometric,
    PseudometricFamily,
    RegionPart,
    UniformSpace,
    format_number,
)

CONFIG_DIR = Path(__file__).resolve().parent / "configs"
CONFIG_SUFFIX = ".ini"

SECTION_KEYS = {
    "carrier": {"kind", "labels", "coords", "domain", "grid"},
    "graph": {"kind", "edges", "region", "excluded", "orientation"},
    "map": {"kind", "table", "pieces"},
    "analysis": {
        "basis",
        "probes",
        "budget",
        "window",
        "eps",
        "alpha",
        "seed",
        "max_carrier",
        "divergence_bound",
        "sequentially_complete",
        "property_star",
    },
}
PSEUDOMETRIC_KEYS = {"table", "expression", "scale"}
ORIENTATIONS = (FORWARD, REVERSED, UNDIRECTED)

_INTERVAL = re.compile(r"^\s*([\[(])\s*([^,]+?)\s*,\s*([^,]+?)\s*([\])])\s*$")
_PIECE = re.compile(r"^\s*([\[(][^\])]*[\])])\s*:\s*(.*)$")
_ARROW = re.compile(r"\s*->\s*")

T = TypeVar("T")


@dataclass
class SpaceConfig:
    name: str
    text: str
    carrier: Carrier
    family: PseudometricFamily
    graph: DirectedGraph
    mapping: SelfMap
    space: UniformSpace
    basis: tuple[BasicEntourage, ...] = ()
    probes: tuple[Fraction, ...] = ()
    settings: ProbeSettings = field(default_factory=ProbeSettings)
    alpha: Optional[Fraction] = None
    seed: Optional[int] = None
    max_carrier: Optional[int] = None

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    @property
    def is_finite(self) -> bool:
        return self.carrier.is_finite


def resolve_config_path(name_or_path: str) -> Path:
    """A readable path as given, else a bundled fixture by bare name."""
    candidate = Path(name_or_path).expanduser()
    if candidate.is_file():
        return candidate
    bundled = CONFIG_DIR / name_or_path
    if bundled.suffix != CONFIG_SUFFIX:
        bundled = bundled.with_name(bundled.name + CONFIG_SUFFIX)
    if bundled.is_file():
        return bundled
    raise ConfigError([f"config {name_or_path!r} is neither a file nor a bundled fixture"])


def bundled_config_names() -> list[str]:
    return sorted(path.stem for path in CONFIG_DIR.glob(f"*{CONFIG_SUFFIX}"))


def parse_config(path: str | Path) -> SpaceConfig:
    resolved = resolve_config_path(str(path))
    text = resolved.read_text(encoding="utf-8")
    config = parse_config_text(text, name=resolved.stem)
    logging.info("config_loaded name=%s hash=%s", config.name, config.config_hash[:12])
    return config


def parse_config_text(text: str, name: str = "inline") -> SpaceConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    return _ConfigReader(parser, name, text).build()


class _ConfigReader:
    def __init__(self, parser: configparser.ConfigParser, name: str, text: str) -> None:
        self.parser = parser
        self.name = name
        self.text = text
        self.problems: list[str] = []

    def attempt(self, where: str, build: Callable[[], T]) -> Optional[T]:
        try:
            return build()
        except ConfigError as exc:
            self.problems.extend(f"{where}: {problem}" for problem in exc.diagnostics)
        except (GContractionError, ValueError, ZeroDivisionError) as exc:
            self.problems.append(f"{where}: {exc}")
        return None

    def build(self) -> SpaceConfig:
        self._check_layout()
        has = self.parser.has_section
        carrier = self.attempt("carrier", self._carrier) if has("carrier") else None
        family = self.attempt("pseudometrics", lambda: self._family(carrier)) if carrier else None
        graph = self.attempt("graph", lambda: self._graph(carrier)) if carrier and has("graph") else None
        mapping = self.attempt("map", lambda: self._map(carrier)) if carrier and has("map") else None
        analysis = self.parser["analysis"] if self.parser.has_section("analysis") else {}
        knobs = self.attempt("analysis", lambda: self._knobs(analysis)) or {}
        basis = self.attempt("analysis.basis", lambda: self._basis(analysis, family)) if family else ()
        space = None
        if family is not None:
            space = self.attempt("analysis", lambda: self._space(analysis, family))
        if self.problems or None in (carrier, family, graph, mapping, space):
            raise ConfigError(self.problems or ["configuration is incomplete"])
        return SpaceConfig(
            name=self.name,
            text=self.text,
            carrier=carrier,
            family=family,
            graph=graph,
            mapping=mapping,
            space=space,
            basis=basis or family.unit_basis(),
            **knobs,
        )

    def _check_layout(self) -> None:
        for section in self.parser.sections():
            if section.startswith("pseudometric "):
                allowed = PSEUDOMETRIC_KEYS
            elif section in SECTION_KEYS:
                allowed = SECTION_KEYS[section]
            else:
                self.problems.append(f"unknown section [{section}]")
                continue
            for key in self.parser[section]:
                if key not in allowed:
                    self.problems.append(f"[{section}]: unknown key {key!r}")
        for required in ("carrier", "graph", "map"):
            if not self.parser.has_section(required):
                self.problems.append(f"missing [{required}] section")
        if not self._pseudometric_sections():
            self.problems.append("no [pseudometric <id>] section")

    def _pseudometric_sections(self) -> list[str]:
        return [s for s in self.parser.sections() if s.startswith("pseudometric ")]

    # ---------------------------------------------------------------- blocks

    def _carrier(self) -> Carrier:
        block = self.parser["carrier"]
        kind = block.get("kind", FINITE).strip()
        if kind == FINITE:
            labels = _split(block.get("labels", ""))
            coords = None
            if "coords" in block:
                coords = [None if c in {"-", "none"} else parse_number(c) for c in _split(block["coords"])]
            return Carrier.finite(labels, coords)
        if kind == REAL_LINE:
            domain = parse_interval(block.get("domain", "(-inf, inf)"))
            grid = sorted({parse_number(g) for g in _split(block.get("grid", ""))})
            return Carrier.real_line(domain, grid)
        raise ConfigError([f"unknown carrier kind {kind!r}; expected {FINITE} or {REAL_LINE}"])

    def _family(self, carrier: Carrier) -> PseudometricFamily:
        members = []
        problems: list[str] = []
        for section in self._pseudometric_sections():
            ident = section.split(None, 1)[1].strip()
            member = self.attempt(f"[{section}]", lambda: self._pseudometric(ident, self.parser[section], carrier))
            if member is not None:
                members.append(member)
            else:
                problems.append(f"pseudometric {ident} rejected")
        if problems:
            raise ConfigError(problems)
        return PseudometricFamily.of(members)

    @staticmethod
    def _pseudometric(ident: str, block: configparser.SectionProxy, carrier: Carrier) -> Pseudometric:
        if "table" in block:
            rows = [[parse_number(v) for v in _split(line)] for line in _lines(block["table"])]
            if len(rows) != carrier.size or any(len(row) != carrier.size for row in rows):
                raise ConfigError([f"table must be {carrier.size}x{carrier.size}"])
            return Pseudometric.from_table(ident, carrier, rows)
        expression = block.get("expression", "").strip()
        if expression != "abs-difference":
            raise ConfigError([f"unsupported expression {expression!r}; only abs-difference is known"])
        return Pseudometric.absolute_difference(ident, carrier, parse_number(block.get("scale", "1")))

    def _graph(self, carrier: Carrier) -> DirectedGraph:
        block = self.parser["graph"]
        kind = block.get("kind", EXPLICIT).strip()
        orientation = block.get("orientation", FORWARD).strip()
        if orientation not in ORIENTATIONS:
            raise ConfigError([f"unknown orientation {orientation!r}"])
        if kind == EXPLICIT:
            if not carrier.is_finite:
                raise ConfigError(["explicit edges need a finite carrier"])
            edges = [parse_edge(item) for item in _split(block.get("edges", ""))]
            unknown = sorted({x for edge in edges for x in edge if not carrier.contains(x)})
            if unknown:
                raise ConfigError([f"edges mention unknown labels {unknown}"])
            graph = DirectedGraph.explicit(carrier, edges)
        elif kind in PREDICATES:
            order_set = None
            if kind == INTERVAL_ORDER:
                region = parse_interval(block.get("region", ""))
                excluded = tuple(sorted(parse_number(e) for e in _split(block.get("excluded", ""))))
                order_set = RegionPart(region, excluded)
            graph = DirectedGraph.predicate(carrier, kind, order_set)
        else:
            raise ConfigError([f"unknown graph kind {kind!r}"])
        if orientation == FORWARD:
            return graph
        return reverse(graph) if orientation == REVERSED else undirected_closure(graph)

    def _map(self, carrier: Carrier) -> SelfMap:
        block = self.parser["map"]
        kind = block.get("kind", "table").strip()
        if kind == "table":
            pairs = [parse_edge(item) for item in _split(block.get("table", ""))]
            table: dict[str, str] = {}
            for x, y in pairs:
                if x in table:
                    raise ConfigError([f"label {x!r} is mapped twice"])
                table[x] = y
            return SelfMap.from_table(carrier, table)
        if kind == "pieces":
            pieces = [parse_piece(line) for line in _lines(block.get("pieces", ""))]
            return SelfMap.piecewise(carrier, pieces)
        raise ConfigError([f"unknown map kind {kind!r}; expected table or pieces"])

    @staticmethod
    def _knobs(block) -> dict:
        defaults = ProbeSettings()
        settings = ProbeSettings(
            budget=int(block.get("budget", defaults.budget)),
            window=int(block.get("window", defaults.window)),
            eps=parse_number(block["eps"]) if "eps" in block else defaults.eps,
            divergence_bound=float(block.get("divergence_bound", defaults.divergence_bound)),
        )
        if settings.budget < 1 or settings.window < 1 or settings.eps <= 0:
            raise ConfigError(["budget, window and eps must be positive"])
        alpha = parse_number(block["alpha"]) if "alpha" in block else None
        if alpha is not None and not 0 < alpha < 1:
            raise ConfigError([f"alpha must lie in (0, 1), got {format_number(alpha)}"])
        return {
            "settings": settings,
            "probes": tuple(parse_number(p) for p in _split(block.get("probes", ""))),
            "alpha": alpha,
            "seed": int(block["seed"]) if "seed" in block else None,
            "max_carrier": int(block["max_carrier"]) if "max_carrier" in block else None,
        }

    @staticmethod
    def _basis(block, family: PseudometricFamily) -> tuple[BasicEntourage, ...]:
        entourages = []
        for line in _lines(block.get("basis", "")):
            terms = []
            for term in _split(line):
                ident, _, radius = term.partition(":")
                if ident.strip() not in family.ids:
                    raise ConfigError([f"basis refers to unknown pseudometric {ident.strip()!r}"])
                terms.append((ident.strip(), parse_number(radius)))
            entourages.append(BasicEntourage.of(family, terms))
        return tuple(entourages)

    @staticmethod
    def _space(block, family: PseudometricFamily) -> UniformSpace:
        complete = parse_bool(block.get("sequentially_complete", "true"), True)
        star = block.get("property_star")
        return UniformSpace(family, complete, None if star is None else parse_bool(star, False))


# ----------------------------------------------------------------- literals


def _split(raw: str) -> list[str]:
    return [item.strip() for item in re.split(r"[,\n]", raw) if item.strip()]


def _lines(raw: str) -> list[str]:
    return [line.strip() for line in raw.splitlines() if line.strip()]


def _bound(raw: str) -> Optional[Fraction]:
    text = raw.strip().lower()
    if text.lstrip("+-") in {"inf", "infinity"}:
        return None
    return parse_number(raw)


def parse_interval(raw: str) -> Interval:
    match = _INTERVAL.match(raw)
    if match is None:
        raise ConfigError([f"interval {raw!r} is not of the form [a, b], (a, b), [a, b) or (a, b]"])
    left, lo_raw, hi_raw, right = match.groups()
    lo, hi = _bound(lo_raw), _bound(hi_raw)
    if lo_raw.strip().lower().lstrip("+").startswith("inf") or hi_raw.strip().lower().startswith("-inf"):
        raise ConfigError([f"interval {raw!r} has its infinite bounds reversed"])
    interval = Interval(lo, hi, left == "[" and lo is not None, right == "]" and hi is not None)
    if interval.is_empty:
        raise ConfigError([f"interval {raw!r} is empty"])
    return interval


def parse_edge(raw: str) -> tuple[str, str]:
    parts = _ARROW.split(raw.strip())
    if len(parts) != 2 or not all(parts):
        raise ConfigError([f"{raw!r} is not of the form x -> y"])
    return parts[0], parts[1]


def parse_piece(raw: str) -> Piece:
    """`[1, 4]: slope=1/3, intercept=5/3` with optional `quad=`."""
    match = _PIECE.match(raw)
    if match is None:
        raise ConfigError([f"piece {raw!r} is not of the form <interval>: slope=..., intercept=..."])
    interval = parse_interval(match.group(1))
    coefficients = {"slope": Fraction(0), "intercept": Fraction(0), "quad": Fraction(0)}
    for term in _split(match.group(2)):
        key, _, value = term.partition("=")
        if key.strip() not in coefficients:
            raise ConfigError([f"piece {raw!r}: unknown coefficient {key.strip()!r}"])
        coefficients[key.strip()] = parse_number(value)
    return Piece(interval, **coefficients)


# ---------------------------------------------------------------- rendering


def render_config(config: SpaceConfig) -> str:
    """INI text that parses back to an equivalent configuration."""
    carrier = config.carrier
    lines = ["[carrier]"]
    if carrier.is_finite:
        lines += ["kind = finite", "labels = " + ", ".join(carrier.labels)]
        if carrier.coords:
            lines.append("coords = " + ", ".join("-" if c is None else format_number(c) for c in carrier.coords))
    else:
        lines += ["kind = real-line", f"domain = {_interval_literal(carrier.domain)}"]
        if carrier.grid:
            lines.append("grid = " + ", ".join(format_number(g) for g in carrier.grid))
    for member in config.family.members:
        lines += ["", f"[pseudometric {member.id}]"]
        if member.kind == "table":
            lines.append("table =")
            lines += ["    " + ", ".join(repr(float(v)) for v in row) for row in member.matrix()]
        else:
            lines += ["expression = abs-difference", f"scale = {format_number(member.scale)}"]
    graph = config.graph
    lines += ["", "[graph]", f"kind = {graph.kind}"]
    if graph.kind == EXPLICIT:
        lines.append("edges = " + ", ".join(f"{x} -> {y}" for x, y in graph.edges() if x != y))
    if graph.order_set is not None:
        lines.append(f"region = {_interval_literal(graph.order_set.interval)}")
        if graph.order_set.excluded:
            lines.append("excluded = " + ", ".join(format_number(e) for e in graph.order_set.excluded))
    if graph.orientation != FORWARD:
        lines.append(f"orientation = {graph.orientation}")
    mapping = config.mapping
    lines += ["", "[map]"]
    if mapping.kind == "table":
        lines += ["kind = table", "table = " + ", ".join(f"{x} -> {y}" for x, y in zip(carrier.labels, mapping.images))]
    else:
        lines += ["kind = pieces", "pieces ="]
        for piece in mapping.pieces:
            lines.append(
                f"    {_interval_literal(piece.interval)}: slope={format_number(piece.slope)}, "
                f"intercept={format_number(piece.intercept)}, quad={format_number(piece.quad)}"
            )
    settings = config.settings
    lines += [
        "",
        "[analysis]",
        "basis =",
        *("    " + ", ".join(f"{name}:{format_number(r)}" for name, r in e.terms) for e in config.basis),
        f"budget = {settings.budget}",
        f"window = {settings.window}",
        f"eps = {format_number(settings.eps)}",
        f"divergence_bound = {settings.divergence_bound!r}",
        f"sequentially_complete = {str(config.space.sequentially_complete).lower()}",
    ]
    if config.probes:
        lines.append("probes = " + ", ".join(format_number(p) for p in config.probes))
    if config.space.property_star_declared is not None:
        lines.append(f"property_star = {str(config.space.property_star_declared).lower()}")
    for key in ("alpha", "seed", "max_carrier"):
        value = getattr(config, key)
        if value is not None:
            lines.append(f"{key} = {format_number(value) if isinstance(value, Fraction) else value}")
    return "\n".join(lines) + "\n"


def _interval_literal(interval: Interval) -> str:
    left = "[" if interval.lo_closed else "("
    right = "]" if interval.hi_closed else ")"
    lo = "-inf" if interval.lo is None else format_number(interval.lo)
    hi = "inf" if interval.hi is None else format_number(interval.hi)
    return f"{left}{lo}, {hi}{right}"
