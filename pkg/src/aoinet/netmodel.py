"""Network description, text format parser, traffic equations and topology checks.

A network is a set of FCFS single-server nodes with exponential service and a
set of packet classes. Each class enters as a Poisson stream and follows one
fixed itinerary; the implicit source/sink is the start and end of every path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class NetworkError(ValueError):
    """Raised for a network description that violates a structural rule."""


class ParseError(NetworkError):
    """Syntax or validation error in a network document, with its location."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class NodeSpec:
    id: int
    mu: float

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id < 1:
            raise NetworkError(f"node id must be a positive integer, got {self.id!r}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise NetworkError(f"node {self.id}: service rate must be positive, got {self.mu!r}")


@dataclass(frozen=True)
class ClassSpec:
    name: str
    lam: float
    itinerary: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "itinerary", tuple(self.itinerary))
        if not self.name:
            raise NetworkError("class name must be non-empty")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise NetworkError(f"class {self.name}: arrival rate must be positive, got {self.lam!r}")
        if not self.itinerary:
            raise NetworkError(f"class {self.name}: empty itinerary")
        if len(set(self.itinerary)) != len(self.itinerary):
            raise NetworkError(f"class {self.name}: itinerary visits a node twice {self.itinerary}")


@dataclass(frozen=True)
class NetworkSpec:
    nodes: tuple[NodeSpec, ...]
    classes: tuple[ClassSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "classes", tuple(self.classes))
        if not self.nodes:
            raise NetworkError("network has no nodes")
        if not self.classes:
            raise NetworkError("network has no classes")
        ids = [n.id for n in self.nodes]
        dup = _first_duplicate(ids)
        if dup is not None:
            raise NetworkError(f"duplicate node id {dup}")
        dup = _first_duplicate(c.name for c in self.classes)
        if dup is not None:
            raise NetworkError(f"duplicate class name {dup!r}")
        known = set(ids)
        for c in self.classes:
            for node in c.itinerary:
                if node not in known:
                    raise NetworkError(f"class {c.name}: unknown node {node} in itinerary")

    def node(self, node_id: int) -> NodeSpec:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def cls(self, name: str) -> ClassSpec:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def with_class_rate(self, name: str, lam: float) -> "NetworkSpec":
        self.cls(name)
        classes = [ClassSpec(c.name, lam, c.itinerary) if c.name == name else c for c in self.classes]
        return NetworkSpec(self.nodes, classes)

    def with_service_rate(self, node_id: int, mu: float) -> "NetworkSpec":
        self.node(node_id)
        nodes = [NodeSpec(n.id, mu) if n.id == node_id else n for n in self.nodes]
        return NetworkSpec(nodes, self.classes)


@dataclass(frozen=True)
class FlowSolution:
    per_class_node_rate: Mapping[tuple[str, int], float]
    node_total_rate: Mapping[int, float]
    node_load: Mapping[int, float]
    class_node_load: Mapping[tuple[str, int], float]


@dataclass(frozen=True)
class StabilityViolation:
    node: int
    total_rate: float
    mu: float

    def __str__(self):
        return f"node {self.node}: lambda={self.total_rate:.6g} >= mu={self.mu:.6g}"


@dataclass(frozen=True)
class OvertakeViolation:
    classes: tuple[str, str]
    nodes: tuple[int, ...]
    reason: str

    def __str__(self):
        a, b = self.classes
        nodes = ",".join(map(str, self.nodes))
        return f"classes {a}/{b} at nodes {{{nodes}}}: {self.reason}"


def _first_duplicate(items: Iterable):
    seen = set()
    for x in items:
        if x in seen:
            return x
        seen.add(x)
    return None


# --- text format -----------------------------------------------------------

def _parse_float(tok: str, line: int, col: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(f"invalid number {tok!r}", line, col) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite number {tok!r}", line, col)
    return value


def _parse_id(tok: str, line: int, col: int) -> int:
    if not tok.isdigit():
        raise ParseError(f"invalid node id {tok!r}", line, col)
    value = int(tok)
    if value < 1:
        raise ParseError(f"node id must be >= 1, got {value}", line, col)
    return value


def _tokens(text: str):
    """Yield (token, column) pairs, columns 1-based."""
    col = 0
    for tok in text.split():
        col = text.index(tok, col)
        yield tok, col + 1
        col += len(tok)


def _key_values(toks, keys: tuple[str, ...], line: int, keyword_col: int) -> dict[str, tuple[str, int]]:
    found: dict[str, tuple[str, int]] = {}
    for tok, col in toks:
        key, sep, value = tok.partition("=")
        if not sep or key not in keys:
            raise ParseError(f"unexpected token {tok!r} (expected one of {', '.join(k + '=' for k in keys)})", line, col)
        if key in found:
            raise ParseError(f"repeated key {key!r}", line, col)
        if not value:
            raise ParseError(f"missing value for {key!r}", line, col + len(key) + 1)
        found[key] = (value, col + len(key) + 1)
    for key in keys:
        if key not in found:
            raise ParseError(f"missing {key}=", line, keyword_col)
    return found


def parse_network(text: str) -> NetworkSpec:
    """Parse a line-oriented network document.

    Grammar (``#`` starts a comment, tokens separated by whitespace)::

        node <id> mu=<float>
        class <name> lambda=<float> path=<id>[,<id>...]
    """
    nodes: list[NodeSpec] = []
    classes: list[ClassSpec] = []
    node_lines: dict[int, int] = {}
    class_lines: dict[str, int] = {}
    path_cols: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = list(_tokens(body))
        if not toks:
            continue
        (keyword, kcol), rest = toks[0], toks[1:]
        if keyword not in ("node", "class"):
            raise ParseError(f"unknown directive {keyword!r}", lineno, kcol)
        if not rest:
            raise ParseError(f"{keyword} needs an identifier", lineno, kcol)
        (ident, icol), rest = rest[0], rest[1:]

        if keyword == "node":
            node_id = _parse_id(ident, lineno, icol)
            kv = _key_values(rest, ("mu",), lineno, kcol)
            mu = _parse_float(kv["mu"][0], lineno, kv["mu"][1])
            if mu <= 0:
                raise ParseError(f"nonpositive rate mu={mu}", lineno, kv["mu"][1])
            if node_id in node_lines:
                raise ParseError(f"duplicate node id {node_id} (first defined on line {node_lines[node_id]})", lineno, icol)
            node_lines[node_id] = lineno
            nodes.append(NodeSpec(node_id, mu))
        else:
            if "=" in ident:
                raise ParseError("class needs a name before its keys", lineno, icol)
            kv = _key_values(rest, ("lambda", "path"), lineno, kcol)
            lam = _parse_float(kv["lambda"][0], lineno, kv["lambda"][1])
            if lam <= 0:
                raise ParseError(f"nonpositive rate lambda={lam}", lineno, kv["lambda"][1])
            path_text, pcol = kv["path"]
            path = []
            offset = 0
            for part in path_text.split(","):
                path.append(_parse_id(part, lineno, pcol + offset))
                offset += len(part) + 1
            if ident in class_lines:
                raise ParseError(f"duplicate class name {ident!r} (first defined on line {class_lines[ident]})", lineno, icol)
            dup = _first_duplicate(path)
            if dup is not None:
                raise ParseError(f"path visits node {dup} twice", lineno, pcol)
            class_lines[ident] = lineno
            path_cols[ident] = pcol
            classes.append(ClassSpec(ident, lam, tuple(path)))

    if not nodes:
        raise ParseError("document defines no nodes", max(1, len(text.splitlines())))
    if not classes:
        raise ParseError("document defines no classes", max(1, len(text.splitlines())))
    for c in classes:
        for node_id in c.itinerary:
            if node_id not in node_lines:
                raise ParseError(f"unknown node {node_id} in path of class {c.name!r}",
                                 class_lines[c.name], path_cols[c.name])
    return NetworkSpec(tuple(nodes), tuple(classes))


def format_network(net: NetworkSpec) -> str:
    """Inverse of :func:`parse_network` (round-trips exactly)."""
    lines = [f"node {n.id} mu={n.mu!r}" for n in net.nodes]
    lines += [f"class {c.name} lambda={c.lam!r} path={','.join(map(str, c.itinerary))}" for c in net.classes]
    return "\n".join(lines) + "\n"


# --- traffic equations and checks -------------------------------------------

def solve_traffic(net: NetworkSpec) -> FlowSolution:
    """Equilibrium per-class and total rates at every node.

    With 0/1 routing each class contributes its exogenous rate to exactly the
    nodes on its itinerary, which is the exact solution of the balance equations.
    """
    per_class: dict[tuple[str, int], float] = {}
    for c in net.classes:
        on_path = set(c.itinerary)
        for n in net.nodes:
            per_class[(c.name, n.id)] = c.lam if n.id in on_path else 0.0

    total: dict[int, float] = {}
    load: dict[int, float] = {}
    class_load: dict[tuple[str, int], float] = {}
    # sum in sorted class-name order so the result does not depend on declaration order
    names = sorted(c.name for c in net.classes)
    for n in net.nodes:
        rates = [per_class[(name, n.id)] for name in names]
        total[n.id] = math.fsum(rates)
        load[n.id] = total[n.id] / n.mu
        for name in names:
            class_load[(name, n.id)] = per_class[(name, n.id)] / n.mu
    return FlowSolution(per_class, total, load, class_load)


def check_stability(flow: FlowSolution, net: NetworkSpec) -> list[StabilityViolation]:
    """One violation per node with total rate >= service rate (strict stability)."""
    return [
        StabilityViolation(n.id, flow.node_total_rate[n.id], n.mu)
        for n in sorted(net.nodes, key=lambda n: n.id)
        if not flow.node_total_rate[n.id] < n.mu
    ]


def _pair_violation(a: ClassSpec, b: ClassSpec) -> OvertakeViolation | None:
    pos_a = {node: i for i, node in enumerate(a.itinerary)}
    pos_b = {node: i for i, node in enumerate(b.itinerary)}
    common = [node for node in a.itinerary if node in pos_b]
    if len(common) < 2:
        return None
    order_b = [pos_b[node] for node in common]
    pair = (a.name, b.name)
    if order_b != sorted(order_b):
        return OvertakeViolation(pair, tuple(common), "shared nodes visited in different order")
    for name, idx in ((a.name, [pos_a[x] for x in common]), (b.name, order_b)):
        if idx[-1] - idx[0] != len(idx) - 1:
            return OvertakeViolation(pair, tuple(common), f"shared nodes not contiguous on path of {name} (forward short-circuit)")
    return None


def check_overtake_free(net: NetworkSpec) -> list[OvertakeViolation]:
    """Conservative overtake-freeness check.

    Accepts a network when every itinerary is duplicate-free and every pair of
    itineraries shares its common nodes as one contiguous segment traversed in
    the same order. This is sufficient, not necessary: some harmless
    topologies (e.g. backward short-circuits) are reported as violations.
    """
    out: list[OvertakeViolation] = []
    for c in net.classes:
        dup = _first_duplicate(c.itinerary)
        if dup is not None:
            out.append(OvertakeViolation((c.name, c.name), (dup,), "itinerary is not cycle-free"))
    classes = sorted(net.classes, key=lambda c: c.name)
    for i, a in enumerate(classes):
        for b in classes[i + 1:]:
            v = _pair_violation(a, b)
            if v is not None:
                out.append(v)
    return out
