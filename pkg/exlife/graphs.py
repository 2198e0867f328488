"""Control flow graphs, post-dominators, control dependence and pre-paths."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx

from .const import DEFAULT_LOOP_UNROLL, DEFAULT_PATH_CAP
from .exir import ExirMethod, StatementKind, format_statement

_LOGGER = logging.getLogger(__name__)

ENTRY = -1

Successor = tuple[int, bool | None]


@dataclass(frozen=True)
class Cfg:
    """Control flow graph of one method.

    Nodes are statement indices plus ``ENTRY`` (-1) and ``exit`` (the statement
    count). ``successors`` keeps every outgoing edge in DFS order (fallthrough
    first) with its branch label: ``False``/``True`` for the two edges of an
    ``if-goto``, ``None`` otherwise. ``synthetic`` holds the nodes that were given
    an extra edge to EXIT because they could not reach it.
    """

    method: ExirMethod
    successors: dict[int, tuple[Successor, ...]]
    synthetic: frozenset[int] = frozenset()

    @property
    def exit(self) -> int:
        return len(self.method.body)

    @property
    def nodes(self) -> tuple[int, ...]:
        return (ENTRY, *range(len(self.method.body)), self.exit)

    @cached_property
    def graph(self) -> nx.DiGraph:
        """Plain digraph view, synthetic exit edges included."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        for source, targets in self.successors.items():
            for target, _ in targets:
                graph.add_edge(source, target)
        for node in self.synthetic:
            graph.add_edge(node, self.exit)
        return graph

    def edges(self, *, include_synthetic: bool = True) -> list[tuple[int, int, bool | None]]:
        result = [(source, target, branch) for source, targets in self.successors.items() for target, branch in targets]
        if include_synthetic:
            result.extend((node, self.exit, None) for node in sorted(self.synthetic))
        return result

    def condition_nodes(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.method.body if s.kind is StatementKind.IF_GOTO)

    @cached_property
    def ipdom(self) -> dict[int, int]:
        """Immediate post-dominator of every node except EXIT."""
        idom = nx.immediate_dominators(self.graph.reverse(copy=False), self.exit)
        return {node: parent for node, parent in idom.items() if node != self.exit}

    def post_dominates(self, dominator: int, node: int) -> bool:
        """True when every path from ``node`` to EXIT passes ``dominator`` (reflexive)."""
        current = node
        while True:
            if current == dominator:
                return True
            if current == self.exit or current not in self.ipdom:
                return False
            current = self.ipdom[current]


def build_cfg(method: ExirMethod) -> Cfg:
    """Build the CFG of ``method``; nodes that cannot reach EXIT get a synthetic exit edge."""
    body = method.body
    exit_node = len(body)
    successors: dict[int, tuple[Successor, ...]] = {ENTRY: ((0 if body else exit_node, None),)}
    for statement in body:
        index = statement.index
        fallthrough = index + 1
        match statement.kind:
            case StatementKind.THROW | StatementKind.RETURN:
                successors[index] = ((exit_node, None),)
            case StatementKind.GOTO:
                successors[index] = ((method.target_of(statement.jump or ""), None),)
            case StatementKind.IF_GOTO:
                successors[index] = ((fallthrough, False), (method.target_of(statement.jump or ""), True))
            case _:
                successors[index] = ((fallthrough, None),)

    graph = nx.DiGraph()
    graph.add_nodes_from(range(ENTRY, exit_node + 1))
    graph.add_edges_from((source, target) for source, targets in successors.items() for target, _ in targets)
    synthetic: set[int] = set()
    while True:
        reaching = nx.ancestors(graph, exit_node) | {exit_node}
        stuck = [node for node in range(len(body)) if node not in reaching and nx.has_path(graph, ENTRY, node)]
        stuck = stuck or [node for node in range(len(body)) if node not in reaching]
        if not stuck:
            break
        plain = [node for node in stuck if body[node].kind is not StatementKind.IF_GOTO]
        chosen = max(plain or stuck)
        synthetic.add(chosen)
        graph.add_edge(chosen, exit_node)
    if synthetic:
        _LOGGER.debug("%s: synthetic exit edges from %s", method.id, sorted(synthetic))
    return Cfg(method, successors, frozenset(synthetic))


@dataclass(frozen=True)
class Cdg:
    """Control dependence graph: edge ``c -> n`` labelled with the branch of ``c``."""

    cfg: Cfg
    graph: nx.DiGraph = field(repr=False)

    def parents(self, node: int) -> frozenset[int]:
        """Conditions ``node`` is directly control-dependent on."""
        return frozenset(self.graph.predecessors(node)) if node in self.graph else frozenset()

    def ancestors(self, node: int) -> frozenset[int]:
        """Transitive control-dependence ancestors of ``node``."""
        return frozenset(nx.ancestors(self.graph, node)) if node in self.graph else frozenset()

    def branch(self, condition: int, node: int) -> bool | None:
        return self.graph.edges[condition, node]["branch"]

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.graph.edges())


def control_dependence(cfg: Cfg) -> Cdg:
    """Compute control dependences by walking the post-dominator tree from each branch target."""
    graph = nx.DiGraph()
    graph.add_nodes_from(cfg.nodes)
    ipdom = cfg.ipdom
    for source, target, branch in cfg.edges():
        if source == ENTRY or cfg.post_dominates(target, source):
            continue
        stop = ipdom.get(source)
        runner: int | None = target
        while runner is not None and runner != stop:
            if runner != source and not graph.has_edge(source, runner):
                graph.add_edge(source, runner, branch=branch)
            if runner == cfg.exit:
                break
            runner = ipdom.get(runner)
    return Cdg(cfg, graph)


@dataclass(frozen=True)
class PrePath:
    """Statement sequence from the first statement to a throw site.

    ``taken[i]`` is the branch label of the edge leaving ``nodes[i]``; the last
    entry (the site itself) is always ``None``.
    """

    nodes: tuple[int, ...]
    taken: tuple[bool | None, ...]

    @property
    def site(self) -> int:
        return self.nodes[-1]


@dataclass(frozen=True)
class PrePathSet:
    paths: tuple[PrePath, ...]
    truncated: bool = False

    @property
    def unreachable(self) -> bool:
        return not self.paths


def enumerate_prepaths(
    cfg: Cfg,
    site: int,
    path_cap: int = DEFAULT_PATH_CAP,
    loop_unroll: int = DEFAULT_LOOP_UNROLL,
) -> PrePathSet:
    """Enumerate entry-to-``site`` paths in deterministic DFS order.

    With ``loop_unroll`` 1 every edge is used at most once per path, so each loop
    body is traversed zero or one times; with 0 no node repeats. Synthetic exit
    edges are never followed.

    :param cfg: Control flow graph of the method.
    :param site: Statement index of the target (normally a throw).
    :param path_cap: Maximum number of paths kept.
    :param loop_unroll: 0 or 1.
    """
    plain = nx.DiGraph()
    plain.add_nodes_from(cfg.nodes)
    plain.add_edges_from((s, t) for s, t, _ in cfg.edges(include_synthetic=False))
    useful = nx.ancestors(plain, site) | {site}
    if ENTRY not in useful:
        return PrePathSet(())

    paths: list[PrePath] = []
    truncated = False
    nodes: list[int] = []
    taken: list[bool | None] = []
    used_edges: set[tuple[int, int, bool | None]] = set()
    on_path: dict[int, int] = {}

    def visit(node: int) -> bool:
        nonlocal truncated
        if node == site:
            if len(paths) >= path_cap:
                truncated = True
                return False
            paths.append(PrePath((*nodes, site), (*taken, None)))
            return True
        for target, branch in cfg.successors.get(node, ()):
            if target not in useful:
                continue
            edge = (node, target, branch)
            if edge in used_edges:
                continue
            if loop_unroll == 0 and on_path.get(target, 0):
                continue
            used_edges.add(edge)
            if node != ENTRY:
                nodes.append(node)
                taken.append(branch)
            on_path[target] = on_path.get(target, 0) + 1
            keep_going = visit(target)
            on_path[target] -= 1
            if node != ENTRY:
                nodes.pop()
                taken.pop()
            used_edges.discard(edge)
            if not keep_going:
                return False
        return True

    visit(ENTRY)
    if truncated:
        _LOGGER.warning("%s: more than %s paths to statement %s, keeping the first ones", cfg.method.id, path_cap, site)
    return PrePathSet(tuple(paths), truncated)


# --- DOT ---------------------------------------------------------------------------


def _label(cfg: Cfg, node: int) -> str:
    if node == ENTRY:
        return "ENTRY"
    if node == cfg.exit:
        return "EXIT"
    text = f"{node}: {format_statement(cfg.method.body[node])}"
    return text.replace("\\", "\\\\").replace('"', '\\"')


def cfg_to_dot(cfg: Cfg) -> str:
    lines = [f'digraph "{cfg.method.id}" {{']
    lines.extend(f'  n{node + 1} [label="{_label(cfg, node)}"];' for node in cfg.nodes)
    for source, target, branch in cfg.edges(include_synthetic=False):
        attr = "" if branch is None else f' [label="{str(branch).lower()}"]'
        lines.append(f"  n{source + 1} -> n{target + 1}{attr};")
    lines.extend(f"  n{node + 1} -> n{cfg.exit + 1} [style=dashed];" for node in sorted(cfg.synthetic))
    lines.append("}")
    return "\n".join(lines) + "\n"


def cdg_to_dot(cdg: Cdg) -> str:
    cfg = cdg.cfg
    lines = [f'digraph "{cfg.method.id} cdg" {{']
    lines.extend(f'  n{node + 1} [label="{_label(cfg, node)}"];' for node in cfg.nodes)
    for source, target in sorted(cdg.graph.edges()):
        branch = cdg.branch(source, target)
        attr = "" if branch is None else f' [label="{str(branch).lower()}"]'
        lines.append(f"  n{source + 1} -> n{target + 1}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
