"""Call graph over the internal methods of one program."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx

from .exir import ExirProgram, MethodId

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class CallGraph:
    """Resolved call graph with a callee-first analysis order.

    ``order`` lists the strongly connected components so that every component
    comes after all components it calls; members of a component are sorted.
    """

    graph: nx.DiGraph
    order: tuple[tuple[MethodId, ...], ...]

    def callees(self, method: MethodId) -> tuple[MethodId, ...]:
        return tuple(sorted(self.graph.successors(method)))

    def callers(self, method: MethodId) -> tuple[MethodId, ...]:
        return tuple(sorted(self.graph.predecessors(method)))

    def is_recursive(self, method: MethodId) -> bool:
        """True when ``method`` sits on a call cycle (self-calls included)."""
        return any(method in component and (len(component) > 1 or self.graph.has_edge(method, method)) for component in self.order)

    def component_of(self, method: MethodId) -> tuple[MethodId, ...]:
        for component in self.order:
            if method in component:
                return component
        raise KeyError(method)


def build_call_graph(program: ExirProgram) -> CallGraph:
    """Build the call graph of ``program`` and its callee-first SCC order.

    External calls are not nodes of the graph.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(method.id for method in program.methods)
    for edge in program.call_edges:
        if edge.callee is not None:
            graph.add_edge(edge.caller, edge.callee)

    condensed = nx.condensation(graph)
    members = {
        node: tuple(sorted(data["members"]))
        for node, data in condensed.nodes(data=True)
    }
    # Reversed condensation: edges go callee -> caller, so a topological order is callee-first.
    callee_first = condensed.reverse(copy=True)
    ordered = nx.lexicographical_topological_sort(callee_first, key=lambda node: members[node][0])
    order = tuple(members[node] for node in ordered)

    cycles = sum(1 for component in order if len(component) > 1 or graph.has_edge(component[0], component[0]))
    _LOGGER.debug(
        "Call graph of %s: %s methods, %s edges, %s recursive components",
        program.version_label,
        graph.number_of_nodes(),
        graph.number_of_edges(),
        cycles,
    )
    return CallGraph(graph, order)
