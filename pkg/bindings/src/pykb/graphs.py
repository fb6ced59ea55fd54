"""Undirected-graph knowledge bases built on the bindings.

:class:`GraphKB` holds the graph itself: a node type plus an adjacency
list whose symmetric closure is the edge relation.  Transitive closures
over any binary relation can be added by name.  The module-level helpers
assemble the three classic checks on top: full connectivity, component
counting, and cycle detection.
"""

from .kb import KB

__all__ = ["GraphKB", "connected_kb", "components_kb", "cyclic_kb", "is_tree"]


class GraphKB(KB):

    def __init__(self, nodes=(0,), adj_list=(), **options):
        super().__init__("graph", **options)
        self.Type("Node", list(nodes))
        self.Predicate("Adjacent(Node, Node)", list(adj_list))
        self.Define("Edge(Node, Node)",
                    "lambda x, y: Adjacent(x, y) or Adjacent(y, x)")

    def add_TC(self, original, tc_name):
        """Define ``tc_name`` as the transitive closure of ``original``."""
        # the recursive step must go through the closure itself; stepping
        # through the original twice would stop at paths of length two
        formula = ("lambda x, y: {0}(x, y) or "
                   "any({0}(x, z) and {1}(z, y) for z in Node)").format(
                       original, tc_name)
        self.Define(tc_name + "(Node, Node)", formula)

    def define_TC(self, tc_name, original):
        """Alias of :meth:`add_TC` with the closure named first."""
        self.add_TC(original, tc_name)


def connected_kb(nodes, adj_list=()):
    """Satisfiable iff every node reaches every other node."""
    kb = GraphKB(nodes, adj_list)
    kb.define_TC("Path", "Edge")
    # the x != y guard keeps the one-node graph connected: a closure
    # built from zero edges holds no loops
    kb.Constraint("all(Path(x, y) for x in Node for y in Node if x != y)")
    return kb


def components_kb(nodes, adj_list=()):
    """Models pick one root per connected component."""
    kb = GraphKB(nodes, adj_list)
    kb.define_TC("Path", "Edge")
    kb.Predicate("Root(Node)")
    kb.Constraint("all(any(Path(r, x) for r in Root) "
                  "for x in Node if not Root(x))")
    kb.Constraint("not any(Path(x, y) for x in Root for y in Root if x != y)")
    return kb


def cyclic_kb(nodes, adj_list=()):
    """Satisfiable iff the graph contains a cycle.

    Traverse picks a one-way orientation of some edges; a cycle exists
    exactly when such a walk can return to its start.
    """
    kb = GraphKB(nodes, adj_list, unfold_depth=max(len(list(nodes)), 1))
    kb.Predicate("Traverse(Node, Node)")
    kb.Constraint("all(Edge(x, y) for (x, y) in Traverse)")
    kb.Constraint("not any(Traverse(y, x) for (x, y) in Traverse)")
    kb.define_TC("TravTC", "Traverse")
    kb.Constraint("any(TravTC(x, x) for x in Node)")
    return kb


def is_tree(nodes, adj_list):
    """Connected and acyclic; the one-node graph with no edges counts."""
    nodes = list(nodes)
    return (bool(connected_kb(nodes, adj_list).satisfiable)
            and not bool(cyclic_kb(nodes, adj_list).satisfiable))
