"""DAGs, CPDAGs, Meek closure, and consistent-extension enumeration."""

from __future__ import annotations

import warnings
from dataclasses import dataclass


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    """Edge set contains a directed cycle."""


class MeekConflictError(GraphError):
    """Orientation rules demanded both directions of one edge; the pattern
    admits no consistent extension (faithfulness violation)."""


class ExtensionCapError(GraphError):
    """Markov equivalence class is larger than the enumeration cap."""


class InconsistentCpdagError(GraphError):
    """Partially directed graph with no consistent extension."""


def _check_edges(p, edges, kind):
    for a, b in edges:
        if a == b:
            raise GraphError(f"self-loop at node {a}")
        if not (0 <= a < p and 0 <= b < p):
            raise GraphError(f"{kind} edge ({a}, {b}) outside 0..{p - 1}")


def _topological_order(p, edges):
    """Kahn ordering, or None if the directed edges contain a cycle."""
    children = {i: set() for i in range(p)}
    indeg = {i: 0 for i in range(p)}
    for a, b in edges:
        if b not in children[a]:
            children[a].add(b)
            indeg[b] += 1
    frontier = sorted(i for i in range(p) if indeg[i] == 0)
    order = []
    while frontier:
        node = frontier.pop()
        order.append(node)
        for ch in sorted(children[node]):
            indeg[ch] -= 1
            if indeg[ch] == 0:
                frontier.append(ch)
    return order if len(order) == p else None


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph on nodes 0..p-1."""

    p: int
    edges: frozenset

    def __init__(self, p: int, edges):
        edges = frozenset((int(a), int(b)) for a, b in edges)
        _check_edges(p, edges, "directed")
        if _topological_order(p, edges) is None:
            raise CycleError("edge set contains a directed cycle")
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "edges", edges)

    def parents(self, i: int) -> frozenset:
        if not 0 <= i < self.p:
            raise GraphError(f"node {i} outside 0..{self.p - 1}")
        return frozenset(a for a, b in self.edges if b == i)

    def adjacent(self, i: int) -> frozenset:
        return frozenset(a for a, b in self.edges if b == i) | frozenset(
            b for a, b in self.edges if a == i)

    def sorted_edges(self) -> list:
        return sorted(self.edges)


@dataclass(frozen=True)
class Cpdag:
    """Pattern with directed (compelled) and undirected (reversible) edges."""

    p: int
    directed: frozenset
    undirected: frozenset

    def __init__(self, p: int, directed, undirected):
        directed = frozenset((int(a), int(b)) for a, b in directed)
        undirected = frozenset(tuple(sorted((int(a), int(b)))) for a, b in undirected)
        _check_edges(p, directed, "directed")
        _check_edges(p, undirected, "undirected")
        dir_skel = {tuple(sorted(e)) for e in directed}
        if dir_skel & set(undirected):
            raise GraphError("an edge cannot be both directed and undirected")
        if any((b, a) in directed for a, b in directed):
            raise GraphError("edge directed both ways")
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)

    def skeleton(self) -> frozenset:
        return frozenset(tuple(sorted(e)) for e in self.directed) | self.undirected


def _adjacency(p, directed, undirected):
    adj = {i: set() for i in range(p)}
    for a, b in directed:
        adj[a].add(b)
        adj[b].add(a)
    for a, b in undirected:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _meek_proposals(p, directed, undirected, adj):
    """Orientations demanded by rules R1-R4 on the current pattern."""
    proposals = set()
    parents = {i: set() for i in range(p)}
    children = {i: set() for i in range(p)}
    for a, b in directed:
        parents[b].add(a)
        children[a].add(b)
    und_nbrs = {i: set() for i in range(p)}
    for a, b in undirected:
        und_nbrs[a].add(b)
        und_nbrs[b].add(a)

    for b, c in list(undirected) + [(c, b) for b, c in undirected]:
        # R1: a -> b, b - c, a and c nonadjacent  =>  b -> c
        if any(a not in adj[c] and a != c for a in parents[b]):
            proposals.add((b, c))
        # R2: b -> k -> c with b - c  =>  b -> c
        if children[b] & parents[c]:
            proposals.add((b, c))
        # R3: b - c, b - d1, b - d2, d1 -> c, d2 -> c, d1 and d2 nonadjacent
        pts = sorted(und_nbrs[b] & parents[c])
        if any(d2 not in adj[d1]
               for i, d1 in enumerate(pts) for d2 in pts[i + 1:]):
            proposals.add((b, c))
        # R4: b - c, b - d, d -> e, e -> c, c and d nonadjacent  =>  b -> c
        for d in und_nbrs[b]:
            if d == c or c in adj[d]:
                continue
            if children[d] & parents[c]:
                proposals.add((b, c))
                break
    return proposals


def meek_close(c: Cpdag, on_conflict: str = "error") -> Cpdag:
    """Fixpoint of the orientation-propagation rules R1-R4.

    ``on_conflict`` chooses what happens when a sweep demands both directions
    of one edge: "error" raises MeekConflictError, "undirect" freezes the
    edge as undirected with a warning.
    """
    directed = set(c.directed)
    undirected = set(c.undirected)
    locked = set()
    adj = _adjacency(c.p, directed, undirected)
    while True:
        live = undirected - locked
        proposals = _meek_proposals(c.p, directed, undirected, adj)
        proposals = {(a, b) for a, b in proposals
                     if tuple(sorted((a, b))) in live}
        conflicted = {tuple(sorted((a, b))) for a, b in proposals
                      if (b, a) in proposals}
        if conflicted:
            if on_conflict == "error":
                raise MeekConflictError(
                    f"both orientations forced for edge(s) {sorted(conflicted)}")
            warnings.warn(f"orientation conflict on {sorted(conflicted)}; "
                          "leaving undirected", UserWarning, stacklevel=2)
            locked |= conflicted
            proposals = {(a, b) for a, b in proposals
                         if tuple(sorted((a, b))) not in conflicted}
        if not proposals:
            break
        for a, b in proposals:
            undirected.discard(tuple(sorted((a, b))))
            directed.add((a, b))
    return Cpdag(c.p, directed, undirected)


def _v_structures(p, directed, skeleton_adj):
    """Collider triples a -> k <- b with a, b nonadjacent, as arrow pairs."""
    parents = {i: set() for i in range(p)}
    for a, b in directed:
        parents[b].add(a)
    out = set()
    for k in range(p):
        pts = sorted(parents[k])
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                if b not in skeleton_adj[a]:
                    out.add((a, k, b))
    return out


def cpdag_of(g: Dag) -> Cpdag:
    """Pattern of the Markov equivalence class of ``g``: skeleton plus
    collider orientations, closed under the Meek rules."""
    skeleton = {tuple(sorted(e)) for e in g.edges}
    skel_adj = {i: set() for i in range(g.p)}
    for a, b in skeleton:
        skel_adj[a].add(b)
        skel_adj[b].add(a)
    arrows = set()
    for a, k, b in _v_structures(g.p, g.edges, skel_adj):
        arrows.add((a, k))
        arrows.add((b, k))
    arrow_skel = {tuple(sorted(x)) for x in arrows}
    undirected = {e for e in skeleton if e not in arrow_skel}
    return meek_close(Cpdag(g.p, arrows, undirected))


def enumerate_extensions(c: Cpdag, cap: int = 256) -> list:
    """All consistent extensions of ``c``: acyclic orientations of the
    undirected edges that create no new collider. Branch on one undirected
    edge, re-close with the Meek rules, recurse; deduplicated.

    Raises ExtensionCapError when the class holds more than ``cap`` members
    and InconsistentCpdagError when it is empty.
    """
    if cap < 1:
        raise GraphError("cap must be at least 1")
    try:
        root = meek_close(c)
    except MeekConflictError as exc:
        raise InconsistentCpdagError(str(exc)) from exc
    found = {}
    stack = [root]
    while stack:
        g = stack.pop()
        if not g.undirected:
            try:
                d = Dag(g.p, g.directed)
            except CycleError:
                continue
            if d.edges not in found:
                found[d.edges] = d
                if len(found) > cap:
                    raise ExtensionCapError(
                        f"more than {cap} consistent extensions")
            continue
        a, b = min(g.undirected)
        rest = g.undirected - {(a, b)}
        for u, v in ((a, b), (b, a)):
            try:
                nxt = meek_close(Cpdag(g.p, set(g.directed) | {(u, v)}, rest))
            except MeekConflictError:
                continue
            stack.append(nxt)
    if not found:
        raise InconsistentCpdagError("pattern admits no consistent extension")
    return [found[k] for k in sorted(found, key=lambda e: sorted(e))]


# -- edge-list exchange format -----------------------------------------------


def parse_edge_list(text: str, p: int | None = None) -> Cpdag:
    """Parse the "i -> j" / "i -- j" one-edge-per-line format."""
    directed, undirected, nodes = set(), set(), set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        for sep, bucket in ((" -> ", directed), (" -- ", undirected)):
            if sep in line:
                left, right = line.split(sep, 1)
                try:
                    a, b = int(left), int(right)
                except ValueError:
                    raise GraphError(f"line {lineno}: bad node id in {line!r}") from None
                bucket.add((a, b))
                nodes.update((a, b))
                break
        else:
            raise GraphError(f"line {lineno}: expected 'i -> j' or 'i -- j', got {line!r}")
    if not nodes:
        raise GraphError("empty graph file")
    size = max(nodes) + 1 if p is None else p
    return Cpdag(size, directed, undirected)


def format_edge_list(c: Cpdag) -> str:
    lines = [f"{a} -> {b}" for a, b in sorted(c.directed)]
    lines += [f"{a} -- {b}" for a, b in sorted(c.undirected)]
    return "\n".join(lines) + "\n"
