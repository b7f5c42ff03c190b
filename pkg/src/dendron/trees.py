"""Rooted non-planar trees whose vertices may have any arity, including zero.

A tree is a finite set of edges, one of which is the root, plus a set of
vertices.  Every vertex has a single out-edge (pointing toward the root) and
a finite, possibly empty, set of in-edges.  Edges that are nobody's out-edge
are the leaves; a vertex with no in-edges caps its out-edge, which therefore
does not count as a leaf.  The edge-only tree is both its own root and its
own single leaf.

Edges are opaque hashable names.  Nothing here is planar: in-edges are sets,
and isomorphism is decided through a canonical code built from sorted child
codes.
"""

from __future__ import annotations

import itertools
import json
from enum import Enum


class TreeError(ValueError):
    """Base class for malformed-tree errors."""


class DanglingEdge(TreeError):
    """A vertex references an edge that is not in the edge set."""


class MultipleParents(TreeError):
    """An edge is claimed by more than one vertex on the same side."""


class RootHasParent(TreeError):
    """The root appears among some vertex's in-edges."""


class Disconnected(TreeError):
    """Some edge cannot be reached from the root."""


class Cyclic(TreeError):
    """Following out-edges from some edge never reaches the root."""


class SiteNotLeafOrRoot(TreeError):
    """Grafting was requested at an edge that is neither a leaf nor the root."""


def sort_key(edge):
    """Total order on edge names of mixed types.

    Ints sort before strings before tuples before everything else; tuples
    compare componentwise through the same key.  Used everywhere iteration
    order must be reproducible across runs.
    """
    if isinstance(edge, bool):
        return (0, int(edge))
    if isinstance(edge, int):
        return (0, edge)
    if isinstance(edge, str):
        return (1, edge)
    if isinstance(edge, tuple):
        return (2, tuple(sort_key(x) for x in edge))
    return (3, type(edge).__name__, repr(edge))


class Tree:
    """Immutable rooted tree.  Validates its input on construction."""

    def __init__(self, edges, root, vertices):
        self.edges = frozenset(edges)
        self.root = root
        vs = []
        for out, ins in vertices:
            vs.append((out, frozenset(ins)))
        vs.sort(key=lambda v: sort_key(v[0]))
        self.vertices = tuple(vs)
        self._validate()
        # derived, filled by _validate
        self._code_cache = None
        self._order_cache = None

    def _validate(self):
        if self.root not in self.edges:
            raise DanglingEdge(f"root {self.root!r} is not an edge")
        children = {}
        parent = {}
        for out, ins in self.vertices:
            if out not in self.edges:
                raise DanglingEdge(f"out-edge {out!r} is not an edge")
            if out in children:
                raise MultipleParents(f"edge {out!r} is the out-edge of two vertices")
            children[out] = ins
            for e in ins:
                if e not in self.edges:
                    raise DanglingEdge(f"in-edge {e!r} is not an edge")
                if e in parent:
                    raise MultipleParents(f"edge {e!r} is an in-edge of two vertices")
                parent[e] = out
        if self.root in parent:
            raise RootHasParent(f"root {self.root!r} hangs under a vertex")
        self._children = children
        self._parent = parent
        # walk up from the root; everything must be met exactly once
        seen = {self.root}
        frontier = [self.root]
        while frontier:
            e = frontier.pop()
            for c in children.get(e, ()):
                if c in seen:
                    raise Cyclic(f"edge {c!r} is reachable twice")
                seen.add(c)
                frontier.append(c)
        if seen != self.edges:
            stray = min(self.edges - seen, key=sort_key)
            walked = set()
            e = stray
            while e in parent and e not in walked:
                walked.add(e)
                e = parent[e]
            if e in walked:
                raise Cyclic(f"edge {stray!r} sits on an out-edge cycle")
            raise Disconnected(f"edge {stray!r} never reaches the root")
        self.leaves = tuple(sorted((e for e in self.edges if e not in children),
                                   key=sort_key))
        anc = {}

        def ancestors_of(e):
            if e not in anc:
                chain = [e]
                while chain[-1] in parent:
                    chain.append(parent[chain[-1]])
                anc[e] = tuple(chain)
            return anc[e]

        for e in self.edges:
            ancestors_of(e)
        self._ancestors = anc

    # --- basic geometry -------------------------------------------------

    def children_of(self, edge):
        """In-edges of the vertex atop `edge`, or None if no vertex is there."""
        return self._children.get(edge)

    def parent_of(self, edge):
        """Out-edge of the vertex below `edge`, or None at the root."""
        return self._parent.get(edge)

    def ancestors(self, edge):
        """Edges on the path from `edge` down to the root, inclusive."""
        return self._ancestors[edge]

    def depth(self, edge):
        return len(self._ancestors[edge]) - 1

    def le(self, x, y):
        """True iff the path from x to the root passes through y."""
        return y in self._ancestors[x]

    def is_leaf(self, edge):
        return edge not in self._children

    def is_inner(self, edge):
        """Inner edges touch a vertex on both ends."""
        return edge in self._children and edge in self._parent

    @property
    def inner_edges(self):
        return tuple(sorted((e for e in self.edges if self.is_inner(e)),
                            key=sort_key))

    def sorted_edges(self):
        return tuple(sorted(self.edges, key=sort_key))

    # --- identity --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return (self.root == other.root and self.edges == other.edges
                and self.vertices == other.vertices)

    def __hash__(self):
        return hash((self.root, self.edges, self.vertices))

    def __repr__(self):
        return (f"<Tree root={self.root!r} {len(self.edges)} edges "
                f"{len(self.vertices)} vertices>")

    # --- canonical structure ----------------------------------------------

    def edge_codes(self):
        """Canonical integer-sequence code of the subtree above each edge."""
        if self._code_cache is None:
            codes = {}

            def code(e):
                if e not in codes:
                    ins = self._children.get(e)
                    if ins is None:
                        codes[e] = (0,)
                    else:
                        subs = sorted(code(c) for c in ins)
                        flat = [1, len(subs)]
                        for s in subs:
                            flat.extend(s)
                        codes[e] = tuple(flat)
                return codes[e]

            code(self.root)
            self._code_cache = codes
        return self._code_cache

    def canonical_edge_order(self):
        """Deterministic edge listing: preorder, children sorted by code."""
        if self._order_cache is None:
            codes = self.edge_codes()
            order = []

            def walk(e):
                order.append(e)
                ins = self._children.get(e)
                if ins:
                    for c in sorted(ins, key=lambda x: (codes[x], sort_key(x))):
                        walk(c)

            walk(self.root)
            self._order_cache = tuple(order)
        return self._order_cache


class CanonicalForm:
    """Isomorphism-class fingerprint: a flat tuple of small ints."""

    __slots__ = ("code",)

    def __init__(self, code):
        self.code = tuple(code)

    def __eq__(self, other):
        if not isinstance(other, CanonicalForm):
            return NotImplemented
        return self.code == other.code

    def __lt__(self, other):
        return self.code < other.code

    def __hash__(self):
        return hash(self.code)

    def __repr__(self):
        return f"CanonicalForm{self.code!r}"


def validate_tree(edges, root, vertices):
    """Build a Tree, raising a typed TreeError on malformed input."""
    return Tree(edges, root, vertices)


def canonical_form(tree):
    return CanonicalForm(tree.edge_codes()[tree.root])


def single_edge(name="e"):
    """The tree with one edge, no vertices."""
    return Tree([name], name, [])


def corolla(n, root="r", leaf_prefix="l"):
    """One vertex with n in-edges; n = 0 gives the stump."""
    leaves = [f"{leaf_prefix}{i}" for i in range(n)]
    return Tree([root] + leaves, root, [(root, leaves)])


def linear_tree(k, prefix="e"):
    """k unary vertices stacked over the root; k + 1 edges."""
    edges = [f"{prefix}{i}" for i in range(k + 1)]
    vertices = [(edges[i], [edges[i + 1]]) for i in range(k)]
    return Tree(edges, edges[0], vertices)


def relabel(tree, mapping):
    """Rename edges through a bijection given as a dict."""
    if set(mapping) != tree.edges:
        raise DanglingEdge("relabel mapping must cover the edge set exactly")
    if len(set(mapping.values())) != len(mapping):
        raise MultipleParents("relabel mapping must be injective")
    return Tree([mapping[e] for e in tree.edges], mapping[tree.root],
                [(mapping[o], [mapping[e] for e in ins])
                 for o, ins in tree.vertices])


def relabel_canonical(tree, prefix="e"):
    """Rename edges e0, e1, ... following the canonical edge order."""
    order = tree.canonical_edge_order()
    return relabel(tree, {e: f"{prefix}{i}" for i, e in enumerate(order)})


def all_isomorphisms(src, dst):
    """Yield every root-preserving structure bijection src -> dst as a dict."""
    cs, cd = src.edge_codes(), dst.edge_codes()
    if cs[src.root] != cd[dst.root]:
        return

    def match(es, ed):
        # both subtrees already known to share a code
        ins_s = src.children_of(es)
        ins_d = dst.children_of(ed)
        if ins_s is None:
            yield {es: ed}
            return
        groups = {}
        for c in ins_s:
            groups.setdefault(cs[c], [[], []])[0].append(c)
        for c in ins_d:
            groups[cd[c]][1].append(c)
        group_list = [(sorted(a, key=sort_key), sorted(b, key=sort_key))
                      for _, (a, b) in sorted(groups.items())]

        def per_group(idx):
            if idx == len(group_list):
                yield {es: ed}
                return
            a, b = group_list[idx]
            for perm in itertools.permutations(b):
                child_iters = [match(x, y) for x, y in zip(a, perm)]
                for combo in itertools.product(*child_iters):
                    for rest in per_group(idx + 1):
                        out = dict(rest)
                        for d in combo:
                            out.update(d)
                        yield out

        yield from per_group(0)

    yield from match(src.root, dst.root)


def are_isomorphic(src, dst):
    """One witnessing edge bijection, or None."""
    return next(all_isomorphisms(src, dst), None)


def spanned_subtree(tree, root_edge, leaf_set):
    """The unique subtree with the given root and exact leaf set, or None.

    Growth from the root stops at demanded leaves and otherwise must keep
    climbing, pulling in whole vertices (stumps included).  Failure means no
    such subtree exists.
    """
    leaf_set = frozenset(leaf_set)
    if root_edge not in tree.edges:
        return None
    included = {root_edge}
    vertex_outs = []
    frontier = [root_edge]
    while frontier:
        e = frontier.pop()
        if e in leaf_set:
            continue
        ins = tree.children_of(e)
        if ins is None:
            return None  # forced leaf that was not asked for
        vertex_outs.append(e)
        for c in ins:
            included.add(c)
            frontier.append(c)
    if not leaf_set <= included:
        return None
    # demanded leaves must actually be leaves of the grown subtree
    for e in leaf_set:
        if e in vertex_outs:
            return None
    return frozenset(included), tuple(sorted(vertex_outs, key=sort_key))


def subtree(tree, new_root, keep):
    """Restrict to an edge subset; includes every vertex whose edges all stay.

    The kept set must induce a valid tree rooted at `new_root` (connected and
    closed under taking a vertex's in-edges); stump vertices sitting on kept
    edges are kept with them.
    """
    keep = frozenset(keep)
    if new_root not in keep:
        raise DanglingEdge(f"new root {new_root!r} is not among the kept edges")
    if not keep <= tree.edges:
        raise DanglingEdge("kept edges must be a subset of the tree's edges")
    vs = [(o, ins) for o, ins in tree.vertices
          if o in keep and ins <= keep and tree.le(o, new_root)]
    return Tree(keep, new_root, vs)


def _fresh_layer(tree, extra=()):
    taken = set()
    for e in itertools.chain(tree.edges, extra):
        if isinstance(e, tuple) and len(e) == 3 and e[0] == "graft" \
                and isinstance(e[1], int):
            taken.add(e[1])
    layer = 0
    while layer in taken:
        layer += 1
    return layer


def graft(tree, site, arity, below=None):
    """Attach a fresh corolla at a leaf or below the root.

    At a leaf the new vertex gets `arity` fresh in-edges (zero makes a
    stump).  At the root the corolla goes underneath: a fresh root plus
    `arity` - 1 fresh leaves, the old root taking the remaining slot, so
    arity must be at least 1 there.  `below` forces the root-side reading
    when the site is both root and leaf (the edge-only tree).  Returns
    (bigger tree, embedding map), the embedding being identity on the old
    edge names.
    """
    if site not in tree.edges:
        raise DanglingEdge(f"graft site {site!r} is not an edge")
    if below is None:
        below = site == tree.root and not tree.is_leaf(site)
    layer = _fresh_layer(tree)
    edges = set(tree.edges)
    vertices = list(tree.vertices)
    if below:
        if site != tree.root:
            raise SiteNotLeafOrRoot("grafting below is only possible at the root")
        if arity < 1:
            raise SiteNotLeafOrRoot("a root graft needs arity at least 1")
        new_root = ("graft", layer, "root")
        fresh = [("graft", layer, i) for i in range(arity - 1)]
        edges.add(new_root)
        edges.update(fresh)
        vertices.append((new_root, [tree.root] + fresh))
        bigger = Tree(edges, new_root, vertices)
    elif tree.is_leaf(site):
        fresh = [("graft", layer, i) for i in range(arity)]
        edges.update(fresh)
        vertices.append((site, fresh))
        bigger = Tree(edges, tree.root, vertices)
    else:
        raise SiteNotLeafOrRoot(f"cannot graft at {site!r}")
    return bigger, {e: e for e in tree.edges}


def enumerate_trees(leaf_count, max_vertices):
    """All isomorphism classes with exactly `leaf_count` leaves and at most
    `max_vertices` vertices, as canonically named trees.

    Closure under leaf grafting from the edge-only tree reaches every class:
    peeling off an uppermost vertex is the inverse move.
    """
    if leaf_count < 0 or max_vertices < 0:
        return []
    start = single_edge("e0")
    seen = {canonical_form(start).code: start}
    frontier = [start]
    while frontier:
        tree = frontier.pop()
        nv = len(tree.vertices)
        if nv >= max_vertices:
            continue
        budget = max_vertices - nv - 1
        max_arity = leaf_count + budget + 1 - len(tree.leaves)
        for site in tree.leaves:
            for arity in range(0, max(max_arity, 0) + 1):
                bigger, _ = graft(tree, site, arity)
                if len(bigger.leaves) - budget > leaf_count:
                    continue
                key = canonical_form(bigger).code
                if key not in seen:
                    seen[key] = bigger
                    frontier.append(bigger)
    found = [t for t in seen.values() if len(t.leaves) == leaf_count]
    found.sort(key=lambda t: (len(t.vertices), canonical_form(t).code))
    return [relabel_canonical(t) for t in found]


def enumerate_all_trees(max_edges):
    """All isomorphism classes with at most `max_edges` edges."""
    out = []
    for leaves in range(0, max_edges + 1):
        # a tree with k edges has at most k vertices; leaf count <= edges
        for t in enumerate_trees(leaves, max_edges):
            if len(t.edges) <= max_edges:
                out.append(t)
    out.sort(key=lambda t: (len(t.edges), canonical_form(t).code))
    return out


class Rel(Enum):
    EQUAL = "equal"
    LE = "le"
    GE = "ge"
    INCOMPARABLE = "incomparable"


class EdgePoset:
    """The order where x <= y means y lies on x's path to the root."""

    def __init__(self, tree):
        self.tree = tree
        table = {}
        for x in tree.edges:
            for y in tree.edges:
                if x == y:
                    table[(x, y)] = Rel.EQUAL
                elif tree.le(x, y):
                    table[(x, y)] = Rel.LE
                elif tree.le(y, x):
                    table[(x, y)] = Rel.GE
                else:
                    table[(x, y)] = Rel.INCOMPARABLE
        self.table = table

    def relation(self, x, y):
        return self.table[(x, y)]


# --- serialization ---------------------------------------------------------


def _require_str_names(tree):
    for e in tree.edges:
        if not isinstance(e, str):
            return False
    return True


def tree_to_json(tree):
    """Schema: {"edges": [...], "root": ..., "vertices": [{"out","in"}]}.

    Files carry string edge names; trees with generated tuple names are
    renamed canonically first.
    """
    if not _require_str_names(tree):
        tree = relabel_canonical(tree)
    return {
        "edges": list(tree.sorted_edges()),
        "root": tree.root,
        "vertices": [{"out": o, "in": sorted(ins, key=sort_key)}
                     for o, ins in tree.vertices],
    }


def tree_from_json(data):
    try:
        edges = data["edges"]
        root = data["root"]
        vertices = [(v["out"], v["in"]) for v in data["vertices"]]
    except (KeyError, TypeError) as exc:
        raise TreeError(f"malformed tree document: {exc}") from exc
    if len(set(edges)) != len(edges):
        raise MultipleParents("duplicate edge name in document")
    return Tree(edges, root, vertices)


def tree_dumps(tree):
    return json.dumps(tree_to_json(tree), sort_keys=True, indent=2) + "\n"


def tree_loads(text):
    return tree_from_json(json.loads(text))


def tree_to_dot(tree, edge_colors=None, name="tree"):
    """Graphviz rendering: one node per vertex, stub nodes for the root and
    each leaf, arrows running toward the root."""
    order = tree.canonical_edge_order()
    idx = {e: i for i, e in enumerate(order)}
    node_of = {}
    lines = [f"digraph {json.dumps(name)} {{", "  rankdir=BT;",
             '  node [shape=point, width=0.12];']
    lines.append('  root [shape=plaintext, label="root"];')
    for e in order:
        if tree.is_leaf(e):
            nid = f"leaf{idx[e]}"
            lines.append(f'  {nid} [shape=plaintext, label={json.dumps(str(e))}];')
    for i, (o, _ins) in enumerate(tree.vertices):
        node_of[o] = f"v{idx[o]}"
    for o, _ins in tree.vertices:
        lines.append(f"  {node_of[o]};")
    for e in order:
        top = node_of[e] if e in node_of else f"leaf{idx[e]}"
        below = tree.parent_of(e)
        bottom = "root" if below is None else node_of[below]
        attrs = [f"label={json.dumps(str(e))}"]
        if edge_colors and e in edge_colors:
            attrs.append(f"color={json.dumps(edge_colors[e])}")
            attrs.append(f"fontcolor={json.dumps(edge_colors[e])}")
        lines.append(f'  {top} -> {bottom} [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
