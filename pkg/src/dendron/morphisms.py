"""Maps of trees as edge maps, plus the generator calculus.

A map of trees src -> dst is a function on edge sets such that each vertex
(in-edges e1..en, out-edge e0) lands on an actual operation of dst: there
must be a subtree of dst rooted at the image of e0 whose leaf set is exactly
the images of e1..en, taken pairwise distinct.  The single-edge subtree
counts its edge as both root and leaf, which is what makes unary collapses
legal.

Every such map factors as degeneracies, then an isomorphism, then inner
faces, then outer faces; `factorize` computes that normal form and
`Factorization.composite` recomposes it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .trees import (Tree, TreeError, sort_key, spanned_subtree)


class MorphismError(ValueError):
    """Base class for invalid-map errors."""


class SourceTargetMismatch(MorphismError):
    """Endpoints of composed maps do not agree, or a map is not total."""


class NotMonotone(MorphismError):
    """The edge map does not respect the path-to-root order."""


class VertexConditionFails(MorphismError):
    """Some vertex has no matching subtree in the target."""


class NotInnerEdge(MorphismError):
    """Contraction was requested at an edge not bounded by two vertices."""


class TreeMorphism:
    """An edge map between two trees, validated unless prebuilt internally."""

    __slots__ = ("src", "dst", "mapping", "_hash")

    def __init__(self, src, dst, mapping, _checked=False):
        self.src = src
        self.dst = dst
        self.mapping = dict(mapping)
        if not _checked:
            _check_edge_map(src, dst, self.mapping)
        self._hash = None

    def __call__(self, edge):
        return self.mapping[edge]

    def __eq__(self, other):
        if not isinstance(other, TreeMorphism):
            return NotImplemented
        return (self.src == other.src and self.dst == other.dst
                and self.mapping == other.mapping)

    def __hash__(self):
        if self._hash is None:
            items = tuple(sorted(self.mapping.items(),
                                 key=lambda kv: sort_key(kv[0])))
            self._hash = hash((self.src, self.dst, items))
        return self._hash

    def __repr__(self):
        return f"<TreeMorphism {len(self.src.edges)}->{len(self.dst.edges)} edges>"

    def is_identity(self):
        return (self.src == self.dst
                and all(v == k for k, v in self.mapping.items()))

    def is_injective(self):
        return len(set(self.mapping.values())) == len(self.mapping)

    def is_isomorphism(self):
        if not self.is_injective():
            return False
        if set(self.mapping.values()) != self.dst.edges:
            return False
        if self.mapping[self.src.root] != self.dst.root:
            return False
        # bijective + both vertex structures must correspond
        image_vs = {(self.mapping[o], frozenset(self.mapping[e] for e in ins))
                    for o, ins in self.src.vertices}
        return image_vs == set(self.dst.vertices)

    def inverse(self):
        if not self.is_isomorphism():
            raise MorphismError("only isomorphisms invert")
        return TreeMorphism(self.dst, self.src,
                            {v: k for k, v in self.mapping.items()},
                            _checked=True)

    def sort_signature(self):
        """Deterministic ordering key within a hom-set."""
        return tuple(sort_key(self.mapping[e])
                     for e in self.src.canonical_edge_order())


def _check_edge_map(src, dst, mapping):
    if set(mapping) != src.edges:
        raise SourceTargetMismatch("edge map must be total on the source edges")
    for v in mapping.values():
        if v not in dst.edges:
            raise SourceTargetMismatch(f"image edge {v!r} is not in the target")
    for e in src.edges:
        p = src.parent_of(e)
        if p is not None and not dst.le(mapping[e], mapping[p]):
            raise NotMonotone(f"{e!r} climbs above its parent under the map")
    for out, ins in src.vertices:
        images = [mapping[e] for e in ins]
        if len(set(images)) != len(images):
            raise VertexConditionFails(
                f"vertex over {out!r} maps two in-edges together")
        if spanned_subtree(dst, mapping[out], frozenset(images)) is None:
            raise VertexConditionFails(
                f"vertex over {out!r} has no matching subtree in the target")


def validate_morphism(src, dst, mapping):
    """Typed-error validation; returns the morphism when the map is legal."""
    return TreeMorphism(src, dst, mapping)


def identity(tree):
    return TreeMorphism(tree, tree, {e: e for e in tree.edges}, _checked=True)


def compose(first, *rest):
    """Diagrammatic composition: compose(f, g) applies f, then g."""
    out = first
    for g in rest:
        if out.dst != g.src:
            raise SourceTargetMismatch("composition endpoints do not match")
        out = TreeMorphism(out.src, g.dst,
                           {e: g.mapping[v] for e, v in out.mapping.items()},
                           _checked=True)
    return out


def contract_edge(tree, edge):
    """Merge the two vertices bounding an inner edge.

    Returns (smaller tree, face map smaller -> tree); the face map is the
    edge inclusion.
    """
    if not tree.is_inner(edge):
        raise NotInnerEdge(f"{edge!r} is not an inner edge")
    above = tree.children_of(edge)
    below_out = tree.parent_of(edge)
    vertices = []
    for o, ins in tree.vertices:
        if o == edge:
            continue
        if o == below_out:
            vertices.append((o, (ins - {edge}) | above))
        else:
            vertices.append((o, ins))
    smaller = Tree(tree.edges - {edge}, tree.root, vertices)
    face = TreeMorphism(smaller, tree, {e: e for e in smaller.edges},
                        _checked=True)
    return smaller, face


def split_edge(tree, edge):
    """Insert a unary vertex along an edge.

    The lower half keeps the name; the upper half is fresh.  Returns
    (bigger tree, collapse map bigger -> tree) sending both halves to the
    original edge.
    """
    upper = ("split", edge)
    while upper in tree.edges:
        upper = ("split", upper)
    vertices = []
    for o, ins in tree.vertices:
        if o == edge:
            vertices.append((upper, ins))
        else:
            vertices.append((o, ins))
    vertices.append((edge, [upper]))
    bigger = Tree(set(tree.edges) | {upper}, tree.root, vertices)
    mapping = {e: e for e in tree.edges}
    mapping[upper] = edge
    return bigger, TreeMorphism(bigger, tree, mapping, _checked=True)


def collapse_unary(tree, out_edge):
    """Remove the unary vertex atop `out_edge`, merging its two edges.

    The rootward name survives.  Returns (smaller tree, collapse map
    tree -> smaller).  Inverse of split_edge up to naming.
    """
    ins = tree.children_of(out_edge)
    if ins is None or len(ins) != 1:
        raise MorphismError(f"no unary vertex atop {out_edge!r}")
    (upper,) = ins
    vertices = []
    for o, vins in tree.vertices:
        if o == out_edge:
            continue
        if o == upper:
            vertices.append((out_edge, vins))
        else:
            vertices.append((o, vins))
    smaller = Tree(tree.edges - {upper}, tree.root, vertices)
    mapping = {e: e for e in smaller.edges}
    mapping[upper] = out_edge
    return smaller, TreeMorphism(tree, smaller, mapping, _checked=True)


def hom_set(src, dst, pins=None):
    """Every map src -> dst, in a deterministic order.

    Backtracking over the full candidate space: the root image ranges over
    all target edges, each in-edge image over the down-set of its vertex's
    out-image (order preservation), pruned by in-edge distinctness and the
    vertex condition as soon as a vertex is fully assigned.  `pins` fixes
    chosen images in advance (used for label-preserving enumeration).
    """
    pins = pins or {}
    verts = sorted(src.vertices, key=lambda v: (src.depth(v[0]), sort_key(v[0])))
    desc = {}
    for y in dst.sorted_edges():
        desc[y] = tuple(z for z in dst.sorted_edges() if dst.le(z, y))
    results = []
    assignment = {}

    def candidates(edge, pool):
        if edge in pins:
            p = pins[edge]
            return (p,) if p in pool else ()
        return pool

    def do_vertex(i):
        if i == len(verts):
            results.append(TreeMorphism(src, dst, dict(assignment),
                                        _checked=True))
            return
        out, ins = verts[i]
        base = assignment[out]
        ins_sorted = sorted(ins, key=sort_key)

        def do_in(j, used):
            if j == len(ins_sorted):
                images = frozenset(assignment[e] for e in ins_sorted)
                if spanned_subtree(dst, base, images) is not None:
                    do_vertex(i + 1)
                return
            e = ins_sorted[j]
            for z in candidates(e, desc[base]):
                if z in used:
                    continue
                assignment[e] = z
                do_in(j + 1, used | {z})
                del assignment[e]

        do_in(0, frozenset())

    for r in candidates(src.root, dst.sorted_edges()):
        assignment = {src.root: r}
        do_vertex(0)
    results.sort(key=TreeMorphism.sort_signature)
    return results


@dataclass(frozen=True)
class GeneratorStep:
    """One elementary map in a factorization chain.

    kind: "degeneracy" | "inner" | "outer"; tag names the merged edge, the
    contracted edge, or the grafted vertex's out-edge, in the step's target.
    """
    kind: str
    tag: object
    morphism: TreeMorphism


@dataclass(frozen=True)
class Factorization:
    degeneracies: tuple
    iso: TreeMorphism
    inner_faces: tuple
    outer_faces: tuple

    def stages(self):
        yield from (s.morphism for s in self.degeneracies)
        yield self.iso
        yield from (s.morphism for s in self.inner_faces)
        yield from (s.morphism for s in self.outer_faces)

    def composite(self):
        out = None
        for m in self.stages():
            out = m if out is None else compose(out, m)
        return out


class FactorizationError(MorphismError):
    """Internal failure of the normal form; indicates a bug if raised."""


def _kernel_classes(f):
    fibers = {}
    for e in f.src.sorted_edges():
        fibers.setdefault(f.mapping[e], []).append(e)
    classes = []
    for image in sorted(fibers, key=sort_key):
        members = fibers[image]
        if len(members) > 1:
            members.sort(key=lambda e: -f.src.depth(e))  # topmost first
            classes.append(members)
    return classes


def factorize(f):
    """Normal form: degeneracies, isomorphism, inner faces, outer faces.

    Deterministic stage listing: degeneracy chains collapse top-down per
    kernel class (classes by name order); inner faces contract in canonical
    edge order of the middle subtree; outer faces grow rootward first, then
    leafward by site order.
    """
    src, dst = f.src, f.dst

    # stage 1: collapse kernel classes onto their rootward representative
    degeneracies = []
    work = src
    for cls in _kernel_classes(f):
        for i in range(len(cls) - 1):
            ins = work.children_of(cls[i + 1])
            if ins != frozenset({cls[i]}):
                raise FactorizationError("kernel class is not a unary chain")
            work, step = collapse_unary(work, cls[i + 1])
            degeneracies.append(GeneratorStep("degeneracy", cls[i + 1], step))
    t1 = work

    # stage 3 target: subtree of dst spanned by the image
    image_root = f.mapping[src.root]
    image_leaves = frozenset(f.mapping[l] for l in src.leaves)
    grown = spanned_subtree(dst, image_root, image_leaves)
    if grown is None:
        raise FactorizationError("image does not span a subtree")
    span_edges, span_vertex_outs = grown
    middle = Tree(span_edges, image_root,
                  [(o, dst.children_of(o)) for o in span_vertex_outs])

    # stage 3: contract the spanned edges missed by the image
    image_edges = set(f.mapping.values())
    to_contract = [e for e in middle.canonical_edge_order()
                   if e not in image_edges]
    inner_steps = []
    cur = middle
    for e in to_contract:
        cur, face = contract_edge(cur, e)
        inner_steps.append(GeneratorStep("inner", e, face))
    inner_steps.reverse()  # list in application order, t2 -> middle
    t2 = cur

    # stage 2: what remains of the map is a renaming
    iso = TreeMorphism(t1, t2, {e: f.mapping[e] for e in t1.edges})
    if not iso.is_isomorphism():
        raise FactorizationError("residual stage is not an isomorphism")

    # stage 4: grow the middle subtree out to the whole target
    outer_steps = []
    cur = middle
    while cur.edges != dst.edges or set(cur.vertices) != set(dst.vertices):
        if cur.root != dst.root:
            below = dst.parent_of(cur.root)
            out, ins = below, dst.children_of(below)
            bigger = Tree(cur.edges | {out} | ins, out,
                          list(cur.vertices) + [(out, ins)])
        else:
            have = {o for o, _ in cur.vertices}
            sites = [o for o, _ in dst.vertices
                     if o in cur.edges and o not in have]
            if not sites:
                raise FactorizationError("outer growth stalled")
            out = min(sites, key=lambda o: (dst.depth(o), sort_key(o)))
            ins = dst.children_of(out)
            bigger = Tree(cur.edges | ins, cur.root,
                          list(cur.vertices) + [(out, ins)])
        step = TreeMorphism(cur, bigger, {e: e for e in cur.edges},
                            _checked=True)
        outer_steps.append(GeneratorStep("outer", out, step))
        cur = bigger
    if cur != dst:
        raise FactorizationError("outer growth missed the target")

    return Factorization(tuple(degeneracies), iso, tuple(inner_steps),
                         tuple(outer_steps))
