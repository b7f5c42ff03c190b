"""Corolla substitution along pointed maps, and the category it assembles.

A pointed map phi: m+ -> n+ acts on a tree with n labeled leaves by grafting
a corolla over each leaf (one fresh leaf per preimage label, a stump when the
preimage is empty) and one corolla under the root whose extra in-edges pick
up the labels sent to "+".  This action is functorial only up to comparison
maps: tau_id collapses the unary corollas added by an identity, tau_comp
contracts the middle layer created by acting in two steps.

On top of the action sits a category of labeled trees whose morphisms are
pairs (phi, fiber): a pointed map between the label sets, against direction,
and a label-preserving morphism phi_star(phi, src) -> dst.  Projecting such
a pair to fiber . iota recovers an ordinary tree morphism, and every tree
morphism arises uniquely this way once labelings are fixed.
"""

from __future__ import annotations

from functools import lru_cache

from .trees import Tree, _fresh_layer, sort_key
from .morphisms import (
    TreeMorphism, MorphismError, SourceTargetMismatch, compose,
)
from .labels import (
    PLUS, LabelError, LabeledTree, PointedMap, compose_pointed,
    enumerate_pointed_maps, is_label_preserving, hom_labeled,
)


@lru_cache(maxsize=None)
def phi_star(phi, labeled):
    """Act on a labeled tree by grafting corollas along a pointed map.

    For each target label i, the leaf labeled i receives a corolla with one
    fresh leaf per source label in the preimage of i; an empty preimage caps
    the leaf with a stump.  The root receives a corolla from below whose
    extra in-edges carry the labels sent to "+", and whose out-edge is the
    new root.  The result is labeled by the source labels of the map.
    """
    if phi.dst_labels != labeled.label_set:
        raise LabelError("pointed map does not act on this label set")
    tree = labeled.tree
    layer = _fresh_layer(tree)

    def fresh(label):
        return ("graft", layer, ("leaf", label))

    edges = set(tree.edges)
    vertices = list(tree.vertices)
    for i in labeled.label_set:
        ins = [fresh(j) for j in phi.src_labels if phi.mapping[j] == i]
        edges.update(ins)
        vertices.append((labeled.leaf_of(i), ins))
    to_plus = [fresh(j) for j in phi.src_labels if phi.mapping[j] == PLUS]
    new_root = ("graft", layer, "root")
    edges.add(new_root)
    edges.update(to_plus)
    vertices.append((new_root, [tree.root] + to_plus))
    bigger = Tree(edges, new_root, vertices)
    return LabeledTree(bigger, {j: fresh(j) for j in phi.src_labels})


def _pushed_mapping(phi, f, src_labeled, dst_labeled):
    big_src = phi_star(phi, src_labeled)
    big_dst = phi_star(phi, dst_labeled)
    mapping = {e: f.mapping[e] for e in src_labeled.tree.edges}
    for j in phi.src_labels:
        mapping[big_src.leaf_of(j)] = big_dst.leaf_of(j)
    mapping[big_src.tree.root] = big_dst.tree.root
    return big_src, big_dst, mapping


@lru_cache(maxsize=None)
def phi_star_mor(phi, f, src_labeled, dst_labeled):
    """Push a label-preserving morphism through the corolla grafting.

    Acts as f on the edges already present and matches the fresh edges of
    source and target label by label (fresh root to fresh root).
    """
    if f.src != src_labeled.tree or f.dst != dst_labeled.tree:
        raise SourceTargetMismatch("morphism does not match the labelings")
    big_src, big_dst, mapping = _pushed_mapping(phi, f, src_labeled,
                                                dst_labeled)
    return TreeMorphism(big_src.tree, big_dst.tree, mapping)


@lru_cache(maxsize=None)
def tau_id(labeled):
    """Collapse the unary corollas added by the identity map's action.

    The identity pointed map grafts a 1-corolla onto every leaf and one
    under the root; the returned morphism id*(T) -> T is the composite of
    the degeneracies removing them.
    """
    ident = PointedMap.identity_on(labeled.label_set)
    big = phi_star(ident, labeled)
    mapping = {e: e for e in labeled.tree.edges}
    for j in labeled.label_set:
        mapping[big.leaf_of(j)] = labeled.leaf_of(j)
    mapping[big.tree.root] = labeled.tree.root
    return TreeMorphism(big.tree, labeled.tree, mapping)


@lru_cache(maxsize=None)
def tau_comp(gamma, phi, labeled):
    """Compare acting by a composite with acting in two steps.

    For gamma: l+ -> m+ and phi: m+ -> n+ acting on a tree labeled by n,
    returns (phi . gamma)*(T) -> gamma*(phi*(T)), the composite of the
    inner faces that contract the middle corolla layer.
    """
    both = compose_pointed(gamma, phi)
    small = phi_star(both, labeled)
    big = phi_star(gamma, phi_star(phi, labeled))
    mapping = {e: e for e in labeled.tree.edges}
    for j in gamma.src_labels:
        mapping[small.leaf_of(j)] = big.leaf_of(j)
    mapping[small.tree.root] = big.tree.root
    return TreeMorphism(small.tree, big.tree, mapping)


@lru_cache(maxsize=None)
def iota(phi, labeled):
    """The inclusion of a tree into its corolla-grafted image.

    A composite of outer faces T -> phi_star(phi, T), identity on the edge
    names of T.
    """
    big = phi_star(phi, labeled)
    return TreeMorphism(labeled.tree, big.tree,
                        {e: e for e in labeled.tree.edges})


class GrothTreeMorphism:
    """A morphism of labeled trees: a pointed map plus a fiber morphism.

    From src to dst it consists of phi mapping dst's labels to src's
    (against direction) and a label-and-root-preserving fiber
    phi_star(phi, src) -> dst.
    """

    __slots__ = ("src", "dst", "phi", "fiber", "_hash")

    def __init__(self, src, dst, phi, fiber, _checked=False):
        self.src = src
        self.dst = dst
        self.phi = phi
        self.fiber = fiber
        self._hash = None
        if _checked:
            return
        if phi.src_labels != dst.label_set \
                or phi.dst_labels != src.label_set:
            raise LabelError("pointed map must send dst labels to src labels")
        mid = phi_star(phi, src)
        if fiber.src != mid.tree or fiber.dst != dst.tree:
            raise SourceTargetMismatch(
                "fiber must go from the grafted source to the target tree")
        if not is_label_preserving(fiber, mid, dst):
            raise MorphismError("fiber must preserve labels and the root")

    def __eq__(self, other):
        if not isinstance(other, GrothTreeMorphism):
            return NotImplemented
        return (self.src == other.src and self.dst == other.dst
                and self.phi == other.phi
                and self.fiber.mapping == other.fiber.mapping)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.src, self.dst, self.phi, self.fiber))
        return self._hash

    def __repr__(self):
        return f"<GrothTreeMorphism {self.phi!r} with {self.fiber!r}>"

    def sort_signature(self):
        return (self.phi.sort_signature(), self.fiber.sort_signature())


def groth_identity(labeled):
    """The identity pair: identity pointed map with the tau_id fiber."""
    return GrothTreeMorphism(labeled, labeled,
                             PointedMap.identity_on(labeled.label_set),
                             tau_id(labeled), _checked=True)


def compose_groth(first, second):
    """Compose two label-indexed tree morphisms (diagrammatic order).

    The pointed maps compose the other way round; the fiber contracts the
    middle corolla layer, pushes the first fiber through the second map's
    grafting, then applies the second fiber.
    """
    if first.dst != second.src:
        raise SourceTargetMismatch("morphisms do not compose")
    phi, gamma = first.phi, second.phi
    both = compose_pointed(gamma, phi)
    fiber = compose(
        tau_comp(gamma, phi, first.src),
        phi_star_mor(gamma, first.fiber, phi_star(phi, first.src), first.dst),
        second.fiber,
    )
    return GrothTreeMorphism(first.src, second.dst, both, fiber,
                             _checked=True)


def groth_hom(src, dst):
    """All (phi, fiber) morphisms between two labeled trees, sorted."""
    out = []
    for phi in enumerate_pointed_maps(dst.label_set, src.label_set):
        mid = phi_star(phi, src)
        for fiber in hom_labeled(mid, dst):
            out.append(GrothTreeMorphism(src, dst, phi, fiber,
                                         _checked=True))
    return out


def F_functor(gm):
    """Project a (phi, fiber) pair to the plain tree morphism fiber . iota."""
    return compose(iota(gm.phi, gm.src), gm.fiber)


def lift_morphism(f, src_labeled, dst_labeled):
    """The unique (phi, fiber) pair projecting to a given tree morphism.

    phi sends a target label j to the source label i whose leaf image sits
    above j's leaf, and to "+" when there is none; the fiber is forced: it
    agrees with f on old edges and matches fresh leaves and the fresh root
    by label.
    """
    if f.src != src_labeled.tree or f.dst != dst_labeled.tree:
        raise SourceTargetMismatch("morphism does not match the labelings")
    dst_tree = dst_labeled.tree
    images = {i: f.mapping[src_labeled.leaf_of(i)]
              for i in src_labeled.label_set}
    mapping = {}
    for j in dst_labeled.label_set:
        leaf = dst_labeled.leaf_of(j)
        hits = [i for i in src_labeled.label_set
                if dst_tree.le(leaf, images[i])]
        if len(hits) > 1:
            raise MorphismError(
                f"leaf {j!r} sits below two incomparable leaf images")
        mapping[j] = hits[0] if hits else PLUS
    phi = PointedMap(dst_labeled.label_set, src_labeled.label_set, mapping)
    mid = phi_star(phi, src_labeled)
    fiber_map = {e: f.mapping[e] for e in src_labeled.tree.edges}
    for j in dst_labeled.label_set:
        fiber_map[mid.leaf_of(j)] = dst_labeled.leaf_of(j)
    fiber_map[mid.tree.root] = dst_tree.root
    fiber = TreeMorphism(mid.tree, dst_tree, fiber_map)
    return GrothTreeMorphism(src_labeled, dst_labeled, phi, fiber)


def pointed_category(max_size):
    """The category of pointed label sets 1..n for n up to a bound."""
    from .oplax import FcMor, FiniteCategory

    mors = []
    for m in range(max_size + 1):
        for n in range(max_size + 1):
            for p in enumerate_pointed_maps(range(1, m + 1),
                                            range(1, n + 1)):
                mors.append(FcMor(p, m, n))
    table = {}
    for f in mors:
        for g in mors:
            if f.dst == g.src:
                table[(f, g)] = FcMor(compose_pointed(f.name, g.name),
                                      f.src, g.dst)
    idents = {n: FcMor(PointedMap.identity_on(range(1, n + 1)), n, n)
              for n in range(max_size + 1)}
    return FiniteCategory(range(max_size + 1), mors, table, idents)


def tree_oplax_data(max_size, probes):
    """The corolla-substitution action packaged for the coherence checker.

    probes maps a label-set size to the tuple of labeled trees used as
    sample objects of that fiber; labels must be skeletal (1..n).

    Fiber arrows are passed around as plain edge-mapping dicts rather
    than validated morphism objects, and the comparison cells are
    written down directly: grafted edges are named by label and layer
    alone, so the cell for a composable pair sends layer L to layer
    L+1 label by label, whatever the maps do.  An exhaustive sweep
    over composable triples therefore never materialises the doubly
    and triply substituted trees whose mappings it compares.  The
    shortcut formulas are asserted against the validated builders
    above in the test suite.
    """
    from .oplax import OplaxFunctorData

    probes = {n: tuple(ts) for n, ts in probes.items()}

    def app_mor(f, m, x, y):
        pushed = dict(m)
        src_layer = _fresh_layer(x.tree)
        dst_layer = _fresh_layer(y.tree)
        for j in f.name.src_labels:
            pushed[("graft", src_layer, ("leaf", j))] = \
                ("graft", dst_layer, ("leaf", j))
        pushed[("graft", src_layer, "root")] = ("graft", dst_layer, "root")
        return pushed

    def data_tau_comp(f, g, x):
        layer = _fresh_layer(x.tree)
        cell = {e: e for e in x.tree.edges}
        for j in f.name.src_labels:
            cell[("graft", layer, ("leaf", j))] = \
                ("graft", layer + 1, ("leaf", j))
        cell[("graft", layer, "root")] = ("graft", layer + 1, "root")
        return cell

    def data_tau_id(n, x):
        layer = _fresh_layer(x.tree)
        cell = {e: e for e in x.tree.edges}
        for j in x.label_set:
            cell[("graft", layer, ("leaf", j))] = x.leaf_of(j)
        cell[("graft", layer, "root")] = x.tree.root
        return cell

    return OplaxFunctorData(
        base=pointed_category(max_size),
        fiber_objects=lambda n: probes.get(n, ()),
        app_obj=lambda f, x: phi_star(f.name, x),
        app_mor=app_mor,
        tau_comp=data_tau_comp,
        tau_id=data_tau_id,
        fiber_compose=lambda n, m1, m2: {e: m2[v] for e, v in m1.items()},
        fiber_identity=lambda n, x: {e: e for e in x.tree.edges},
        fiber_hom=lambda n, x, y: tuple(dict(t.mapping)
                                        for t in hom_labeled(x, y)),
    )
