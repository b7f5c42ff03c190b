"""Trees carrying a finite group action, and their orbit-wise calculus.

A group acts on a tree through root-preserving automorphisms, one edge
permutation per element.  The face and degeneracy generators then come in
orbit-sized packets: an inner face contracts a whole orbit of edges at once,
a degeneracy merges an orbit of unary vertices, and an outer face grafts the
same corolla over every leaf in an orbit (or one corolla under the root,
whose merge leaf must be fixed by the action).  Every equivariant morphism
factors through such packets, mirroring the plain normal form stage by
stage.

Labeled variants carry a G-set of labels matched equivariantly to the
leaves.  Corolla substitution along an equivariant pointed map lifts from
the unlabeled calculus by acting on the fresh edges through the label
action, and the comparison cells need no equivariant correction at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .trees import (
    Tree,
    TreeError,
    sort_key,
    spanned_subtree,
    all_isomorphisms,
    canonical_form,
    relabel_canonical,
    single_edge,
    _fresh_layer,
)
from .morphisms import (
    TreeMorphism,
    SourceTargetMismatch,
    FactorizationError,
    compose,
    contract_edge,
    split_edge,
    collapse_unary,
    hom_set,
    _kernel_classes,
)
from .labels import (
    LabeledTree,
    LabelError,
    PointedMap,
    PLUS,
    compose_pointed,
    hom_labeled,
)
from .substitution import phi_star, iota, lift_morphism
from .groups import (
    GSet,
    coset_gset,
    cyclic_group,
    disjoint_union_gsets,
    skeletal_gsets,
    subgroups,
    trivial_gset,
)


class NotEquivariant(ValueError):
    """Raised when a map or an action fails to commute with the group."""


class SiteInvalid(TreeError):
    """Raised when an orbit graft is aimed somewhere it cannot go."""


class RootGraftLeafNotFixed(TreeError):
    """Raised when a root graft would merge the root into a moving leaf."""


class GTree:
    """A tree with a group acting by root-preserving automorphisms.

    The action is a full table: one edge permutation per group element,
    composing as the group does.
    """

    __slots__ = ("tree", "group", "action", "_hash")

    def __init__(self, tree, group, action):
        self.tree = tree
        self.group = group
        self.action = {g: dict(row) for g, row in action.items()}
        self._hash = None
        edges = set(tree.edges)
        if set(self.action) != set(group.elements):
            raise NotEquivariant("need one edge permutation per element")
        vset = {(o, frozenset(ins)) for o, ins in tree.vertices}
        for g, row in self.action.items():
            if set(row) != edges or set(row.values()) != edges:
                raise NotEquivariant(f"row of {g} is not an edge permutation")
            if row[tree.root] != tree.root:
                raise NotEquivariant(f"row of {g} moves the root")
            for o, ins in tree.vertices:
                if (row[o], frozenset(row[i] for i in ins)) not in vset:
                    raise NotEquivariant(f"row of {g} tears a vertex apart")
        ident = self.action[group.identity]
        if any(ident[e] != e for e in edges):
            raise NotEquivariant("identity must act trivially")
        for a in group.elements:
            for b in group.elements:
                ab = group.mul(a, b)
                for e in edges:
                    if self.action[ab][e] != self.action[a][self.action[b][e]]:
                        raise NotEquivariant("rows do not compose as the group")

    @classmethod
    def trivial(cls, tree, group):
        rows = {g: {e: e for e in tree.edges} for g in group.elements}
        return cls(tree, group, rows)

    @classmethod
    def from_generator_rows(cls, tree, group, rows):
        """Close a partial table given on a generating set."""
        have = {group.identity: {e: e for e in tree.edges}}
        for g, row in rows.items():
            have[g] = dict(row)
        grew = True
        while grew:
            grew = False
            for a in list(have):
                for b in list(have):
                    ab = group.mul(a, b)
                    if ab not in have:
                        have[ab] = {e: have[a][have[b][e]]
                                    for e in tree.edges}
                        grew = True
        if set(have) != set(group.elements):
            raise NotEquivariant("rows do not generate the whole group")
        return cls(tree, group, have)

    def act(self, g, e):
        return self.action[g][e]

    def edge_orbit(self, e):
        return tuple(sorted({row[e] for row in self.action.values()},
                            key=sort_key))

    def edge_orbits(self):
        seen = set()
        out = []
        for e in self.tree.sorted_edges():
            if e in seen:
                continue
            orbit = self.edge_orbit(e)
            seen.update(orbit)
            out.append(orbit)
        return tuple(out)

    def edge_stabilizer(self, e):
        return tuple(g for g in self.group.elements if self.action[g][e] == e)

    def leaf_gset(self):
        leaves = self.tree.leaves
        rows = {g: {e: self.action[g][e] for e in leaves}
                for g in self.group.elements}
        return GSet(self.group, leaves, rows)

    def __eq__(self, other):
        if not isinstance(other, GTree):
            return NotImplemented
        return (self.tree == other.tree and self.group == other.group
                and self.action == other.action)

    def __hash__(self):
        if self._hash is None:
            rows = tuple(tuple(self.action[g][e]
                               for e in self.tree.sorted_edges())
                         for g in self.group.elements)
            self._hash = hash((self.tree, self.group, rows))
        return self._hash

    def __repr__(self):
        return (f"<GTree {len(self.tree.edges)} edges, "
                f"order-{self.group.order} group>")


def _restrict_rows(gtree, edges):
    keep = set(edges)
    return {g: {e: row[e] for e in keep}
            for g, row in gtree.action.items()}


class GLabeledTree:
    """A GTree whose leaves are labeled, equivariantly, by a G-set."""

    __slots__ = ("gtree", "label_gset", "labeled", "_hash")

    def __init__(self, gtree, label_gset, labels):
        self.gtree = gtree
        self.label_gset = label_gset
        self.labeled = LabeledTree(gtree.tree, labels)
        self._hash = None
        if label_gset.group != gtree.group:
            raise NotEquivariant("labels and tree must share the group")
        for g in gtree.group.elements:
            for a in label_gset.elements:
                if (self.labeled.leaf_of(label_gset.act(g, a))
                        != gtree.act(g, self.labeled.leaf_of(a))):
                    raise NotEquivariant("labeling does not commute with "
                                         "the action")

    @classmethod
    def self_labeled(cls, gtree):
        """Label every leaf by its own edge name."""
        return cls(gtree, gtree.leaf_gset(),
                   {e: e for e in gtree.tree.leaves})

    def leaf_of(self, a):
        return self.labeled.leaf_of(a)

    def __eq__(self, other):
        if not isinstance(other, GLabeledTree):
            return NotImplemented
        return (self.gtree == other.gtree
                and self.label_gset == other.label_gset
                and self.labeled == other.labeled)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gtree, self.label_gset, self.labeled))
        return self._hash

    def __repr__(self):
        return f"<GLabeledTree {self.labeled!r}>"


def is_equivariant_morphism(src, dst, f):
    """Does the edge map commute with both actions?"""
    if f.src != src.tree or f.dst != dst.tree:
        raise SourceTargetMismatch("morphism does not match the actions")
    for g in src.group.elements:
        if g == src.group.identity:
            continue
        srow, drow = src.action[g], dst.action[g]
        for e, v in f.mapping.items():
            if f.mapping[srow[e]] != drow[v]:
                return False
    return True


def equivariant_hom(src, dst):
    """The morphisms src.tree -> dst.tree commuting with the actions."""
    if src.group != dst.group:
        raise NotEquivariant("hom needs a common group")
    return tuple(f for f in hom_set(src.tree, dst.tree)
                 if is_equivariant_morphism(src, dst, f))


def equivariant_isomorphisms(src, dst):
    out = []
    for m in all_isomorphisms(src.tree, dst.tree):
        f = TreeMorphism(src.tree, dst.tree, m, _checked=True)
        if is_equivariant_morphism(src, dst, f):
            out.append(f)
    return tuple(out)


def are_equivariant_isomorphic(src, dst):
    return bool(equivariant_isomorphisms(src, dst))


def equivariant_contract_orbit(gtree, edge):
    """Contract every edge in the orbit of an inner edge.

    Returns (smaller GTree, face map smaller.tree -> gtree.tree); the face
    is the edge inclusion, and equals the composite of the one-edge faces
    taken in any order.
    """
    orbit = gtree.edge_orbit(edge)
    cur = gtree.tree
    for e in orbit:
        cur, _ = contract_edge(cur, e)
    smaller = GTree(cur, gtree.group, _restrict_rows(gtree, cur.edges))
    delta = TreeMorphism(cur, gtree.tree, {e: e for e in cur.edges})
    return smaller, delta


def equivariant_split_orbit(gtree, edge):
    """Insert a unary vertex along every edge in an orbit.

    Returns (bigger GTree, degeneracy bigger.tree -> gtree.tree) sending
    both halves of each split edge to the original.
    """
    if edge not in gtree.tree.edges:
        raise TreeError(f"{edge!r} is not an edge")
    orbit = gtree.edge_orbit(edge)
    cur = gtree.tree
    upper = {}
    for e in orbit:
        before = set(cur.edges)
        cur, _ = split_edge(cur, e)
        (upper[e],) = set(cur.edges) - before
    rows = {}
    for g in gtree.group.elements:
        row = {e: gtree.act(g, e) for e in gtree.tree.edges}
        for e in orbit:
            row[upper[e]] = upper[gtree.act(g, e)]
        rows[g] = row
    bigger = GTree(cur, gtree.group, rows)
    mapping = {e: e for e in gtree.tree.edges}
    mapping.update({upper[e]: e for e in orbit})
    sigma = TreeMorphism(cur, gtree.tree, mapping)
    return bigger, sigma


def equivariant_graft_orbit(gtree, site, corolla, attach=None, merge=None):
    """Graft the same corolla over a whole orbit of leaves, or under the
    root.

    The corolla is a G-set of fresh leaves.  For a leaf site, `attach` maps
    each corolla element, equivariantly, to the orbit member it hangs over
    (defaulting to the site itself when the orbit is a fixed point; empty
    fibers make stumps).  For the root site, `merge` picks the corolla leaf
    merged with the old root and must be fixed by the whole group; the rest
    become fresh leaves.  Returns (bigger GTree, face gtree.tree ->
    bigger.tree), the edge inclusion.
    """
    tree = gtree.tree
    if corolla.group != gtree.group:
        raise NotEquivariant("corolla and tree must share the group")
    layer = _fresh_layer(tree)
    if merge is not None or (site == tree.root and not tree.is_leaf(site)):
        if site != tree.root:
            raise SiteInvalid("a merge leaf only makes sense at the root")
        if merge not in corolla.elements:
            raise SiteInvalid("merge leaf must belong to the corolla")
        if set(corolla.stabilizer(merge)) != set(gtree.group.elements):
            raise RootGraftLeafNotFixed(
                "the leaf merged with the root must be fixed")
        rest = [c for c in corolla.elements if c != merge]
        fresh = {c: ("graft", layer, c) for c in rest}
        new_root = ("graft", layer, "root")
        edges = set(tree.edges) | set(fresh.values()) | {new_root}
        vertices = list(tree.vertices)
        vertices.append((new_root, [tree.root] + [fresh[c] for c in rest]))
        bigger_tree = Tree(edges, new_root, vertices)
        rows = {}
        for g in gtree.group.elements:
            row = {e: gtree.act(g, e) for e in tree.edges}
            row[new_root] = new_root
            for c in rest:
                row[fresh[c]] = fresh[corolla.act(g, c)]
            rows[g] = row
    else:
        if not tree.is_leaf(site):
            raise SiteInvalid(f"{site!r} is not a leaf")
        orbit = gtree.edge_orbit(site)
        if attach is None:
            if orbit != (site,):
                raise SiteInvalid("a graft over a moving orbit needs an "
                                  "attach map")
            attach = {c: site for c in corolla.elements}
        attach = dict(attach)
        if set(attach) != set(corolla.elements) \
                or not set(attach.values()) <= set(orbit):
            raise SiteInvalid("attach must map the corolla into the orbit")
        for g in gtree.group.elements:
            for c in corolla.elements:
                if attach[corolla.act(g, c)] != gtree.act(g, attach[c]):
                    raise NotEquivariant("attach map is not equivariant")
        fresh = {c: ("graft", layer, c) for c in corolla.elements}
        edges = set(tree.edges) | set(fresh.values())
        vertices = list(tree.vertices)
        for m in orbit:
            vertices.append((m, [fresh[c] for c in corolla.elements
                                 if attach[c] == m]))
        bigger_tree = Tree(edges, tree.root, vertices)
        rows = {}
        for g in gtree.group.elements:
            row = {e: gtree.act(g, e) for e in tree.edges}
            for c in corolla.elements:
                row[fresh[c]] = fresh[corolla.act(g, c)]
            rows[g] = row
    bigger = GTree(bigger_tree, gtree.group, rows)
    delta = TreeMorphism(tree, bigger_tree, {e: e for e in tree.edges})
    return bigger, delta


@dataclass(frozen=True)
class EquivariantStep:
    """One orbit-sized generator in an equivariant factorization.

    kind: "degeneracy" | "inner" | "outer"; orbit lists the merged edges,
    the contracted edges, or the graft sites, in the step's target.
    """

    kind: str
    orbit: tuple
    morphism: TreeMorphism
    src: GTree
    dst: GTree


@dataclass(frozen=True)
class EquivariantFactorization:
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


def _class_orbits(src, classes):
    """Group kernel classes into orbits of the source action.

    Each class must map, member by member, onto another class under every
    group element; anything else is a non-equivariant kernel.
    """
    by_key = {frozenset(c): i for i, c in enumerate(classes)}
    image = {}
    for i, cls in enumerate(classes):
        for g in src.group.elements:
            mapped = [src.act(g, m) for m in cls]
            j = by_key.get(frozenset(mapped))
            if j is None or classes[j] != mapped:
                raise NotEquivariant("kernel classes are not permuted by "
                                     "the action")
            image[(g, i)] = j
    orbits = []
    seen = set()
    for i in range(len(classes)):
        if i in seen:
            continue
        members = sorted({image[(g, i)] for g in src.group.elements})
        seen.update(members)
        orbits.append(members)
    return orbits


def equivariant_factorize(src, dst, f):
    """Factor an equivariant morphism into orbit-sized stages.

    Degeneracies, an isomorphism, inner faces, outer faces, exactly as in
    the plain normal form, but each face or degeneracy handles a whole
    orbit at once.  Raises NotEquivariant when the map does not commute
    with the actions (the stages cannot be grouped).
    """
    if f.src != src.tree or f.dst != dst.tree:
        raise SourceTargetMismatch("morphism does not match the actions")
    if src.group != dst.group:
        raise NotEquivariant("factorization needs a common group")
    group = src.group

    def gview(tree, origin):
        try:
            return GTree(tree, group, _restrict_rows(origin, tree.edges))
        except NotEquivariant:
            raise
        except (KeyError, TreeError) as exc:
            raise NotEquivariant(str(exc)) from exc

    # degeneracies: collapse kernel-class orbits onto rootward names
    classes = _kernel_classes(f)
    degeneracies = []
    work = src.tree
    work_g = src
    for orbit_idx in _class_orbits(src, classes):
        length = len(classes[orbit_idx[0]])
        for i in range(length - 1):
            tags = []
            step = None
            before_g = work_g
            for j in orbit_idx:
                cls = classes[j]
                ins = work.children_of(cls[i + 1])
                if ins != frozenset({cls[i]}):
                    raise FactorizationError(
                        "kernel class is not a unary chain")
                work, one = collapse_unary(work, cls[i + 1])
                step = one if step is None else compose(step, one)
                tags.append(cls[i + 1])
            work_g = gview(work, src)
            mstep = EquivariantStep("degeneracy",
                                    tuple(sorted(tags, key=sort_key)),
                                    step, before_g, work_g)
            if not is_equivariant_morphism(before_g, work_g, step):
                raise FactorizationError("degeneracy stage broke "
                                         "equivariance")
            degeneracies.append(mstep)
    t1_g = work_g

    # the subtree of dst spanned by the image, with its inherited action
    image_root = f.mapping[src.tree.root]
    if any(dst.act(g, image_root) != image_root for g in group.elements):
        raise NotEquivariant("image root is not fixed")
    image_leaves = frozenset(f.mapping[l] for l in src.tree.leaves)
    if any(dst.act(g, e) not in image_leaves
           for g in group.elements for e in image_leaves):
        raise NotEquivariant("image leaves are not a stable set")
    grown = spanned_subtree(dst.tree, image_root, image_leaves)
    if grown is None:
        raise FactorizationError("image does not span a subtree")
    span_edges, span_vertex_outs = grown
    middle = Tree(span_edges, image_root,
                  [(o, dst.tree.children_of(o)) for o in span_vertex_outs])
    middle_g = gview(middle, dst)

    # inner faces: contract the spanned edges missed by the image
    image_edges = set(f.mapping.values())
    order = middle.canonical_edge_order()
    position = {e: k for k, e in enumerate(order)}
    to_contract = [e for e in order if e not in image_edges]
    if any(middle_g.act(g, e) not in position
           or middle_g.act(g, e) in image_edges
           for g in group.elements for e in to_contract):
        raise NotEquivariant("contracted edges are not a stable set")
    seen = set()
    contract_orbits = []
    for e in to_contract:
        if e in seen:
            continue
        orbit = middle_g.edge_orbit(e)
        seen.update(orbit)
        contract_orbits.append(orbit)
    inner_steps = []
    cur = middle
    cur_g = middle_g
    for orbit in contract_orbits:
        before_g = cur_g
        for e in orbit:
            cur, _ = contract_edge(cur, e)
        cur_g = gview(cur, dst)
        face = TreeMorphism(cur, before_g.tree, {e: e for e in cur.edges},
                            _checked=True)
        inner_steps.append(EquivariantStep("inner", orbit, face,
                                           cur_g, before_g))
    inner_steps.reverse()
    t2_g = cur_g

    # the residual renaming, which must itself be equivariant
    iso = TreeMorphism(t1_g.tree, t2_g.tree,
                       {e: f.mapping[e] for e in t1_g.tree.edges})
    if not iso.is_isomorphism():
        raise FactorizationError("residual stage is not an isomorphism")
    if not is_equivariant_morphism(t1_g, t2_g, iso):
        raise NotEquivariant("residual renaming does not commute")

    # outer faces: grow the spanned subtree back out to the whole target
    outer_steps = []
    cur = middle
    cur_g = middle_g
    dst_tree = dst.tree
    while cur.edges != dst_tree.edges \
            or set(cur.vertices) != set(dst_tree.vertices):
        before_g = cur_g
        if cur.root != dst_tree.root:
            below = dst_tree.parent_of(cur.root)
            ins = dst_tree.children_of(below)
            bigger = Tree(cur.edges | {below} | ins, below,
                          list(cur.vertices) + [(below, ins)])
            orbit = (below,)
        else:
            have = {o for o, _ in cur.vertices}
            sites = {o for o, _ in dst_tree.vertices
                     if o in cur.edges and o not in have}
            if not sites:
                raise FactorizationError("outer growth stalled")
            pick = min(sites,
                       key=lambda o: (dst_tree.depth(o), sort_key(o)))
            orbit = cur_g.edge_orbit(pick)
            if not set(orbit) <= sites:
                raise NotEquivariant("graft sites are not a stable set")
            edges = set(cur.edges)
            vertices = list(cur.vertices)
            for o in orbit:
                ins = dst_tree.children_of(o)
                edges |= ins
                vertices.append((o, ins))
            bigger = Tree(edges, cur.root, vertices)
        step = TreeMorphism(cur, bigger, {e: e for e in cur.edges},
                            _checked=True)
        cur = bigger
        cur_g = gview(cur, dst)
        outer_steps.append(EquivariantStep("outer", orbit, step,
                                           before_g, cur_g))
    if cur != dst_tree:
        raise FactorizationError("outer growth missed the target")

    return EquivariantFactorization(tuple(degeneracies), iso,
                                    tuple(inner_steps), tuple(outer_steps))


class EquivariantPointedMap(PointedMap):
    """A pointed map between G-set carriers that commutes with the actions.

    The G-sets ride along as attributes; equality stays that of the
    underlying pointed map, so these mix freely with plain ones.
    """

    __slots__ = ("src_gset", "dst_gset")

    def __init__(self, src_gset, dst_gset, mapping):
        super().__init__(src_gset.elements, dst_gset.elements, mapping)
        self.src_gset = src_gset
        self.dst_gset = dst_gset
        if src_gset.group != dst_gset.group:
            raise NotEquivariant("pointed map needs a common group")
        for g in src_gset.group.elements:
            for b in src_gset.elements:
                v = self.mapping[b]
                want = PLUS if v == PLUS else dst_gset.act(g, v)
                if self.mapping[src_gset.act(g, b)] != want:
                    raise NotEquivariant("pointed map does not commute "
                                         "with the actions")


def enumerate_equivariant_pointed_maps(src_gset, dst_gset):
    """All equivariant pointed maps src+ -> dst+, deterministically.

    One image per source orbit representative: the basepoint, or any target
    whose stabilizer contains the representative's.
    """
    if src_gset.group != dst_gset.group:
        raise NotEquivariant("pointed maps need a common group")
    group = src_gset.group
    reps = [o.rep for o in src_gset.orbits()]
    choices = []
    for r in reps:
        need = set(src_gset.stabilizer(r))
        ok = [PLUS]
        ok.extend(y for y in dst_gset.elements
                  if need <= set(dst_gset.stabilizer(y)))
        choices.append(ok)
    out = []
    for pick in product(*choices):
        mapping = {}
        for r, y in zip(reps, pick):
            for g in group.elements:
                mapping[src_gset.act(g, r)] = (PLUS if y == PLUS
                                               else dst_gset.act(g, y))
        out.append(EquivariantPointedMap(src_gset, dst_gset, mapping))
    return tuple(out)


def phi_star_G(phi, glabeled):
    """Corolla substitution along an equivariant pointed map.

    The underlying tree is the plain phi_star; the action extends over the
    fresh leaves through the source G-set and fixes the fresh root.
    """
    if not isinstance(phi, EquivariantPointedMap):
        raise NotEquivariant("substitution needs an equivariant pointed map")
    if phi.dst_gset != glabeled.label_gset:
        raise LabelError("pointed map does not act on this label set")
    bigger = phi_star(phi, glabeled.labeled)
    new_root = bigger.tree.root
    layer = new_root[1]
    rows = {}
    for g in glabeled.gtree.group.elements:
        row = {e: glabeled.gtree.act(g, e) for e in glabeled.gtree.tree.edges}
        for b in phi.src_labels:
            row[("graft", layer, ("leaf", b))] = \
                ("graft", layer, ("leaf", phi.src_gset.act(g, b)))
        row[new_root] = new_root
        rows[g] = row
    gt = GTree(bigger.tree, glabeled.gtree.group, rows)
    return GLabeledTree(gt, phi.src_gset, bigger.labels)


def groth_hom_G(src, dst):
    """All equivariant (phi, fiber) pairs between labeled G-trees.

    phi runs over equivariant pointed maps from the target's labels to the
    source's; the fiber is a label-preserving, equivariant morphism from
    the substituted source.
    """
    out = []
    for phi in enumerate_equivariant_pointed_maps(dst.label_gset,
                                                  src.label_gset):
        mid = phi_star_G(phi, src)
        for fiber in hom_labeled(mid.labeled, dst.labeled):
            if is_equivariant_morphism(mid.gtree, dst.gtree, fiber):
                out.append((phi, fiber))
    return tuple(out)


def F_G(phi, fiber, src):
    """Project an equivariant (phi, fiber) pair to a plain tree morphism."""
    return compose(iota(phi, src.labeled), fiber)


def lift_G(f, src, dst):
    """The unique equivariant (phi, fiber) pair projecting to f.

    The plain lift already produces the right edge maps; this wraps its
    pointed map with the label actions, raising NotEquivariant when f does
    not commute with them.
    """
    gm = lift_morphism(f, src.labeled, dst.labeled)
    phi = EquivariantPointedMap(dst.label_gset, src.label_gset,
                                gm.phi.mapping)
    return phi, gm.fiber


def equivariant_canonical_key(gtree):
    """A complete invariant: canonical tree code plus the least relabeled
    action table over all canonical renamings."""
    canon = relabel_canonical(gtree.tree)
    order = tuple(canon.sorted_edges())
    best = None
    for m in all_isomorphisms(gtree.tree, canon):
        inv = {v: k for k, v in m.items()}
        table = tuple(tuple(m[gtree.act(g, inv[e])] for e in order)
                      for g in gtree.group.elements)
        if best is None or table < best:
            best = table
    return (canonical_form(gtree.tree), best)


def _stabilizer_subgroup_classes(group, stab):
    """Subgroups of a stabilizer, one per conjugacy class inside it."""
    inside = frozenset(stab)
    classes = {}
    for sub in subgroups(group):
        s = frozenset(sub)
        if not s <= inside:
            continue
        key = min(tuple(sorted(frozenset(group.conjugate(h, a) for a in s)))
                  for h in stab)
        classes.setdefault(key, tuple(sorted(s)))
    return [classes[k] for k in sorted(classes)]


def _orbit_graft_options(group, gtree, leaf, budget, max_corolla):
    """Corollas available over a leaf orbit: multisets of coset G-sets G/K
    with K inside the stabilizer, attached by translation; sizes bounded
    by the remaining edge budget.  The empty corolla (a stump orbit) is
    always an option."""
    stab = gtree.edge_stabilizer(leaf)
    types = []
    for sub in _stabilizer_subgroup_classes(group, stab):
        part = coset_gset(group, sub)
        if part.size <= min(budget, max_corolla):
            types.append(part)
    options = [()]

    def build(start, left, chosen):
        for i in range(start, len(types)):
            t = types[i]
            if t.size <= left:
                options.append(tuple(chosen + [t]))
                build(i, left - t.size, chosen + [t])

    build(0, min(budget, max_corolla), [])
    out = []
    for parts in options:
        if parts:
            corolla = disjoint_union_gsets(list(parts))
        else:
            corolla = trivial_gset(group, ())
        attach = {(i, x): gtree.act(x, leaf)
                  for i, p in enumerate(parts) for x in p.elements}
        if not parts:
            attach = {}
        out.append((corolla, attach))
    return out


def enumerate_gtrees(group, max_edges, max_corolla=4, per_stratum=None):
    """Distinct G-trees reachable by orbit grafts, up to equivariant
    isomorphism.

    Grows from the edge-only tree: each move grafts, over some leaf orbit,
    a corolla G-set assembled from cosets of subgroups of the stabilizer
    (the empty corolla caps the orbit with stumps).  Results keep at most
    max_edges edges.  per_stratum, when given, keeps only the first that
    many trees per edge count, in canonical-key order, after the closure.
    """
    eta = GTree.trivial(single_edge(), group)
    pool = {equivariant_canonical_key(eta): eta}
    frontier = [eta]
    while frontier:
        fresh = []
        for t in frontier:
            budget = max_edges - len(t.tree.edges)
            seen_orbits = set()
            for leaf in t.tree.leaves:
                orbit = t.edge_orbit(leaf)
                if orbit in seen_orbits:
                    continue
                seen_orbits.add(orbit)
                site = orbit[0]
                for corolla, attach in _orbit_graft_options(
                        group, t, site, budget, max_corolla):
                    if corolla.size > 0 and corolla.size > budget:
                        continue
                    bigger, _ = equivariant_graft_orbit(t, site, corolla,
                                                        attach=attach)
                    key = equivariant_canonical_key(bigger)
                    if key not in pool:
                        pool[key] = bigger
                        fresh.append(bigger)
        frontier = fresh
    out = sorted(pool.items(), key=lambda kv: (len(kv[1].tree.edges), kv[0]))
    if per_stratum is None:
        return tuple(t for _, t in out)
    # keep a variety of actions per edge count: bucket each stratum by its
    # orbit-size profile, liveliest first, and deal round-robin
    strata = {}
    for _, t in out:
        strata.setdefault(len(t.tree.edges), []).append(t)
    kept = []
    for n in sorted(strata):
        buckets = {}
        for t in strata[n]:
            profile = tuple(sorted((len(o) for o in t.edge_orbits()),
                                   reverse=True))
            buckets.setdefault(profile, []).append(t)
        ordered = [buckets[p] for p in sorted(buckets, reverse=True)]
        taken = []
        rank = 0
        while len(taken) < per_stratum:
            row = [b[rank] for b in ordered if rank < len(b)]
            if not row:
                break
            taken.extend(row[:per_stratum - len(taken)])
            rank += 1
        kept.extend(taken)
    return tuple(kept)


def gset_pointed_category(group, max_size):
    """Pointed G-sets of bounded size and their equivariant pointed maps.

    Objects are the skeletal G-sets themselves; composition is
    diagrammatic on the underlying pointed maps.
    """
    from .oplax import FcMor, FiniteCategory

    objects = skeletal_gsets(group, max_size)
    mors = []
    for a in objects:
        for b in objects:
            for pm in enumerate_equivariant_pointed_maps(a, b):
                mors.append(FcMor(pm, a, b))
    table = {}
    for f in mors:
        for g in mors:
            if f.dst == g.src:
                pm = compose_pointed(f.name, g.name)
                table[(f, g)] = FcMor(
                    EquivariantPointedMap(f.src, g.dst, pm.mapping),
                    f.src, g.dst)
    idents = {a: FcMor(EquivariantPointedMap(a, a,
                                             {x: x for x in a.elements}),
                       a, a)
              for a in objects}
    return FiniteCategory(objects, mors, table, idents)


def corolla_glabeled(gset):
    """The one-vertex tree whose leaves are the G-set itself."""
    root = ("root",)
    tree = Tree(set(gset.elements) | {root}, root,
                [(root, list(gset.elements))])
    rows = {g: {e: (root if e == root else gset.act(g, e))
                for e in tree.edges}
            for g in gset.group.elements}
    gt = GTree(tree, gset.group, rows)
    return GLabeledTree(gt, gset, {a: a for a in gset.elements})


def standard_probes(gsets, deep=True):
    """A few labeled G-trees per G-set: the corolla, a root split, and a
    split along the first leaf orbit."""
    probes = {}
    for a in gsets:
        plain = corolla_glabeled(a)
        items = [plain]
        if deep:
            rooted, _ = equivariant_split_orbit(plain.gtree,
                                                plain.gtree.tree.root)
            items.append(GLabeledTree(rooted, a, dict(plain.labeled.labels)))
            if a.size:
                first = a.orbits()[0].rep
                split, _ = equivariant_split_orbit(plain.gtree,
                                                   plain.leaf_of(first))
                labels = {}
                for b in a.elements:
                    leaf = plain.leaf_of(b)
                    labels[b] = (("split", leaf)
                                 if b in a.orbit(first) else leaf)
                items.append(GLabeledTree(split, a, labels))
        probes[a] = tuple(items)
    return probes


def gtree_oplax_data(group, max_size, probes, base=None):
    """Equivariant corolla substitution packaged for the coherence checker.

    Identical arithmetic to the plain substitution data: fiber arrows are
    edge-mapping dicts, fresh edges are named by label and layer, and the
    comparison cells shift layers label by label.  The base category
    defaults to the pointed G-set one of the given size; probes map each
    G-set to labeled G-trees over it.
    """
    from .oplax import OplaxFunctorData

    if base is None:
        base = gset_pointed_category(group, max_size)
    probes = {a: tuple(ts) for a, ts in probes.items()}

    def app_obj(f, x):
        return phi_star_G(f.name, x)

    def app_mor(f, m, x, y):
        pushed = dict(m)
        src_layer = _fresh_layer(x.gtree.tree)
        dst_layer = _fresh_layer(y.gtree.tree)
        for j in f.name.src_labels:
            pushed[("graft", src_layer, ("leaf", j))] = \
                ("graft", dst_layer, ("leaf", j))
        pushed[("graft", src_layer, "root")] = ("graft", dst_layer, "root")
        return pushed

    def data_tau_comp(f, g, x):
        layer = _fresh_layer(x.gtree.tree)
        cell = {e: e for e in x.gtree.tree.edges}
        for j in f.name.src_labels:
            cell[("graft", layer, ("leaf", j))] = \
                ("graft", layer + 1, ("leaf", j))
        cell[("graft", layer, "root")] = ("graft", layer + 1, "root")
        return cell

    def data_tau_id(n, x):
        layer = _fresh_layer(x.gtree.tree)
        cell = {e: e for e in x.gtree.tree.edges}
        for j in x.labeled.label_set:
            cell[("graft", layer, ("leaf", j))] = x.leaf_of(j)
        cell[("graft", layer, "root")] = x.gtree.tree.root
        return cell

    def fiber_hom(n, x, y):
        return tuple(dict(t.mapping)
                     for t in hom_labeled(x.labeled, y.labeled)
                     if is_equivariant_morphism(x.gtree, y.gtree, t))

    return OplaxFunctorData(
        base=base,
        fiber_objects=lambda a: probes.get(a, ()),
        app_obj=app_obj,
        app_mor=app_mor,
        tau_comp=data_tau_comp,
        tau_id=data_tau_id,
        fiber_compose=lambda a, m1, m2: {e: m2[v] for e, v in m1.items()},
        fiber_identity=lambda a, x: {e: e for e in x.gtree.tree.edges},
        fiber_hom=fiber_hom,
    )


@dataclass(frozen=True)
class OrbitContractionSample:
    """A worked cyclic-order-four example: a big labeled G-tree, the
    result of contracting one two-edge orbit, the further contraction of a
    fixed inner edge, and the connecting faces."""

    group: object
    label_gset: GSet
    big: GLabeledTree
    mid: GLabeledTree
    small: GLabeledTree
    face_d: TreeMorphism
    face_b: TreeMorphism
    face: TreeMorphism


def z4_orbit_contraction_sample():
    """Build the cyclic-order-four sample used across tests and the CLI.

    The big tree has eleven edges; the generator swaps the branches over
    "b" and "e" pairwise and cycles the four leaves "c", "ic", "-c",
    "-ic".  Labels form a G-set with one free orbit and one two-element
    orbit whose stabilizer has order two.  Contracting the orbit {d, id}
    gives the nine-edge mid tree; contracting the fixed edge {b} as well
    gives the eight-edge small tree.
    """
    group = cyclic_group(4)
    labels = GSet.from_generator_rows(group, ["x", "ix", "y", "-y", "iy", "-iy"],
                                      {1: {"x": "ix", "ix": "x",
                                           "y": "iy", "iy": "-y",
                                           "-y": "-iy", "-iy": "y"}})
    big_tree = Tree(
        ["r", "b", "e", "a", "ia", "d", "id", "c", "-c", "ic", "-ic"], "r",
        [("r", ["b", "e"]), ("b", ["a", "ia"]), ("e", ["d", "id"]),
         ("d", ["c", "-c"]), ("id", ["ic", "-ic"])])
    gen = {"r": "r", "b": "b", "e": "e", "a": "ia", "ia": "a",
           "d": "id", "id": "d",
           "c": "ic", "ic": "-c", "-c": "-ic", "-ic": "c"}
    big_g = GTree.from_generator_rows(big_tree, group, {1: gen})
    label_map = {"x": "a", "ix": "ia", "y": "c", "-y": "-c",
                 "iy": "ic", "-iy": "-ic"}
    big = GLabeledTree(big_g, labels, label_map)
    mid_g, face_d = equivariant_contract_orbit(big_g, "d")
    mid = GLabeledTree(mid_g, labels, label_map)
    small_g, face_b = equivariant_contract_orbit(mid_g, "b")
    small = GLabeledTree(small_g, labels, label_map)
    return OrbitContractionSample(group, labels, big, mid, small,
                                  face_d, face_b, compose(face_b, face_d))
