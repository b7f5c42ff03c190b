"""Forests of trees with group actions and the categories built on them.

A forest is a finite indexed family of trees.  Acting groups permute the
components, carrying along isomorphisms between them; a forest whose roots
form a single orbit is the genuine kind.  Such a forest can be repackaged
as a diagram over a coset groupoid, optionally labeled by a retractive
G-set, and this module provides both packagings, the translations between
them, and exhaustive checks that the translations are equivalences on
small corpora.
"""

import itertools
import json

from .trees import Tree, TreeError, relabel, sort_key, tree_to_json, \
    tree_from_json
from .morphisms import MorphismError, TreeMorphism, hom_set, compose, \
    identity
from .labels import PLUS, LabeledTree, PointedMap, LabelError
from .substitution import phi_star, iota
from .oplax import FcMor, FiniteCategory, FcFunctor, group_category, \
    check_equivalence
from .groups import FiniteGroup, GSet, GroupError, coset_gset, \
    subgroups, subgroup_conjugacy_key, equivariant_maps
from .gtrees import GTree, NotEquivariant, enumerate_gtrees


class ForestError(ValueError):
    pass


class ActionNotFunctorial(ForestError):
    """Component data that fails to compose like the group."""


class ComponentIsoInvalid(ForestError):
    """A component map that is not an isomorphism of trees."""


class Forest:
    """An indexed family of trees; indices run 0..n-1."""

    __slots__ = ("components", "_hash")

    def __init__(self, components):
        self.components = tuple(components)
        if not self.components:
            raise ForestError("a forest needs at least one component")
        for t in self.components:
            if not isinstance(t, Tree):
                raise ForestError("components must be trees")
        self._hash = None

    @property
    def n(self):
        return len(self.components)

    def __eq__(self, other):
        if not isinstance(other, Forest):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.components)
        return self._hash

    def __repr__(self):
        return f"<Forest of {self.n}>"


class ForestMorphism:
    """A map of forests: an index function plus one tree map per component."""

    __slots__ = ("src", "dst", "index_map", "components", "_hash")

    def __init__(self, src, dst, index_map, components, _checked=False):
        self.src = src
        self.dst = dst
        self.index_map = tuple(index_map)
        self.components = tuple(components)
        self._hash = None
        if _checked:
            return
        if len(self.index_map) != src.n or len(self.components) != src.n:
            raise ForestError("one index and one tree map per component")
        for i, j in enumerate(self.index_map):
            if not 0 <= j < dst.n:
                raise ForestError(f"component {i} maps outside the target")
            f = self.components[i]
            if f.src != src.components[i] or f.dst != dst.components[j]:
                raise ForestError(f"component map {i} has wrong endpoints")

    def __call__(self, i, edge):
        return self.index_map[i], self.components[i].mapping[edge]

    def is_identity(self):
        return (self.src == self.dst
                and self.index_map == tuple(range(self.src.n))
                and all(f.is_identity() for f in self.components))

    def __eq__(self, other):
        if not isinstance(other, ForestMorphism):
            return NotImplemented
        return (self.src == other.src and self.dst == other.dst
                and self.index_map == other.index_map
                and self.components == other.components)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.index_map, self.components))
        return self._hash

    def __repr__(self):
        return f"<ForestMorphism {self.index_map}>"


def forest_identity(forest):
    return ForestMorphism(forest, forest, range(forest.n),
                          [identity(t) for t in forest.components],
                          _checked=True)


def compose_forests(first, second):
    """Diagrammatic composition of forest morphisms."""
    if first.dst != second.src:
        raise ForestError("forest morphisms do not compose")
    idx = [second.index_map[j] for j in first.index_map]
    comps = [compose(first.components[i],
                     second.components[first.index_map[i]])
             for i in range(first.src.n)]
    return ForestMorphism(first.src, second.dst, idx, comps, _checked=True)


class GForest:
    """A forest with a group permuting components through isomorphisms.

    index_action maps each group element to a permutation of the indices,
    and isos[(g, i)] is the edge bijection from component i to component
    g.i.  The data must compose like the group.
    """

    __slots__ = ("forest", "group", "index_action", "isos", "_hash")

    def __init__(self, forest, group, index_action, isos):
        self.forest = forest
        self.group = group
        self.index_action = {g: tuple(row)
                             for g, row in dict(index_action).items()}
        self.isos = {k: dict(v) for k, v in dict(isos).items()}
        self._hash = None
        self._validate()

    def _validate(self):
        n = self.forest.n
        group = self.group
        if set(self.index_action) != set(group.elements):
            raise ActionNotFunctorial("one index row per group element")
        for g, row in self.index_action.items():
            if sorted(row) != list(range(n)):
                raise ActionNotFunctorial(f"row of {g} is not a permutation")
        if self.index_action[group.identity] != tuple(range(n)):
            raise ActionNotFunctorial("identity must act trivially")
        for a in group.elements:
            for b in group.elements:
                ab = group.mul(a, b)
                for i in range(n):
                    if self.index_action[ab][i] \
                            != self.index_action[a][self.index_action[b][i]]:
                        raise ActionNotFunctorial(
                            "index rows do not compose as the group")
        if set(self.isos) != {(g, i) for g in group.elements
                              for i in range(n)}:
            raise ActionNotFunctorial("one component iso per element and "
                                      "component")
        for (g, i), m in self.isos.items():
            j = self.index_action[g][i]
            src = self.forest.components[i]
            dst = self.forest.components[j]
            try:
                tm = TreeMorphism(src, dst, m)
            except (TreeError, MorphismError) as exc:
                raise ComponentIsoInvalid(f"iso ({g}, {i}): {exc}") from exc
            if not tm.is_isomorphism():
                raise ComponentIsoInvalid(f"iso ({g}, {i}) is not invertible")
        for i in range(n):
            e = self.isos[(group.identity, i)]
            if any(e[x] != x for x in self.forest.components[i].edges):
                raise ActionNotFunctorial("identity isos must be trivial")
        for a in group.elements:
            for b in group.elements:
                ab = group.mul(a, b)
                for i in range(n):
                    via = {x: self.isos[(a, self.index_action[b][i])][y]
                           for x, y in self.isos[(b, i)].items()}
                    if via != self.isos[(ab, i)]:
                        raise ActionNotFunctorial(
                            "component isos do not compose as the group")

    @classmethod
    def trivial(cls, forest, group):
        n = forest.n
        rows = {g: tuple(range(n)) for g in group.elements}
        isos = {(g, i): {e: e for e in forest.components[i].edges}
                for g in group.elements for i in range(n)}
        return cls(forest, group, rows, isos)

    @classmethod
    def from_generator_rows(cls, forest, group, rows, isos):
        """Close index rows and isos given on a generating set."""
        n = forest.n
        have_idx = {group.identity: tuple(range(n))}
        have_iso = {(group.identity, i):
                    {e: e for e in forest.components[i].edges}
                    for i in range(n)}
        for g, row in rows.items():
            have_idx[g] = tuple(row)
            for i in range(n):
                have_iso[(g, i)] = dict(isos[(g, i)])
        grew = True
        while grew:
            grew = False
            for a in list(have_idx):
                for b in list(have_idx):
                    ab = group.mul(a, b)
                    if ab in have_idx:
                        continue
                    have_idx[ab] = tuple(have_idx[a][have_idx[b][i]]
                                         for i in range(n))
                    for i in range(n):
                        have_iso[(ab, i)] = {
                            x: have_iso[(a, have_idx[b][i])][y]
                            for x, y in have_iso[(b, i)].items()}
                    grew = True
        if set(have_idx) != set(group.elements):
            raise ActionNotFunctorial("rows do not generate the whole group")
        return cls(forest, group, have_idx, have_iso)

    def act_index(self, g, i):
        return self.index_action[g][i]

    def component_iso(self, g, i):
        j = self.index_action[g][i]
        return TreeMorphism(self.forest.components[i],
                            self.forest.components[j],
                            self.isos[(g, i)], _checked=True)

    def __eq__(self, other):
        if not isinstance(other, GForest):
            return NotImplemented
        return (self.forest == other.forest and self.group == other.group
                and self.index_action == other.index_action
                and self.isos == other.isos)

    def __hash__(self):
        if self._hash is None:
            rows = tuple(tuple(self.index_action[g])
                         for g in self.group.elements)
            self._hash = hash((self.forest, self.group, rows))
        return self._hash

    def __repr__(self):
        return f"<GForest of {self.forest.n} under order-" \
               f"{self.group.order} group>"


def validate_gforest(forest, group, index_action, isos):
    """Build a GForest, checking every functoriality condition."""
    return GForest(forest, group, index_action, isos)


def gtree_to_gforest(gtree):
    """A single-component forest out of a tree with an action."""
    forest = Forest([gtree.tree])
    rows = {g: (0,) for g in gtree.group.elements}
    isos = {(g, 0): dict(gtree.action[g]) for g in gtree.group.elements}
    return GForest(forest, gtree.group, rows, isos)


def root_gset(gforest):
    """The roots of the components as a G-set."""
    carrier = [(i, t.root) for i, t in enumerate(gforest.forest.components)]
    rows = {}
    for g in gforest.group.elements:
        rows[g] = {}
        for i, t in enumerate(gforest.forest.components):
            j = gforest.index_action[g][i]
            rows[g][(i, t.root)] = (j, gforest.isos[(g, i)][t.root])
    return GSet(gforest.group, carrier, rows)


def is_genuine(gforest):
    """Is the action transitive on the roots?"""
    return root_gset(gforest).is_transitive()


def is_equivariant_forest_morphism(src, dst, fm):
    """Does (index map, tree maps) commute with both forest actions?

    The check runs on (index, edge) pairs, so a coincidence of edge names
    between different components cannot mask an index mismatch.
    """
    if fm.src != src.forest or fm.dst != dst.forest:
        raise ForestError("morphism does not match the actions")
    for g in src.group.elements:
        if g == src.group.identity:
            continue
        for i in range(src.forest.n):
            gi = src.index_action[g][i]
            if fm.index_map[gi] != dst.index_action[g][fm.index_map[i]]:
                return False
            fi = fm.components[i].mapping
            fgi = fm.components[gi].mapping
            up = src.isos[(g, i)]
            over = dst.isos[(g, fm.index_map[i])]
            if any(fgi[up[e]] != over[fi[e]]
                   for e in src.forest.components[i].edges):
                return False
    return True


def _index_orbits(gforest):
    seen = set()
    orbits = []
    for i in range(gforest.forest.n):
        if i in seen:
            continue
        orb = sorted({gforest.index_action[g][i]
                      for g in gforest.group.elements})
        seen.update(orb)
        orbits.append(orb)
    return orbits


def forest_hom(src, dst):
    """All equivariant forest morphisms src -> dst.

    Index maps that fail equivariance support no morphism at all (the
    commuting squares force the index map to commute with the actions),
    so only equivariant ones are expanded; a component map is chosen at
    one representative per index orbit and transported along the action.
    """
    if src.group != dst.group:
        raise ForestError("hom needs a common group")
    group = src.group
    orbits = _index_orbits(src)
    out = []
    for idx in itertools.product(range(dst.forest.n),
                                 repeat=src.forest.n):
        if any(idx[src.index_action[g][i]] != dst.index_action[g][idx[i]]
               for g in group.elements for i in range(src.forest.n)):
            continue
        per_orbit = []
        for orb in orbits:
            r = orb[0]
            cands = []
            for f in hom_set(src.forest.components[r],
                             dst.forest.components[idx[r]]):
                ok = True
                for s in group.elements:
                    if src.index_action[s][r] != r:
                        continue
                    up = src.isos[(s, r)]
                    over = dst.isos[(s, idx[r])]
                    if any(f.mapping[up[e]] != over[f.mapping[e]]
                           for e in f.src.edges):
                        ok = False
                        break
                if ok:
                    cands.append(f)
            per_orbit.append((orb, cands))
        for choice in itertools.product(*(c for _, c in per_orbit)):
            comps = [None] * src.forest.n
            for (orb, _), f in zip(per_orbit, choice):
                r = orb[0]
                comps[r] = f
                for g in group.elements:
                    i = src.index_action[g][r]
                    if comps[i] is not None:
                        continue
                    up = src.isos[(g, r)]
                    over = dst.isos[(g, idx[r])]
                    moved = {up[e]: over[v]
                             for e, v in f.mapping.items()}
                    comps[i] = TreeMorphism(src.forest.components[i],
                                            dst.forest.components[idx[i]],
                                            moved, _checked=True)
            out.append(ForestMorphism(src.forest, dst.forest, idx, comps,
                                      _checked=True))
    return tuple(out)


# ---------------------------------------------------------------------------
# coset groupoids


def subgroup_group(group, members):
    """A subgroup repackaged as a group of its own, with the embedding.

    Returns the new group and the tuple sending its elements back into
    the ambient one.
    """
    elems = sorted(members)
    pos = {x: i for i, x in enumerate(elems)}
    if group.identity not in pos:
        raise GroupError("a subgroup contains the identity")
    mult = []
    for a in elems:
        row = []
        for b in elems:
            ab = group.mul(a, b)
            if ab not in pos:
                raise GroupError("subgroup is not closed")
            row.append(pos[ab])
        mult.append(tuple(row))
    names = tuple(group.name_of(x) for x in elems) \
        if group.names is not None else None
    return FiniteGroup(tuple(mult), names=names), tuple(elems)


def coset_groupoid(group, sub):
    """Left cosets with translations: one arrow per group element and coset.

    Distinct group elements give distinct arrows even when they move a
    coset the same way, so every hom-set has as many arrows as the
    subgroup has elements.
    """
    base = coset_gset(group, tuple(sub))
    objects = base.elements
    mors = {}
    for x in group.elements:
        for c in objects:
            mors[(x, c)] = FcMor(x, c, base.act(x, c))
    table = {}
    for (x, c), a in mors.items():
        for y in group.elements:
            b = mors[(y, a.dst)]
            table[(a, b)] = mors[(group.mul(y, x), c)]
    idents = {c: mors[(group.identity, c)] for c in objects}
    return FiniteCategory(objects, mors.values(), table, idents).validate()


def bh_to_coset_groupoid(group, sub):
    """The one-object category of a subgroup, embedded at the identity coset.

    Returns the functor together with the exhaustive equivalence report,
    certifying that the embedding is full, faithful and essentially
    surjective.
    """
    sub = tuple(sorted(sub))
    bh = group_category(sub, group.mul, group.identity)
    gpd = coset_groupoid(group, sub)
    base = coset_gset(group, sub)
    c0 = base.act(group.identity, min(sub))
    ob = {"*": c0}
    mor = {}
    for m in bh.morphisms:
        mor[m] = next(a for a in gpd.morphisms
                      if a.name == m.name and a.src == c0)
    functor = FcFunctor(bh, gpd, ob, mor)
    functor.validate()
    return functor, check_equivalence(functor)


class CosetDiagram:
    """A functor from a coset groupoid to trees.

    One tree per coset, plus an edge bijection for every translation
    arrow; the bijections must compose like the translations.
    """

    __slots__ = ("group", "sub", "trees", "isos", "_hash")

    def __init__(self, group, sub, trees, isos):
        self.group = group
        self.sub = tuple(sorted(sub))
        self.trees = dict(trees)
        self.isos = {k: dict(v) for k, v in dict(isos).items()}
        self._hash = None
        self._validate()

    def _validate(self):
        base = coset_gset(self.group, self.sub)
        if set(self.trees) != set(base.elements):
            raise ForestError("one tree per coset")
        want = {(x, c) for x in self.group.elements for c in base.elements}
        if set(self.isos) != want:
            raise ActionNotFunctorial("one iso per translation arrow")
        for (x, c), m in self.isos.items():
            try:
                tm = TreeMorphism(self.trees[c], self.trees[base.act(x, c)],
                                  m)
            except (TreeError, MorphismError) as exc:
                raise ComponentIsoInvalid(f"translation ({x}, {c}): "
                                          f"{exc}") from exc
            if not tm.is_isomorphism():
                raise ComponentIsoInvalid(
                    f"translation ({x}, {c}) is not invertible")
        for c in base.elements:
            e = self.isos[(self.group.identity, c)]
            if any(e[x] != x for x in self.trees[c].edges):
                raise ActionNotFunctorial("identity translations must be "
                                          "trivial")
        for a in self.group.elements:
            for b in self.group.elements:
                ab = self.group.mul(a, b)
                for c in base.elements:
                    via = {x: self.isos[(a, base.act(b, c))][y]
                           for x, y in self.isos[(b, c)].items()}
                    if via != self.isos[(ab, c)]:
                        raise ActionNotFunctorial(
                            "translations do not compose as the group")

    @property
    def cosets(self):
        return coset_gset(self.group, self.sub).elements

    def act_coset(self, x, c):
        return coset_gset(self.group, self.sub).act(x, c)

    def translation(self, x, c):
        return TreeMorphism(self.trees[c],
                            self.trees[self.act_coset(x, c)],
                            self.isos[(x, c)], _checked=True)

    def __eq__(self, other):
        if not isinstance(other, CosetDiagram):
            return NotImplemented
        return (self.group == other.group and self.sub == other.sub
                and self.trees == other.trees and self.isos == other.isos)

    def __hash__(self):
        if self._hash is None:
            items = tuple(sorted(self.trees.items(),
                                 key=lambda p: sort_key(p[0])))
            self._hash = hash((self.group, self.sub, items))
        return self._hash

    def __repr__(self):
        return f"<CosetDiagram over {len(self.trees)} cosets>"


def diagram_from_gtree(gtree, group, sub):
    """Spread a tree with a subgroup action over the whole coset groupoid.

    Every coset carries the same underlying tree; a translation arrow acts
    by the subgroup element it represents relative to the minimal coset
    representatives.  The identity coset then carries exactly the given
    action.
    """
    sub = tuple(sorted(sub))
    subset = set(sub)
    hgrp, elems = subgroup_group(group, sub)
    if gtree.group != hgrp:
        raise NotEquivariant("tree action must be over the subgroup")
    pos = {x: i for i, x in enumerate(elems)}
    base = coset_gset(group, sub)
    trees = {c: gtree.tree for c in base.elements}
    isos = {}
    for x in group.elements:
        for c in base.elements:
            d = base.act(x, c)
            h = group.mul(group.inverse(d), group.mul(x, c))
            if h not in subset:
                raise NotEquivariant("coset representatives are broken")
            isos[(x, c)] = dict(gtree.action[pos[h]])
    return CosetDiagram(group, sub, trees, isos)


def diagram_to_gtree(diagram):
    """The tree at the identity coset with its subgroup action."""
    hgrp, elems = subgroup_group(diagram.group, diagram.sub)
    c0 = min(diagram.cosets)
    rows = {i: dict(diagram.isos[(x, c0)]) for i, x in enumerate(elems)}
    return GTree(diagram.trees[c0], hgrp, rows)


class DiagramMorphism:
    """A natural transformation between coset diagrams: one tree map per
    coset, commuting with every translation."""

    __slots__ = ("src", "dst", "components", "_hash")

    def __init__(self, src, dst, components, _checked=False):
        self.src = src
        self.dst = dst
        self.components = dict(components)
        self._hash = None
        if _checked:
            return
        if (src.group, src.sub) != (dst.group, dst.sub):
            raise ForestError("diagrams live over different groupoids")
        if set(self.components) != set(src.trees):
            raise ForestError("one component per coset")
        for c, f in self.components.items():
            if f.src != src.trees[c] or f.dst != dst.trees[c]:
                raise ForestError(f"component at {c!r} has wrong endpoints")
        for x in src.group.elements:
            for c in src.trees:
                d = src.act_coset(x, c)
                up = src.isos[(x, c)]
                over = dst.isos[(x, c)]
                fc = self.components[c].mapping
                fd = self.components[d].mapping
                if any(fd[up[e]] != over[fc[e]] for e in src.trees[c].edges):
                    raise ForestError("components do not commute with "
                                      "translations")

    def is_identity(self):
        return (self.src == self.dst
                and all(f.is_identity() for f in self.components.values()))

    def __eq__(self, other):
        if not isinstance(other, DiagramMorphism):
            return NotImplemented
        return (self.src == other.src and self.dst == other.dst
                and self.components == other.components)

    def __hash__(self):
        if self._hash is None:
            items = tuple(sorted(self.components.items(),
                                 key=lambda p: sort_key(p[0])))
            self._hash = hash(items)
        return self._hash

    def __repr__(self):
        return f"<DiagramMorphism over {len(self.components)} cosets>"


def compose_diagram(first, second):
    if first.dst != second.src:
        raise ForestError("diagram morphisms do not compose")
    comps = {c: compose(first.components[c], second.components[c])
             for c in first.components}
    return DiagramMorphism(first.src, second.dst, comps, _checked=True)


def diagram_identity(diagram):
    return DiagramMorphism(diagram, diagram,
                           {c: identity(t) for c, t in diagram.trees.items()},
                           _checked=True)


def diagram_hom(src, dst):
    """All natural transformations src => dst.

    The component at the identity coset determines the rest by
    translation; candidates must commute with the arrows stabilizing that
    coset.
    """
    if (src.group, src.sub) != (dst.group, dst.sub):
        raise ForestError("diagrams live over different groupoids")
    group = src.group
    base = coset_gset(group, src.sub)
    c0 = min(base.elements)
    reps = {c: min(x for x in group.elements if base.act(x, c0) == c)
            for c in base.elements}
    stab = [s for s in group.elements if base.act(s, c0) == c0]
    out = []
    for f0 in hom_set(src.trees[c0], dst.trees[c0]):
        ok = True
        for s in stab:
            up = src.isos[(s, c0)]
            over = dst.isos[(s, c0)]
            if any(f0.mapping[up[e]] != over[f0.mapping[e]]
                   for e in src.trees[c0].edges):
                ok = False
                break
        if not ok:
            continue
        comps = {}
        for c, r in reps.items():
            up = src.isos[(r, c0)]
            over = dst.isos[(r, c0)]
            moved = {up[e]: over[v] for e, v in f0.mapping.items()}
            comps[c] = TreeMorphism(src.trees[c], dst.trees[c], moved,
                                    _checked=True)
        out.append(DiagramMorphism(src, dst, comps))
    return tuple(out)


def assemble_gforest(diagram):
    """Lay the diagram's trees out as components of a forest.

    Components are ordered by coset; the result is always genuine.
    """
    cosets = list(diagram.cosets)
    pos = {c: i for i, c in enumerate(cosets)}
    forest = Forest([diagram.trees[c] for c in cosets])
    rows = {g: tuple(pos[diagram.act_coset(g, c)] for c in cosets)
            for g in diagram.group.elements}
    isos = {(g, pos[c]): dict(diagram.isos[(g, c)])
            for g in diagram.group.elements for c in cosets}
    return GForest(forest, diagram.group, rows, isos)


def split_gforest(gforest):
    """Present a genuine forest as a coset diagram.

    The subgroup is the stabilizer of component 0; the coset named c picks
    out the component c.0.  Returns the diagram together with that map
    from cosets to component indices.
    """
    if not is_genuine(gforest):
        raise ForestError("only a transitive root action splits")
    group = gforest.group
    sub = tuple(g for g in group.elements
                if gforest.index_action[g][0] == 0)
    base = coset_gset(group, sub)
    component_of = {c: gforest.index_action[c][0] for c in base.elements}
    trees = {c: gforest.forest.components[i]
             for c, i in component_of.items()}
    isos = {(x, c): dict(gforest.isos[(x, component_of[c])])
            for x in group.elements for c in base.elements}
    return CosetDiagram(group, sub, trees, isos), component_of


def orbit_category(group):
    """Transitive G-sets, one per subgroup conjugacy class, and all maps.

    Arrows are named by their full graph so the table can be assembled by
    composing the underlying functions.
    """
    seen = {}
    for sub in subgroups(group):
        key = subgroup_conjugacy_key(group, tuple(sub))
        entry = tuple(sorted(sub))
        if key not in seen or entry < seen[key]:
            seen[key] = entry
    objects = [coset_gset(group, s)
               for s in sorted(seen.values(), key=lambda s: (-len(s), s))]
    mors = {}
    for a, b in itertools.product(objects, repeat=2):
        for m in equivariant_maps(a, b):
            graph = tuple(sorted(m.items()))
            mors[(a, b, graph)] = FcMor(graph, a, b)
    table = {}
    for (a, b, g1), m1 in mors.items():
        d1 = dict(g1)
        for (b2, c, g2), m2 in mors.items():
            if b2 != b:
                continue
            d2 = dict(g2)
            graph = tuple(sorted((x, d2[y]) for x, y in d1.items()))
            table[(m1, m2)] = mors[(a, c, graph)]
    idents = {a: mors[(a, a, tuple((x, x) for x in a.elements))]
              for a in objects}
    return FiniteCategory(objects, mors.values(), table, idents).validate()


# ---------------------------------------------------------------------------
# retractive G-sets and labeled genuine trees


class RetractiveGSet:
    """A G-set split over an orbit: section and retraction compose to the
    identity of the cosets."""

    __slots__ = ("group", "sub", "carrier", "section", "retraction", "_hash")

    def __init__(self, group, sub, carrier, section, retraction):
        self.group = group
        self.sub = tuple(sorted(sub))
        self.carrier = carrier
        self.section = dict(section)
        self.retraction = dict(retraction)
        self._hash = None
        base = coset_gset(group, self.sub)
        if carrier.group != group:
            raise ForestError("carrier must be over the same group")
        if set(self.section) != set(base.elements):
            raise ForestError("section must be total on the cosets")
        if set(self.retraction) != set(carrier.elements):
            raise ForestError("retraction must be total on the carrier")
        for c in base.elements:
            if self.retraction[self.section[c]] != c:
                raise ForestError("retraction must undo the section")
        for g in group.elements:
            for c in base.elements:
                if carrier.act(g, self.section[c]) \
                        != self.section[base.act(g, c)]:
                    raise NotEquivariant("section is not equivariant")
            for x in carrier.elements:
                if self.retraction[carrier.act(g, x)] \
                        != base.act(g, self.retraction[x]):
                    raise NotEquivariant("retraction is not equivariant")

    @property
    def base(self):
        return coset_gset(self.group, self.sub)

    @property
    def labels(self):
        """The carrier minus the section image, in carrier order."""
        pts = set(self.section.values())
        return tuple(x for x in self.carrier.elements if x not in pts)

    def fiber(self, c):
        return tuple(x for x in self.labels if self.retraction[x] == c)

    def __eq__(self, other):
        if not isinstance(other, RetractiveGSet):
            return NotImplemented
        return (self.group == other.group and self.sub == other.sub
                and self.carrier == other.carrier
                and self.section == other.section
                and self.retraction == other.retraction)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.group, self.sub, self.carrier))
        return self._hash

    def __repr__(self):
        return f"<RetractiveGSet {len(self.labels)}+ over " \
               f"{len(self.section)} cosets>"


class RetractiveMap:
    """An equivariant map of carriers over and under the orbit."""

    __slots__ = ("src", "dst", "mapping", "_hash")

    def __init__(self, src, dst, mapping):
        if (src.group, src.sub) != (dst.group, dst.sub):
            raise ForestError("retractive sets live over different orbits")
        self.src = src
        self.dst = dst
        self.mapping = dict(mapping)
        self._hash = None
        if set(self.mapping) != set(src.carrier.elements):
            raise ForestError("map must be total on the source carrier")
        targets = set(dst.carrier.elements)
        for x, v in self.mapping.items():
            if v not in targets:
                raise ForestError(f"image {v!r} is not a target element")
            if dst.retraction[v] != src.retraction[x]:
                raise ForestError("map must live over the orbit")
        for c in src.section:
            if self.mapping[src.section[c]] != dst.section[c]:
                raise ForestError("map must live under the orbit")
        for g in src.group.elements:
            for x in src.carrier.elements:
                if self.mapping[src.carrier.act(g, x)] \
                        != dst.carrier.act(g, self.mapping[x]):
                    raise NotEquivariant("retractive map is not equivariant")

    def is_identity(self):
        return (self.src == self.dst
                and all(v == k for k, v in self.mapping.items()))

    def __eq__(self, other):
        if not isinstance(other, RetractiveMap):
            return NotImplemented
        return (self.src == other.src and self.dst == other.dst
                and self.mapping == other.mapping)

    def __hash__(self):
        if self._hash is None:
            items = tuple(sorted(self.mapping.items(),
                                 key=lambda p: sort_key(p[0])))
            self._hash = hash(items)
        return self._hash

    def __repr__(self):
        return f"<RetractiveMap on {len(self.mapping)} elements>"


def retractive_identity(ret):
    return RetractiveMap(ret, ret, {x: x for x in ret.carrier.elements})


def enumerate_retractive_maps(src, dst):
    """All maps of retractive sets src -> dst, deterministically.

    Section points are forced; other orbit representatives may go to any
    target over the same coset (the section point included) whose
    stabilizer is large enough.
    """
    group = src.group
    pts = set(src.section.values())
    reps = [o.rep for o in src.carrier.orbits()]
    choice_sets = []
    for r in reps:
        if r in pts:
            choice_sets.append([dst.section[src.retraction[r]]])
            continue
        stab = set(src.carrier.stabilizer(r))
        choice_sets.append([x for x in dst.carrier.elements
                            if dst.retraction[x] == src.retraction[r]
                            and stab <= set(dst.carrier.stabilizer(x))])
    out = []
    for images in itertools.product(*choice_sets):
        mapping = {}
        for r, img in zip(reps, images):
            for g in group.elements:
                mapping[src.carrier.act(g, r)] = dst.carrier.act(g, img)
        out.append(RetractiveMap(src, dst, mapping))
    return tuple(out)


def fiber_gset(ret):
    """The labels over the identity coset as a set with a subgroup action."""
    hgrp, elems = subgroup_group(ret.group, ret.sub)
    c0 = min(ret.base.elements)
    fib = ret.fiber(c0)
    rows = {i: {x: ret.carrier.act(h, x) for x in fib}
            for i, h in enumerate(elems)}
    return GSet(hgrp, fib, rows)


def fiber_pointed_map(rm, c):
    """Restrict a retractive map to the fiber over one coset.

    Labels landing on the section point go to the basepoint.
    """
    src_fib = rm.src.fiber(c)
    dst_fib = rm.dst.fiber(c)
    pt = rm.dst.section[c]
    mapping = {b: (PLUS if rm.mapping[b] == pt else rm.mapping[b])
               for b in src_fib}
    return PointedMap(src_fib, dst_fib, mapping)


class GenuineTree:
    """A coset diagram with leaves labeled by a retractive G-set.

    The label living over coset c marks a leaf of the tree at c; the
    labeling is an equivariant bijection onto all leaves.
    """

    __slots__ = ("labels", "diagram", "leaf_map", "_hash")

    def __init__(self, labels, diagram, leaf_map):
        if (labels.group, labels.sub) != (diagram.group, diagram.sub):
            raise ForestError("labels and diagram over different orbits")
        self.labels = labels
        self.diagram = diagram
        self.leaf_map = dict(leaf_map)
        self._hash = None
        if set(self.leaf_map) != set(labels.labels):
            raise LabelError("one leaf per label")
        for c, t in diagram.trees.items():
            want = {e for e in t.edges if t.is_leaf(e)}
            got = [self.leaf_map[a] for a in labels.fiber(c)]
            if len(got) != len(want) or set(got) != want:
                raise LabelError(f"labels over {c!r} must hit the leaves "
                                 "exactly once")
        for g in labels.group.elements:
            for a in labels.labels:
                c = labels.retraction[a]
                moved = diagram.isos[(g, c)][self.leaf_map[a]]
                if self.leaf_map[labels.carrier.act(g, a)] != moved:
                    raise NotEquivariant("labeling is not equivariant")

    def __eq__(self, other):
        if not isinstance(other, GenuineTree):
            return NotImplemented
        return (self.labels == other.labels
                and self.diagram == other.diagram
                and self.leaf_map == other.leaf_map)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.labels, self.diagram))
        return self._hash

    def __repr__(self):
        return f"<GenuineTree {len(self.leaf_map)} labels over " \
               f"{len(self.diagram.trees)} cosets>"


def self_labeled_genuine(diagram):
    """Label a diagram by its own leaves.

    Carrier elements are ("leaf", coset, edge) plus one ("pt", coset)
    section point per coset.
    """
    group = diagram.group
    base = coset_gset(group, diagram.sub)
    elems = []
    retraction = {}
    section = {}
    for c in base.elements:
        pt = ("pt", c)
        elems.append(pt)
        section[c] = pt
        retraction[pt] = c
        for e in diagram.trees[c].sorted_edges():
            if diagram.trees[c].is_leaf(e):
                elems.append(("leaf", c, e))
                retraction[("leaf", c, e)] = c
    rows = {}
    for g in group.elements:
        row = {}
        for x in elems:
            if x[0] == "pt":
                row[x] = ("pt", base.act(g, x[1]))
            else:
                _, c, e = x
                row[x] = ("leaf", base.act(g, c), diagram.isos[(g, c)][e])
        rows[g] = row
    carrier = GSet(group, elems, rows)
    ret = RetractiveGSet(group, diagram.sub, carrier, section, retraction)
    leaf_map = {lab: lab[2] for lab in ret.labels}
    return GenuineTree(ret, diagram, leaf_map)


def _labeled_component(gt, c):
    labs = {a: gt.leaf_map[a] for a in gt.labels.fiber(c)}
    return LabeledTree(gt.diagram.trees[c], labs)


def phi_star_genuine(rm, gt):
    """Substitute corollas componentwise along a retractive map.

    Each coset's tree is substituted along the map's fiber restriction;
    translation isos extend over the fresh edges through the label action
    and match the fresh roots up.
    """
    if rm.dst != gt.labels:
        raise ForestError("map must target the tree's labels")
    diagram = gt.diagram
    group = diagram.group
    base = coset_gset(group, diagram.sub)
    pieces = {}
    layers = {}
    for c in base.elements:
        pm = fiber_pointed_map(rm, c)
        out = phi_star(pm, _labeled_component(gt, c))
        pieces[c] = out
        layers[c] = out.tree.root[1]
    isos = {}
    for x in group.elements:
        for c in base.elements:
            d = base.act(x, c)
            m = dict(diagram.isos[(x, c)])
            for b in rm.src.fiber(c):
                xb = rm.src.carrier.act(x, b)
                m[("graft", layers[c], ("leaf", b))] = \
                    ("graft", layers[d], ("leaf", xb))
            m[("graft", layers[c], "root")] = ("graft", layers[d], "root")
            isos[(x, c)] = m
    new_diag = CosetDiagram(group, diagram.sub,
                            {c: out.tree for c, out in pieces.items()},
                            isos)
    leaf_map = {}
    for c in base.elements:
        for b in rm.src.fiber(c):
            leaf_map[b] = pieces[c].leaf_of(b)
    return GenuineTree(rm.src, new_diag, leaf_map)


class GenuineMorphism:
    """A retractive map together with a root- and label-preserving
    transformation out of the substituted diagram."""

    __slots__ = ("phi", "fiber", "src", "dst", "_hash")

    def __init__(self, phi, fiber, src, dst):
        self.phi = phi
        self.fiber = fiber
        self.src = src
        self.dst = dst
        self._hash = None

    def __eq__(self, other):
        if not isinstance(other, GenuineMorphism):
            return NotImplemented
        return self.phi == other.phi and self.fiber == other.fiber

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.phi, self.fiber))
        return self._hash

    def __repr__(self):
        return f"<GenuineMorphism on {len(self.phi.mapping)} labels>"


def genuine_hom(src, dst):
    """All morphisms between labeled genuine trees over the same orbit.

    A morphism is a retractive map of labels (contravariant) plus a
    transformation from the substituted source that preserves roots and
    leaf labels.
    """
    out = []
    for phi in enumerate_retractive_maps(dst.labels, src.labels):
        sub = phi_star_genuine(phi, src)
        for f in diagram_hom(sub.diagram, dst.diagram):
            if any(f.components[c].mapping[t.root]
                   != dst.diagram.trees[c].root
                   for c, t in sub.diagram.trees.items()):
                continue
            if any(f.components[dst.labels.retraction[b]]
                   .mapping[sub.leaf_map[b]] != dst.leaf_map[b]
                   for b in dst.labels.labels):
                continue
            out.append(GenuineMorphism(phi, f, src, dst))
    return tuple(out)


def eta_object(gt):
    """Forget the labels."""
    return gt.diagram


def eta_morphism(gm):
    """Compose the corolla-attaching inclusions with the fiber map."""
    src = gm.src
    comps = {}
    for c in src.diagram.trees:
        pm = fiber_pointed_map(gm.phi, c)
        inc = iota(pm, _labeled_component(src, c))
        comps[c] = compose(inc, gm.fiber.components[c])
    return DiagramMorphism(src.diagram, gm.dst.diagram, comps)


# ---------------------------------------------------------------------------
# pullback along orbit maps


def _is_identity_map(q, src_sub, dst_sub):
    return tuple(sorted(src_sub)) == tuple(sorted(dst_sub)) \
        and all(v == k for k, v in q.items())


def q_star_diagram(q, src_sub, diagram):
    """Reindex a diagram along an orbit map; the identity map gives back
    the same object."""
    if _is_identity_map(q, src_sub, diagram.sub):
        return diagram
    group = diagram.group
    src_sub = tuple(sorted(src_sub))
    base = coset_gset(group, src_sub)
    trees = {c: diagram.trees[q[c]] for c in base.elements}
    isos = {(x, c): dict(diagram.isos[(x, q[c])])
            for x in group.elements for c in base.elements}
    return CosetDiagram(group, src_sub, trees, isos)


def q_star_diagram_morphism(q, src_sub, dm):
    """Reindex a transformation along an orbit map."""
    src = q_star_diagram(q, src_sub, dm.src)
    dst = q_star_diagram(q, src_sub, dm.dst)
    if src is dm.src:
        return dm
    comps = {c: TreeMorphism(src.trees[c], dst.trees[c],
                             dm.components[q[c]].mapping, _checked=True)
             for c in src.trees}
    return DiagramMorphism(src, dst, comps, _checked=True)


def q_star_retractive(q, src_sub, ret):
    """Pull a retractive set back along an orbit map.

    Carrier elements are pairs (coset, element over its image); the
    identity map gives back the same object.
    """
    if _is_identity_map(q, src_sub, ret.sub):
        return ret
    group = ret.group
    src_sub = tuple(sorted(src_sub))
    base = coset_gset(group, src_sub)
    elems = [(c, x) for c in base.elements
             for x in ret.carrier.elements if ret.retraction[x] == q[c]]
    rows = {g: {(c, x): (base.act(g, c), ret.carrier.act(g, x))
                for c, x in elems}
            for g in group.elements}
    carrier = GSet(group, elems, rows)
    section = {c: (c, ret.section[q[c]]) for c in base.elements}
    retraction = {(c, x): c for c, x in elems}
    return RetractiveGSet(group, src_sub, carrier, section, retraction)


def q_star_retractive_map(q, src_sub, rm):
    src = q_star_retractive(q, src_sub, rm.src)
    dst = q_star_retractive(q, src_sub, rm.dst)
    if src is rm.src:
        return rm
    mapping = {(c, x): (c, rm.mapping[x]) for c, x in src.carrier.elements}
    return RetractiveMap(src, dst, mapping)


def q_star_genuine(q, src_sub, gt):
    """Pull a labeled genuine tree back along an orbit map."""
    if _is_identity_map(q, src_sub, gt.labels.sub):
        return gt
    ret = q_star_retractive(q, src_sub, gt.labels)
    diag = q_star_diagram(q, src_sub, gt.diagram)
    leaf_map = {(c, a): gt.leaf_map[a] for c, a in ret.labels}
    return GenuineTree(ret, diag, leaf_map)


def q_star_genuine_morphism(q, src_sub, gm):
    """Pull a genuine morphism back along an orbit map.

    The pulled substitution renames its fresh edges after the pulled-back
    labels, so the fiber components are rewritten through that renaming.
    """
    src = q_star_genuine(q, src_sub, gm.src)
    dst = q_star_genuine(q, src_sub, gm.dst)
    if src is gm.src:
        return gm
    phi = q_star_retractive_map(q, src_sub, gm.phi)
    old_sub = phi_star_genuine(gm.phi, gm.src)
    sub = phi_star_genuine(phi, src)
    comps = {}
    for c in sub.diagram.trees:
        rename = {e: e for e in gm.src.diagram.trees[q[c]].edges}
        rename[sub.diagram.trees[c].root] = old_sub.diagram.trees[q[c]].root
        for lab in dst.labels.fiber(c):
            rename[sub.leaf_map[lab]] = old_sub.leaf_map[lab[1]]
        old = gm.fiber.components[q[c]].mapping
        comps[c] = TreeMorphism(sub.diagram.trees[c],
                                dst.diagram.trees[c],
                                {e: old[rename[e]]
                                 for e in sub.diagram.trees[c].edges},
                                _checked=True)
    fiber = DiagramMorphism(sub.diagram, dst.diagram, comps)
    return GenuineMorphism(phi, fiber, src, dst)


def q_star_compare(p, q, src_sub, mid_sub, ret):
    """The canonical carrier bijection between (p after q)* and q* p*.

    Returns (one-step pullback, two-step pullback, dict between their
    carriers).  The two pullbacks differ only by this renaming.
    """
    pq = {c: p[q[c]] for c in q}
    once = q_star_retractive(pq, src_sub, ret)
    inner = q_star_retractive(p, mid_sub, ret)
    twice = q_star_retractive(q, src_sub, inner)
    iso = {}
    for x in once.carrier.elements:
        if twice is inner:
            iso[x] = x
            continue
        c = once.retraction[x]
        a = x if once is ret else x[1]
        iso[x] = (c, a if inner is ret else (q[c], a))
    if set(iso.values()) != set(twice.carrier.elements):
        raise ForestError("pullback comparison is broken")
    return once, twice, iso


# ---------------------------------------------------------------------------
# corpora and the equivalence report


def enumerate_genuine_diagrams(group, max_edges, per_stratum=None):
    """Coset diagrams for every subgroup conjugacy class, one per
    equivariant tree from the bounded corpus."""
    seen = {}
    for sub in subgroups(group):
        key = subgroup_conjugacy_key(group, tuple(sub))
        entry = tuple(sorted(sub))
        if key not in seen or entry < seen[key]:
            seen[key] = entry
    out = []
    for sub in sorted(seen.values(), key=lambda s: (-len(s), s)):
        hgrp, _ = subgroup_group(group, sub)
        for gtree in enumerate_gtrees(hgrp, max_edges,
                                      per_stratum=per_stratum):
            out.append(diagram_from_gtree(gtree, group, sub))
    return tuple(out)


def _assemble_forest_morphism(q, alpha, fx, fy, xcosets, ycosets):
    """Turn (orbit map, transformation) into a morphism of the assembled
    forests."""
    ypos = {c: k for k, c in enumerate(ycosets)}
    idx = [ypos[q[c]] for c in xcosets]
    comps = [alpha.components[c] for c in xcosets]
    return ForestMorphism(fx.forest, fy.forest, idx, comps, _checked=True)


def genuine_equivalence_check(group, max_edges=3, per_stratum=None,
                              diagrams=None):
    """Compare the three faces of the bounded genuine-tree category.

    For every ordered pair of diagrams the report matches up morphisms of
    the assembled forests, pairs (orbit map, natural transformation), and
    triples (orbit map, retractive map, fiber transformation) through the
    label-forgetting map, checking that assembly and forgetting are
    bijections onto the respective hom-sets.
    """
    if diagrams is None:
        diagrams = enumerate_genuine_diagrams(group, max_edges,
                                              per_stratum=per_stratum)
    forests = [assemble_gforest(d) for d in diagrams]
    labeled = [self_labeled_genuine(d) for d in diagrams]
    report = {"group_order": group.order, "objects": len(diagrams),
              "pairs": 0, "forest_homs": 0, "pair_homs": 0,
              "triple_homs": 0, "mismatches": []}
    for i, X in enumerate(diagrams):
        xcosets = list(X.cosets)
        for j, Y in enumerate(diagrams):
            ycosets = list(Y.cosets)
            report["pairs"] += 1
            fh = set(forest_hom(forests[i], forests[j]))
            qs = equivariant_maps(coset_gset(group, X.sub),
                                  coset_gset(group, Y.sub))
            pair_count = 0
            triple_count = 0
            assembled = set()
            eta_ok = True
            for q in qs:
                pulled = q_star_diagram(q, X.sub, Y)
                alphas = diagram_hom(X, pulled)
                pair_count += len(alphas)
                for al in alphas:
                    assembled.add(_assemble_forest_morphism(
                        q, al, forests[i], forests[j], xcosets, ycosets))
                pulled_lab = q_star_genuine(q, X.sub, labeled[j])
                gms = genuine_hom(labeled[i], pulled_lab)
                triple_count += len(gms)
                ems = {eta_morphism(gm) for gm in gms}
                if len(ems) != len(gms) or ems != set(alphas):
                    eta_ok = False
            ok = (assembled == fh and len(assembled) == pair_count
                  and eta_ok)
            report["forest_homs"] += len(fh)
            report["pair_homs"] += pair_count
            report["triple_homs"] += triple_count
            if not ok:
                report["mismatches"].append(
                    {"src": i, "dst": j, "forest": len(fh),
                     "pairs": pair_count, "triples": triple_count})
    report["ok"] = not report["mismatches"]
    return report


# ---------------------------------------------------------------------------
# serialization


def gforest_to_json(gforest, group_ref=None):
    """Schema: {"group", "components", "action", "isos"}.

    Component trees are renamed to string edges first, so forests with
    tuple-named edges round trip up to that renaming only.
    """
    from .groups import group_to_json
    renames = []
    docs = []
    for t in gforest.forest.components:
        if all(isinstance(e, str) for e in t.edges):
            ren = {e: e for e in t.edges}
        else:
            ren = {e: f"e{k}" for k, e in enumerate(t.canonical_edge_order())}
        renames.append(ren)
        docs.append(tree_to_json(relabel(t, ren)))
    data = {
        "components": docs,
        "action": {str(g): list(gforest.index_action[g])
                   for g in gforest.group.elements},
        "isos": {str(g): [
            {renames[i][e]: renames[gforest.index_action[g][i]][v]
             for e, v in gforest.isos[(g, i)].items()}
            for i in range(gforest.forest.n)]
            for g in gforest.group.elements},
    }
    data["group"] = group_ref if group_ref is not None \
        else group_to_json(gforest.group)
    return data


def gforest_from_json(data, registry=None):
    """Rebuild a GForest; "group" is a builtin name or an inline table."""
    from .groups import BUILTIN_GROUPS, group_from_json
    ref = data["group"]
    if isinstance(ref, str):
        table = registry if registry is not None else BUILTIN_GROUPS
        if ref not in table:
            raise GroupError(f"unknown group {ref!r}")
        group = table[ref]()
    else:
        group = group_from_json(ref)
    forest = Forest([tree_from_json(doc) for doc in data["components"]])
    rows = {int(g): tuple(row) for g, row in data["action"].items()}
    isos = {(int(g), i): dict(ms[i])
            for g, ms in data["isos"].items()
            for i in range(forest.n)}
    return GForest(forest, group, rows, isos)


def gforest_dumps(gforest, group_ref=None):
    return json.dumps(gforest_to_json(gforest, group_ref=group_ref),
                      sort_keys=True, indent=2) + "\n"


def gforest_loads(text, registry=None):
    return gforest_from_json(json.loads(text), registry=registry)
