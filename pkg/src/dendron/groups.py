"""Finite groups and finite G-sets, given by explicit tables.

Everything in sight is small, so groups are multiplication tables over the
elements 0..n-1 (0 the identity) and G-sets are full action tables, one row
per group element.  Subgroups come from closure searches, orbits from direct
sweeps, and equivariant maps from an orbit-by-orbit choice of images whose
stabilizers are large enough.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

from .trees import sort_key


class GroupError(ValueError):
    """Raised when a multiplication table breaks the group laws."""


class GSetError(ValueError):
    """Raised when an action table is not a group action."""


@dataclass(frozen=True)
class FiniteGroup:
    """A group structure on 0..n-1 encoded by its multiplication table.

    mult[a][b] is the product a*b and index 0 is the identity.  The optional
    names are display sugar only; they do not take part in equality.
    """

    mult: tuple
    names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.mult)
        object.__setattr__(self, "mult", tuple(tuple(r) for r in self.mult))
        rng = range(n)
        for row in self.mult:
            if len(row) != n or any(v not in rng for v in row):
                raise GroupError("table is not square over 0..n-1")
        for a in rng:
            if self.mult[0][a] != a or self.mult[a][0] != a:
                raise GroupError("0 is not an identity")
        for a in rng:
            if 0 not in self.mult[a]:
                raise GroupError(f"{a} has no inverse")
        for a in rng:
            for b in rng:
                for c in rng:
                    if (self.mult[self.mult[a][b]][c]
                            != self.mult[a][self.mult[b][c]]):
                        raise GroupError("table is not associative")
        if self.names is not None and len(self.names) != n:
            raise GroupError("one name per element, please")

    @property
    def order(self):
        return len(self.mult)

    @property
    def elements(self):
        return tuple(range(self.order))

    @property
    def identity(self):
        return 0

    def mul(self, a, b):
        return self.mult[a][b]

    def inverse(self, a):
        return self.mult[a].index(0)

    def name_of(self, a):
        return self.names[a] if self.names is not None else str(a)

    def conjugate(self, g, a):
        """g a g^-1."""
        return self.mul(self.mul(g, a), self.inverse(g))

    def __repr__(self):
        return f"<FiniteGroup of order {self.order}>"


def trivial_group():
    return FiniteGroup(((0,),), names=("1",))


def cyclic_group(n):
    """Z/n with generator 1."""
    mult = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
    return FiniteGroup(mult)


def symmetric_group_3():
    """All permutations of three points, identity first, lexicographic."""
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    index = {p: i for i, p in enumerate(perms)}
    mult = tuple(tuple(index[tuple(p[q[i]] for i in range(3))] for q in perms)
                 for p in perms)
    return FiniteGroup(mult, names=tuple("".join(map(str, p)) for p in perms))


def mulclose(group, gens):
    """Smallest subset containing the identity and gens, closed under mul."""
    closed = {group.identity}
    frontier = set(gens)
    while frontier:
        closed |= frontier
        frontier = {group.mul(a, b)
                    for a in closed for b in closed} - closed
    return frozenset(closed)


def subgroups(group):
    """Every subgroup, as sorted element tuples, smallest first.

    Closure search: grow each known subgroup by one extra generator until
    nothing new appears.  Fine for the desk-scale orders used here.
    """
    seen = {frozenset({group.identity})}
    frontier = list(seen)
    while frontier:
        base = frontier.pop()
        for g in group.elements:
            bigger = mulclose(group, base | {g})
            if bigger not in seen:
                seen.add(bigger)
                frontier.append(bigger)
    return tuple(sorted((tuple(sorted(s)) for s in seen),
                        key=lambda s: (len(s), s)))


def conjugate_subgroup(group, g, sub):
    return frozenset(group.conjugate(g, a) for a in sub)


def subgroup_conjugacy_key(group, sub):
    """Canonical representative of the conjugacy class of a subgroup."""
    return min(tuple(sorted(conjugate_subgroup(group, g, sub)))
               for g in group.elements)


@dataclass(frozen=True)
class Orbit:
    rep: object
    members: tuple
    stabilizer: tuple


class GSet:
    """A finite left G-set as a full action table.

    action[g][x] is g.x, with one complete row per group element.  The
    optional basepoint must be fixed by everything.
    """

    __slots__ = ("group", "elements", "action", "basepoint", "_hash")

    def __init__(self, group, elements, action, basepoint=None):
        self.group = group
        self.elements = tuple(sorted(elements, key=sort_key))
        self.action = {g: dict(row) for g, row in action.items()}
        self.basepoint = basepoint
        self._hash = None
        carrier = set(self.elements)
        if len(carrier) != len(self.elements):
            raise GSetError("carrier has repeated elements")
        if set(self.action) != set(group.elements):
            raise GSetError("need one action row per group element")
        for g, row in self.action.items():
            if set(row) != carrier or set(row.values()) != carrier:
                raise GSetError(f"row of {g} is not a permutation")
        for x in self.elements:
            if self.action[group.identity][x] != x:
                raise GSetError("identity must act trivially")
        for a in group.elements:
            for b in group.elements:
                ab = group.mul(a, b)
                for x in self.elements:
                    if self.action[ab][x] != self.action[a][self.action[b][x]]:
                        raise GSetError("rows do not compose as the group")
        if basepoint is not None:
            if basepoint not in carrier:
                raise GSetError("basepoint is not in the carrier")
            for g in group.elements:
                if self.action[g][basepoint] != basepoint:
                    raise GSetError("basepoint must be fixed")

    @classmethod
    def from_generator_rows(cls, group, elements, rows, basepoint=None):
        """Close partial data: rows maps some generating set to its action."""
        have = {group.identity: {x: x for x in elements}}
        for g, row in rows.items():
            have[g] = dict(row)
        grew = True
        while grew:
            grew = False
            for a in list(have):
                for b in list(have):
                    ab = group.mul(a, b)
                    if ab not in have:
                        have[ab] = {x: have[a][have[b][x]] for x in elements}
                        grew = True
        if set(have) != set(group.elements):
            raise GSetError("rows do not generate the whole group")
        return cls(group, elements, have, basepoint=basepoint)

    @property
    def size(self):
        return len(self.elements)

    def act(self, g, x):
        return self.action[g][x]

    def orbit(self, x):
        return tuple(sorted({self.action[g][x] for g in self.group.elements},
                            key=sort_key))

    def stabilizer(self, x):
        return tuple(g for g in self.group.elements
                     if self.action[g][x] == x)

    def orbits(self):
        """Orbit partition with a stabilizer per (minimal) representative."""
        seen = set()
        out = []
        for x in self.elements:
            if x in seen:
                continue
            members = self.orbit(x)
            seen.update(members)
            out.append(Orbit(x, members, self.stabilizer(x)))
        return tuple(out)

    def is_transitive(self):
        return len(self.orbits()) <= 1 and self.size > 0

    def orbit_signature(self):
        """Multiset of (size, stabilizer class) pairs; an isomorphism
        invariant that is complete for finite G-sets."""
        sig = [(len(o.members),
                subgroup_conjugacy_key(self.group, frozenset(o.stabilizer)))
               for o in self.orbits()]
        return tuple(sorted(sig))

    def __eq__(self, other):
        if not isinstance(other, GSet):
            return NotImplemented
        return (self.group == other.group and self.elements == other.elements
                and self.action == other.action
                and self.basepoint == other.basepoint)

    def __hash__(self):
        if self._hash is None:
            rows = tuple(tuple(self.action[g][x] for x in self.elements)
                         for g in self.group.elements)
            self._hash = hash((self.group, self.elements, rows,
                               self.basepoint))
        return self._hash

    def __repr__(self):
        shape = "+".join(str(len(o.members)) for o in self.orbits()) or "0"
        return f"<GSet {shape} under order-{self.group.order} group>"


def trivial_gset(group, elements, basepoint=None):
    rows = {g: {x: x for x in elements} for g in group.elements}
    return GSet(group, elements, rows, basepoint=basepoint)


def regular_gset(group):
    rows = {g: {x: group.mul(g, x) for x in group.elements}
            for g in group.elements}
    return GSet(group, group.elements, rows)


def coset_gset(group, sub):
    """Left cosets of a subgroup under left translation.

    Cosets are named by their minimal member, so the carrier is a sorted
    tuple of integers with 0 naming the subgroup itself.
    """
    subset = frozenset(sub)
    if mulclose(group, subset) != subset:
        raise GroupError("cosets need a subgroup")
    name = {}
    for g in group.elements:
        coset = frozenset(group.mul(g, h) for h in subset)
        name[g] = min(coset)
    carrier = sorted(set(name.values()))
    rows = {g: {x: name[group.mul(g, x)] for x in carrier}
            for g in group.elements}
    return GSet(group, carrier, rows)


def disjoint_union_gsets(parts):
    """Tag-and-union: element x of part i becomes (i, x)."""
    if not parts:
        raise GSetError("need at least one part")
    group = parts[0].group
    elements = [(i, x) for i, p in enumerate(parts) for x in p.elements]
    rows = {g: {(i, x): (i, p.act(g, x))
                for i, p in enumerate(parts) for x in p.elements}
            for g in group.elements}
    return GSet(group, elements, rows)


def transitive_gsets(group):
    """One coset G-set per conjugacy class of subgroups, biggest first."""
    classes = {}
    for sub in subgroups(group):
        classes.setdefault(subgroup_conjugacy_key(group, frozenset(sub)),
                           sub)
    reps = sorted(classes.values(), key=lambda s: (len(s), s))
    return tuple(coset_gset(group, s) for s in reps)


def skeletal_gsets(group, max_size):
    """All G-sets of size <= max_size, one per isomorphism class.

    Each is a disjoint union of coset G-sets; carriers are pairs (i, coset
    name) so distinct objects never share elements by accident.
    """
    types = [t for t in transitive_gsets(group) if t.size <= max_size]
    out = [trivial_gset(group, ())]

    def build(start, left, chosen):
        if chosen:
            out.append(disjoint_union_gsets(chosen))
        for i in range(start, len(types)):
            t = types[i]
            if t.size <= left:
                build(i, left - t.size, chosen + [t])

    build(0, max_size, [])
    out.sort(key=lambda a: (a.size, a.orbit_signature()))
    return tuple(out)


def equivariant_maps(src, dst):
    """Every equivariant function between two G-sets over the same group.

    One image choice per orbit representative, restricted to targets whose
    stabilizer contains the representative's; basepoints, when both sides
    have them, are matched up.
    """
    if src.group != dst.group:
        raise GSetError("maps need a common group")
    reps = [o.rep for o in src.orbits()]
    choices = []
    for r in reps:
        if r == src.basepoint:
            if dst.basepoint is None:
                return ()
            choices.append([dst.basepoint])
            continue
        need = set(src.stabilizer(r))
        choices.append([y for y in dst.elements
                        if need <= set(dst.stabilizer(y))])
    out = []
    for pick in product(*choices):
        f = {}
        for r, y in zip(reps, pick):
            for g in src.group.elements:
                f[src.act(g, r)] = dst.act(g, y)
        out.append(f)
    return tuple(out)


def equivariant_bijections(src, dst):
    if src.size != dst.size:
        return ()
    return tuple(f for f in equivariant_maps(src, dst)
                 if len(set(f.values())) == src.size)


def are_isomorphic_gsets(src, dst):
    return (src.group == dst.group
            and src.orbit_signature() == dst.orbit_signature())


BUILTIN_GROUPS = {
    "trivial": trivial_group,
    "z2": lambda: cyclic_group(2),
    "z3": lambda: cyclic_group(3),
    "z4": lambda: cyclic_group(4),
    "s3": symmetric_group_3,
}


def builtin_group(name):
    try:
        return BUILTIN_GROUPS[name]()
    except KeyError:
        raise GroupError(f"unknown group {name!r}; have "
                         + ", ".join(sorted(BUILTIN_GROUPS))) from None


def group_to_json(group):
    return {"order": group.order, "mult": [list(r) for r in group.mult]}


def group_from_json(data):
    if set(data) - {"order", "mult", "names"}:
        raise GroupError("unexpected keys in group data")
    g = FiniteGroup(tuple(tuple(r) for r in data["mult"]),
                    names=tuple(data["names"]) if "names" in data else None)
    if g.order != data["order"]:
        raise GroupError("declared order does not match the table")
    return g


def gset_to_json(gset, group_ref=None):
    data = {
        "elements": [str(x) for x in gset.elements],
        "action": {str(g): {str(x): str(gset.act(g, x))
                            for x in gset.elements}
                   for g in gset.group.elements},
    }
    if group_ref is not None:
        data["group"] = group_ref
    else:
        data["group"] = group_to_json(gset.group)
    if gset.basepoint is not None:
        data["basepoint"] = str(gset.basepoint)
    return data


def gset_from_json(data, registry=None):
    """Rebuild a GSet; "group" is a builtin name or an inline table.

    Carriers round-trip through strings, so this format is for string-named
    elements (which is what the command line traffics in).
    """
    ref = data["group"]
    if isinstance(ref, str):
        table = registry or BUILTIN_GROUPS
        if ref not in table:
            raise GroupError(f"unknown group {ref!r}")
        group = table[ref]()
    else:
        group = group_from_json(ref)
    elements = list(data["elements"])
    rows = {int(g): {x: row[x] for x in elements}
            for g, row in data["action"].items()}
    basepoint = data.get("basepoint")
    return GSet(group, elements, rows, basepoint=basepoint)


def gset_dumps(gset, group_ref=None):
    return json.dumps(gset_to_json(gset, group_ref=group_ref),
                      sort_keys=True, indent=2)


def gset_loads(text, registry=None):
    return gset_from_json(json.loads(text), registry=registry)
