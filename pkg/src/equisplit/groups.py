"""Finite groups, cell actions, linear representations, and averaging.

Groups are stored by multiplication table over indexed elements; actions
and permutation representations keep their permutation backing so that
products with permutation matrices are row/column shuffles rather than
full multiplications.  Averaging over a subgroup produces the projector
onto its fixed subspace whenever the subgroup order is invertible in the
coefficient field; otherwise BadCharacteristic names the subgroup.
"""

import random
from collections import deque
from dataclasses import dataclass, field as dc_field

from .complexes import Complex
from .errors import BadCharacteristic, SizeLimit
from .fields import Field
from .linalg import Matrix

# -- permutations ------------------------------------------------------


def identity_perm(n: int) -> tuple:
    return tuple(range(n))


def compose_perms(p, q) -> tuple:
    """(p . q)(x) = p(q(x))."""
    return tuple(p[q[i]] for i in range(len(p)))


def invert_perm(p) -> tuple:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def parse_cycles(text: str, n: int) -> tuple:
    """Parse one-line cycle notation like "(0 1 2)(3 4)" on points 0..n-1.

    Fixed points may be omitted; an empty string or "()" is the identity.
    """
    perm = list(range(n))
    text = text.strip()
    if text in ("", "()"):
        return tuple(perm)
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"malformed cycle notation: {text!r}")
    for cycle_text in text[1:-1].split(")("):
        points = [int(tok) for tok in cycle_text.replace(",", " ").split()]
        if len(set(points)) != len(points):
            raise ValueError(f"repeated point in cycle: {cycle_text!r}")
        if any(not 0 <= p < n for p in points):
            raise ValueError(f"point out of range in cycle: {cycle_text!r}")
        for a, b in zip(points, points[1:] + points[:1]):
            perm[a] = b
    return tuple(perm)


def cycles_string(perm) -> str:
    """Inverse of parse_cycles; fixed points omitted."""
    seen = set()
    parts = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cycle = [start]
        seen.add(start)
        cur = perm[start]
        while cur != start:
            cycle.append(cur)
            seen.add(cur)
            cur = perm[cur]
        parts.append("(" + " ".join(str(p) for p in cycle) + ")")
    return "".join(parts) if parts else "()"


def close_perms(generators, max_size: int) -> list:
    """Closure of a permutation set under composition, in BFS discovery order."""
    if not generators:
        raise ValueError("need at least one permutation (the identity counts)")
    n = len(generators[0])
    ident = identity_perm(n)
    elements = [ident]
    index = {ident: 0}
    frontier = deque([ident])
    while frontier:
        p = frontier.popleft()
        for g in generators:
            q = compose_perms(p, g)
            if q not in index:
                if len(elements) >= max_size:
                    raise SizeLimit(f"group closure exceeds cap {max_size}")
                index[q] = len(elements)
                elements.append(q)
                frontier.append(q)
    return elements


# -- finite groups -----------------------------------------------------


class FiniteGroup:
    """A finite group stored by multiplication table on indices 0..order-1."""

    def __init__(self, table, spot_check: bool = True):
        self.table = tuple(tuple(row) for row in table)
        self.order = len(self.table)
        if any(len(row) != self.order for row in self.table):
            raise ValueError("multiplication table is not square")
        self.identity = self._find_identity()
        self.inverse = self._build_inverses()
        if spot_check:
            self._spot_check_associativity()
        self._subgroups = None
        self.generator_indices: tuple = ()
        self.bfs_words: tuple = ()  # per element: (parent, generator position) or None

    def _find_identity(self) -> int:
        for e in range(self.order):
            if all(self.table[e][g] == g and self.table[g][e] == g for g in range(self.order)):
                return e
        raise ValueError("table has no identity element")

    def _build_inverses(self) -> tuple:
        inv = [None] * self.order
        for g in range(self.order):
            for h in range(self.order):
                if self.table[g][h] == self.identity and self.table[h][g] == self.identity:
                    inv[g] = h
                    break
            if inv[g] is None:
                raise ValueError(f"element {g} has no inverse")
        return tuple(inv)

    def _spot_check_associativity(self, samples: int = 200):
        rng = random.Random(0)
        n = self.order
        for _ in range(min(samples, n**3)):
            a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise ValueError(f"multiplication table not associative at ({a},{b},{c})")

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls(((0,),), spot_check=False)

    @classmethod
    def from_permutations(cls, generators, max_order: int = 5000):
        """Group generated by permutations; returns (group, element_perms).

        Element order is BFS discovery order from the identity, so it is
        deterministic given the generator list.
        """
        elements = close_perms(list(generators), max_order)
        index = {p: i for i, p in enumerate(elements)}
        table = [
            [index[compose_perms(p, q)] for q in elements]
            for p in elements
        ]
        group = cls(table, spot_check=False)
        group.generator_indices = tuple(index[tuple(g)] for g in generators)
        group.bfs_words = cls._bfs_words(table, group.generator_indices)
        return group, elements

    @staticmethod
    def _bfs_words(table, generator_indices) -> tuple:
        n = len(table)
        words = [None] * n
        identity = next(e for e in range(n) if all(table[e][g] == g for g in range(n)))
        seen = {identity}
        frontier = deque([identity])
        while frontier:
            g = frontier.popleft()
            for pos, s in enumerate(generator_indices):
                h = table[g][s]
                if h not in seen:
                    seen.add(h)
                    words[h] = (g, pos)
                    frontier.append(h)
        if len(seen) != n:
            raise ValueError("generators do not generate the group")
        return tuple(words)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def conjugate(self, g: int, h: int) -> int:
        return self.table[self.table[g][h]][self.inverse[g]]

    def subgroup_closure(self, elements) -> tuple:
        # words over the generators suffice: a finite subsemigroup through
        # the identity is a subgroup
        seen = {self.identity}
        frontier = deque([self.identity])
        gens = sorted(set(elements))
        while frontier:
            a = frontier.popleft()
            for g in gens:
                b = self.table[a][g]
                if b not in seen:
                    seen.add(b)
                    frontier.append(b)
        return tuple(sorted(seen))

    def is_subgroup(self, elements) -> bool:
        elems = set(elements)
        if self.identity not in elems:
            return False
        return all(self.table[a][b] in elems for a in elems for b in elems)

    def conjugate_subgroup(self, g: int, subgroup) -> tuple:
        return tuple(sorted(self.conjugate(g, h) for h in subgroup))

    def is_normal_in(self, small, big) -> bool:
        small_set = set(small)
        return all(
            self.conjugate(g, h) in small_set for g in big for h in small
        )

    def all_subgroups(self) -> tuple:
        """Every subgroup, as sorted index tuples ordered by (size, tuple)."""
        if self._subgroups is None:
            found = {(self.identity,)}
            frontier = [(self.identity,)]
            while frontier:
                nxt = []
                for sub in frontier:
                    in_sub = set(sub)
                    for g in range(self.order):
                        if g in in_sub:
                            continue
                        bigger = self.subgroup_closure(sub + (g,))
                        if bigger not in found:
                            found.add(bigger)
                            nxt.append(bigger)
                frontier = nxt
            self._subgroups = tuple(sorted(found, key=lambda s: (len(s), s)))
        return self._subgroups

    def __repr__(self):
        return f"FiniteGroup(order {self.order})"


# -- cell actions ------------------------------------------------------


class CellAction:
    """An action of a finite group on a complex by poset automorphisms."""

    def __init__(self, group: FiniteGroup, complex_: Complex, cell_perms):
        self.group = group
        self.complex = complex_
        self.cell_perms = tuple(tuple(p) for p in cell_perms)
        if len(self.cell_perms) != group.order:
            raise ValueError("need one cell permutation per group element")
        self.verify()

    @classmethod
    def from_vertex_perms(cls, group: FiniteGroup, complex_: Complex, vertex_perms):
        """Extend vertex permutations to all cells via vertex sets."""
        verts = complex_.vertices
        pos = {v: i for i, v in enumerate(verts)}
        cell_perms = []
        for vp in vertex_perms:
            mapping = {v: verts[vp[pos[v]]] for v in verts}
            perm = []
            for c in range(complex_.size):
                target = complex_.cell_with_vertices({mapping[v] for v in complex_.vertex_sets[c]})
                if target is None:
                    raise ValueError("vertex permutation does not preserve the complex")
                perm.append(target)
            cell_perms.append(tuple(perm))
        return cls(group, complex_, cell_perms)

    def verify(self):
        g0 = self.group
        cx = self.complex
        if self.cell_perms[g0.identity] != identity_perm(cx.size):
            raise ValueError("identity does not act trivially")
        for g, perm in enumerate(self.cell_perms):
            if sorted(perm) != list(range(cx.size)):
                raise ValueError(f"element {g} does not act by a cell bijection")
            for c in range(cx.size):
                if cx.dims[perm[c]] != cx.dims[c]:
                    raise ValueError(f"element {g} does not preserve dimension")
                image_vs = frozenset(perm[v] for v in cx.vertex_sets[c])
                if cx.vertex_sets[perm[c]] != image_vs:
                    raise ValueError(f"element {g} breaks vertex sets at cell {c}")
        if g0.order <= 256:
            pairs = ((g, h) for g in range(g0.order) for h in range(g0.order))
        else:
            rng = random.Random(3)
            pairs = ((rng.randrange(g0.order), rng.randrange(g0.order)) for _ in range(500))
        for g, h in pairs:
            pg = self.cell_perms[g]
            if compose_perms(pg, self.cell_perms[h]) != self.cell_perms[g0.mul(g, h)]:
                raise ValueError(f"cell action is not a homomorphism at ({g},{h})")

    def act(self, g: int, cell: int) -> int:
        return self.cell_perms[g][cell]

    def orbit(self, cell: int) -> tuple:
        return tuple(sorted({p[cell] for p in self.cell_perms}))

    def orbits(self) -> list:
        seen = set()
        result = []
        for c in range(self.complex.size):
            if c not in seen:
                orb = self.orbit(c)
                seen.update(orb)
                result.append(orb)
        return result

    def cell_stabilizer(self, cell: int) -> tuple:
        """The (setwise) stabilizer {g : g.cell = cell}, verified to be a subgroup."""
        stab = tuple(sorted(g for g, p in enumerate(self.cell_perms) if p[cell] == cell))
        assert self.group.is_subgroup(stab)
        return stab

    def kernel(self) -> tuple:
        ident = identity_perm(self.complex.size)
        return tuple(sorted(g for g, p in enumerate(self.cell_perms) if p == ident))

    def coset_representatives(self, cell: int) -> dict:
        """For each cell in the orbit, the minimal g mapping ``cell`` to it."""
        reps = {}
        for g in range(self.group.order):
            target = self.cell_perms[g][cell]
            if target not in reps:
                reps[target] = g
        return reps

    def vertex_perm(self, g: int) -> tuple:
        """Action of g on vertex positions (vertices in sorted cell order)."""
        verts = self.complex.vertices
        pos = {v: i for i, v in enumerate(verts)}
        return tuple(pos[self.cell_perms[g][v]] for v in verts)


def cell_stabilizer(action: CellAction, cell: int) -> tuple:
    return action.cell_stabilizer(cell)


def pointwise_ball_stabilizer(action: CellAction, x: int, n: int) -> tuple:
    """Elements fixing every cell within combinatorial distance n of vertex x.

    Fixing all vertices of the ball forces fixing all its cells, so the
    check runs over vertices only.
    """
    cx = action.complex
    cx.require_tree()
    ball = [v for v in cx.vertices if cx.tree_distance(x, v) <= n]
    members = [
        g
        for g, perm in enumerate(action.cell_perms)
        if all(perm[v] == v for v in ball)
    ]
    return tuple(sorted(members))


# -- tree automorphisms ------------------------------------------------


def _tree_centers(cx: Complex) -> list:
    adj = {v: set(ns) for v, ns in cx.vertex_adjacency().items()}
    remaining = set(adj)
    while len(remaining) > 2:
        leaves = [v for v in remaining if len(adj[v] & remaining) <= 1]
        remaining -= set(leaves)
    return sorted(remaining)


def _ahu_code(adj, root, parent) -> tuple:
    children = sorted(
        (_ahu_code(adj, c, root) for c in adj[root] if c != parent),
    )
    return tuple(children)


def _rooted_automorphism_count(adj, root, parent) -> int:
    from math import factorial

    groups = {}
    total = 1
    for c in adj[root]:
        if c == parent:
            continue
        code = _ahu_code(adj, c, root)
        groups.setdefault(code, []).append(c)
        total *= _rooted_automorphism_count(adj, c, root)
    for members in groups.values():
        total *= factorial(len(members))
    return total


def _rooted_subtree_isomorphisms(adj, src_parent, src, dst_parent, dst):
    """All isomorphisms of the subtree below src onto the subtree below dst."""
    from itertools import permutations, product

    src_groups, dst_groups = {}, {}
    order = []
    for c in sorted(adj[src]):
        if c == src_parent:
            continue
        code = _ahu_code(adj, c, src)
        if code not in src_groups:
            order.append(code)
        src_groups.setdefault(code, []).append(c)
    for c in sorted(adj[dst]):
        if c == dst_parent:
            continue
        dst_groups.setdefault(_ahu_code(adj, c, dst), []).append(c)
    if {k: len(v) for k, v in src_groups.items()} != {
        k: len(v) for k, v in dst_groups.items()
    }:
        return []
    per_class = []
    for code in order:
        src_members = src_groups[code]
        dst_members = dst_groups[code]
        class_choices = []
        for perm in permutations(dst_members):
            iso_lists = [
                _rooted_subtree_isomorphisms(adj, src, a, dst, b)
                for a, b in zip(src_members, perm)
            ]
            for combo in product(*iso_lists):
                merged = {}
                for m in combo:
                    merged.update(m)
                class_choices.append(merged)
        per_class.append(class_choices)
    results = []
    for combo in product(*per_class) if per_class else [()]:
        mapping = {src: dst}
        for m in combo:
            mapping.update(m)
        results.append(mapping)
    return results


def tree_automorphism_vertex_perms(cx: Complex, max_order: int = 5000) -> list:
    """All automorphisms of a tree as vertex-position permutations.

    Backtracks over rooted-tree isomorphisms from the tree center; raises
    SizeLimit when the group would exceed ``max_order``.  Order: identity
    first, the rest lexicographic.
    """
    cx.require_tree()
    verts = cx.vertices
    pos = {v: i for i, v in enumerate(verts)}
    adj = cx.vertex_adjacency()
    centers = _tree_centers(cx)

    count = _rooted_automorphism_count(adj, centers[0], None)
    if len(centers) == 2:
        a, b = centers
        swap_count = (
            count * 2
            if _ahu_code(adj, a, b) == _ahu_code(adj, b, a)
            else count
        )
        count = swap_count
    if count > max_order:
        raise SizeLimit(f"automorphism group has order {count} (cap {max_order})")

    mappings = []
    if len(centers) == 1:
        root = centers[0]
        mappings.extend(_rooted_subtree_isomorphisms(adj, None, root, None, root))
    else:
        a, b = centers
        for ma in _rooted_subtree_isomorphisms(adj, b, a, b, a):
            for mb in _rooted_subtree_isomorphisms(adj, a, b, a, b):
                m = dict(ma)
                m.update(mb)
                mappings.append(m)
        if _ahu_code(adj, a, b) == _ahu_code(adj, b, a):
            for ma in _rooted_subtree_isomorphisms(adj, b, a, a, b):
                for mb in _rooted_subtree_isomorphisms(adj, a, b, b, a):
                    m = dict(ma)
                    m.update(mb)
                    mappings.append(m)
    perms = {tuple(pos[m[v]] for v in verts) for m in mappings}
    ident = identity_perm(len(verts))
    ordered = [ident] + sorted(p for p in perms if p != ident)
    return ordered


def tree_automorphism_group(cx: Complex, max_order: int = 5000):
    """The full automorphism group of a tree with its cell action."""
    perms = tree_automorphism_vertex_perms(cx, max_order)
    group, elements = FiniteGroup.from_permutations(perms, max_order=max_order)
    action = CellAction.from_vertex_perms(group, cx, elements)
    return group, action


def tree_automorphism_generators(cx: Complex) -> list:
    """A generating set for the tree automorphism group, as vertex perms.

    One transposition per adjacent pair of isomorphic sibling subtrees
    (scanning every vertex from the center), plus the center swap for
    two-center trees.  Usable even when the full group exceeds any cap.
    """
    cx.require_tree()
    verts = cx.vertices
    pos = {v: i for i, v in enumerate(verts)}
    adj = cx.vertex_adjacency()
    centers = _tree_centers(cx)
    root = centers[0]
    parent = {root: None}
    order = [root]
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
                queue.append(w)
    gens = []
    for v in order:
        children = [w for w in adj[v] if parent.get(w) == v]
        classes = {}
        class_order = []
        for c in sorted(children):
            code = _ahu_code(adj, c, v)
            if code not in classes:
                class_order.append(code)
            classes.setdefault(code, []).append(c)
        for code in class_order:
            members = classes[code]
            for a, b in zip(members, members[1:]):
                iso = _rooted_subtree_isomorphisms(adj, v, a, v, b)[0]
                mapping = dict(iso)
                mapping.update({dst: src for src, dst in iso.items()})
                perm = tuple(pos[mapping.get(w, w)] for w in verts)
                gens.append(perm)
    if len(centers) == 2:
        a, b = centers
        swaps = _rooted_subtree_isomorphisms(adj, b, a, a, b)
        if swaps:
            mapping = dict(swaps[0])
            mapping.update({dst: src for src, dst in swaps[0].items()})
            perm = tuple(pos[mapping.get(w, w)] for w in verts)
            gens.append(perm)
    if not gens:
        gens.append(identity_perm(len(verts)))
    return gens


# -- linear representations --------------------------------------------


class LinearRep:
    """A matrix representation of a finite group over an exact field.

    Permutation-backed representations (regular and permutation reps) keep
    their permutations, so applying rho(g) to a matrix is a row or column
    shuffle; ``matrix(g)`` densifies on demand.
    """

    def __init__(self, group: FiniteGroup, field: Field, dim: int, perms=None, mats=None):
        if (perms is None) == (mats is None):
            raise ValueError("exactly one of perms/mats required")
        self.group = group
        self.field = field
        self.dim = dim
        self.perms = tuple(tuple(p) for p in perms) if perms is not None else None
        self.mats = tuple(mats) if mats is not None else None
        self._matrix_cache = {}

    @classmethod
    def trivial(cls, group: FiniteGroup, field: Field) -> "LinearRep":
        return cls(group, field, 1, perms=[(0,)] * group.order)

    @classmethod
    def regular(cls, group: FiniteGroup, field: Field) -> "LinearRep":
        """Left regular representation: basis vector at h goes to g.h."""
        perms = [
            tuple(group.mul(g, h) for h in range(group.order))
            for g in range(group.order)
        ]
        return cls(group, field, group.order, perms=perms)

    @classmethod
    def permutation(cls, action: CellAction, field: Field, on: str = "vertices") -> "LinearRep":
        if on == "vertices":
            perms = [action.vertex_perm(g) for g in range(action.group.order)]
            dim = len(action.complex.vertices)
        elif on == "cells":
            perms = list(action.cell_perms)
            dim = action.complex.size
        else:
            raise ValueError(f"unknown permutation carrier {on!r}")
        return cls(action.group, field, dim, perms=perms)

    @classmethod
    def from_matrices(cls, group: FiniteGroup, field: Field, mats) -> "LinearRep":
        mats = list(mats)
        dim = mats[0].rows
        return cls(group, field, dim, mats=mats)

    @classmethod
    def from_generator_images(cls, group: FiniteGroup, field: Field, images) -> "LinearRep":
        """Extend generator images to the whole group by word evaluation.

        ``images`` lists one matrix per group generator (in the order of
        ``group.generator_indices``).  Consistency is checked afterwards:
        rho(g . s) = rho(g) rho(s) for every element g and generator s,
        which forces the homomorphism property for all products.
        """
        if not group.generator_indices:
            raise ValueError("group was not built from generators")
        if len(images) != len(group.generator_indices):
            raise ValueError("need exactly one image per generator")
        dim = images[0].rows
        mats: list = [None] * group.order
        mats[group.identity] = Matrix.identity(field, dim)
        order = sorted(
            (g for g in range(group.order) if g != group.identity),
            key=lambda g: _word_length(group, g),
        )
        for g in order:
            parent, pos = group.bfs_words[g]
            mats[g] = mats[parent] @ images[pos]
        rep = cls(group, field, dim, mats=mats)
        for g in range(group.order):
            for pos, s in enumerate(group.generator_indices):
                if rep.matrix(group.mul(g, s)) != rep.matrix(g) @ images[pos]:
                    raise ValueError("generator images are inconsistent with the group")
        return rep

    @classmethod
    def direct_sum(cls, a: "LinearRep", b: "LinearRep") -> "LinearRep":
        if a.group is not b.group or a.field != b.field:
            raise ValueError("direct sum needs matching group and field")
        if a.perms is not None and b.perms is not None:
            perms = [
                tuple(a.perms[g]) + tuple(p + a.dim for p in b.perms[g])
                for g in range(a.group.order)
            ]
            return cls(a.group, a.field, a.dim + b.dim, perms=perms)
        mats = []
        z_ab = Matrix.zero(a.field, a.dim, b.dim)
        z_ba = Matrix.zero(a.field, b.dim, a.dim)
        for g in range(a.group.order):
            top = a.matrix(g).hstack(z_ab)
            bottom = z_ba.hstack(b.matrix(g))
            mats.append(top.vstack(bottom))
        return cls(a.group, a.field, a.dim + b.dim, mats=mats)

    def conjugated(self, t: Matrix, t_inv: Matrix) -> "LinearRep":
        """The equivalent representation t rho t^-1 (matrix-backed)."""
        mats = [t @ self.matrix(g) @ t_inv for g in range(self.group.order)]
        return LinearRep(self.group, self.field, self.dim, mats=mats)

    def matrix(self, g: int) -> Matrix:
        if self.mats is not None:
            return self.mats[g]
        cached = self._matrix_cache.get(g)
        if cached is None:
            perm = self.perms[g]
            zero, one = self.field.zero(), self.field.one()
            rows = [[zero] * self.dim for _ in range(self.dim)]
            for j in range(self.dim):
                rows[perm[j]][j] = one
            cached = Matrix(self.field, rows)
            self._matrix_cache[g] = cached
        return cached

    def act(self, g: int, m: Matrix) -> Matrix:
        """rho(g) @ m, using the permutation backing when available."""
        if self.perms is not None:
            return m.permute_rows(invert_perm(self.perms[g]))
        return self.matrix(g) @ m

    def act_right(self, m: Matrix, g: int) -> Matrix:
        """m @ rho(g), using the permutation backing when available."""
        if self.perms is not None:
            return m.permute_cols(self.perms[g])
        return m @ self.matrix(g)

    def apply(self, g: int, vector) -> tuple:
        if self.perms is not None:
            perm = self.perms[g]
            out = [None] * self.dim
            for j, v in enumerate(vector):
                out[perm[j]] = v
            return tuple(out)
        return self.matrix(g).apply(vector)

    def verify(self, exhaustive_limit: int = 48, samples: int = 30):
        """Check the homomorphism law; exhaustive for small groups, sampled above."""
        g0 = self.group
        if g0.order <= exhaustive_limit:
            pairs = [(g, h) for g in range(g0.order) for h in range(g0.order)]
        else:
            rng = random.Random(1)
            pairs = [
                (rng.randrange(g0.order), rng.randrange(g0.order)) for _ in range(samples)
            ]
        for g, h in pairs:
            if self.perms is not None:
                if compose_perms(self.perms[g], self.perms[h]) != self.perms[g0.mul(g, h)]:
                    raise ValueError(f"representation is not a homomorphism at ({g},{h})")
            else:
                if self.matrix(g) @ self.matrix(h) != self.matrix(g0.mul(g, h)):
                    raise ValueError(f"representation is not a homomorphism at ({g},{h})")
        if self.matrix(g0.identity) != Matrix.identity(self.field, self.dim):
            raise ValueError("identity image is not the identity matrix")


def _word_length(group: FiniteGroup, g: int) -> int:
    length = 0
    while g != group.identity:
        g = group.bfs_words[g][0]
        length += 1
        if length > group.order:
            raise ValueError("broken BFS words")
    return length


def averaging_idempotent(subgroup, rep: LinearRep, description: str = "") -> Matrix:
    """The projector (1/|U|) sum of rho(u) over u in U.

    Its image is the U-fixed subspace and it acts as the identity there.
    Raises BadCharacteristic when |U| vanishes in the coefficient field.
    """
    subgroup = tuple(subgroup)
    m = len(subgroup)
    field = rep.field
    if field.divides_order(m):
        raise BadCharacteristic(m, field.char, description or "averaging subgroup")
    if rep.perms is not None:
        counts = [[0] * rep.dim for _ in range(rep.dim)]
        for u in subgroup:
            perm = rep.perms[u]
            for j in range(rep.dim):
                counts[perm[j]][j] += 1
        return Matrix(
            field, [[field.ratio(c, m) for c in row] for row in counts]
        )
    total = rep.matrix(subgroup[0])
    for u in subgroup[1:]:
        total = total + rep.matrix(u)
    return total.scale(field.ratio(1, m))


# -- level families ----------------------------------------------------


@dataclass
class LevelFamily:
    """Nested, equivariant families of subgroups indexed by (level, vertex)."""

    action: CellAction
    levels: list = dc_field(default_factory=list)  # list of {vertex: subgroup tuple}
    description: str = ""

    @property
    def depth(self) -> int:
        return len(self.levels)

    def subgroup(self, n: int, x: int) -> tuple:
        return self.levels[n][x]

    def is_exhaustive(self) -> bool:
        """True when the deepest level consists of trivial subgroups only."""
        if not self.levels:
            return False
        ident = self.action.group.identity
        return all(sub == (ident,) for sub in self.levels[-1].values())

    def validate(self):
        group = self.action.group
        verts = self.action.complex.vertices
        for n, level in enumerate(self.levels):
            if sorted(level) != sorted(verts):
                raise ValueError(f"level {n} does not cover all vertices")
            for x, sub in level.items():
                if not group.is_subgroup(sub):
                    raise ValueError(f"level {n} entry at vertex {x} is not a subgroup")
            if n > 0:
                for x in verts:
                    if not set(level[x]) <= set(self.levels[n - 1][x]):
                        raise ValueError(f"nesting fails at level {n}, vertex {x}")
        for n, level in enumerate(self.levels):
            for g in range(group.order):
                for x in verts:
                    gx = self.action.act(g, x)
                    if group.conjugate_subgroup(g, level[x]) != level[gx]:
                        raise ValueError(
                            f"equivariance fails at level {n}, vertex {x}, element {g}"
                        )

    @classmethod
    def from_ball_stabilizers(cls, action: CellAction, radii) -> "LevelFamily":
        """Pointwise ball stabilizers at increasing radii (the default family)."""
        radii = list(radii)
        if radii != sorted(radii):
            raise ValueError("radii must be non-decreasing")
        levels = [
            {x: pointwise_ball_stabilizer(action, x, r) for x in action.complex.vertices}
            for r in radii
        ]
        fam = cls(action, levels, description=f"ball-stabilizers radii {radii}")
        fam.validate()
        return fam


def build_level_system(action: CellAction, rep: LinearRep, fam: LevelFamily) -> dict:
    """Vertex idempotents e[n][x] = averaging over U[n][x], equivariance checked.

    Returns {level: {vertex: Matrix}}.  Raises BadCharacteristic naming the
    offending (level, vertex, order) when an average does not exist.
    """
    out = {}
    for n in range(fam.depth):
        per_vertex = {}
        for x in action.complex.vertices:
            sub = fam.subgroup(n, x)
            per_vertex[x] = averaging_idempotent(
                sub, rep, description=f"level {n} subgroup at vertex {x}, order {len(sub)}"
            )
        out[n] = per_vertex
    _check_level_equivariance(action, rep, out)
    return out


def _check_level_equivariance(action, rep, idempotents, exhaustive_limit: int = 48):
    group = action.group
    if group.order <= exhaustive_limit:
        gs = range(group.order)
    else:
        rng = random.Random(2)
        gs = sorted({rng.randrange(group.order) for _ in range(12)})
    for n, per_vertex in idempotents.items():
        for x, e in per_vertex.items():
            for g in gs:
                gx = action.act(g, x)
                if rep.act(g, e) != rep.act_right(per_vertex[gx], g):
                    raise ValueError(
                        f"vertex idempotents not equivariant at level {n}, vertex {x}, element {g}"
                    )


def product_set_is_subgroup(group: FiniteGroup, left, right) -> bool:
    """Whether the product set {a b : a in left, b in right} is a subgroup.

    When it is, the product of the two averaging idempotents is itself the
    averaging idempotent of that subgroup; whether this happens for a given
    family is recorded per instance, never assumed.
    """
    prod = {group.mul(a, b) for a in left for b in right}
    return group.is_subgroup(prod)


def fixed_subspace_dimension(subgroup, rep: LinearRep) -> int:
    """dim of the U-fixed subspace, by brute force on stacked (rho(u) - 1)."""
    from .linalg import kernel as _kernel

    eye = Matrix.identity(rep.field, rep.dim)
    stacked = None
    for u in subgroup:
        block = rep.matrix(u) - eye
        stacked = block if stacked is None else stacked.vstack(block)
    return _kernel(stacked).dim
