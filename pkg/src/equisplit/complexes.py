"""Finite cell complexes and tree geometry.

Cells carry an explicit dimension and a vertex set; the face order is
derived from vertex containment (all builders here emit simplicial
complexes of dimension <= 1, but the data model does not assume that).
Cell indexing is breadth-first from a designated root so that every
construction is reproducible.
"""

from collections import deque

from .errors import NotATree, SizeLimit


class Complex:
    """A finite cell complex as an indexed poset of cells.

    ``dims[i]`` is the dimension of cell i and ``vertex_sets[i]`` the set of
    its 0-cells (given by their cell indices).  A vertex is its own single
    vertex.  The face order is: sigma < tau iff vertices(sigma) is a proper
    subset of vertices(tau).
    """

    def __init__(self, dims, vertex_sets, root: int | None = None):
        self.dims = tuple(dims)
        self.vertex_sets = tuple(frozenset(vs) for vs in vertex_sets)
        if len(self.dims) != len(self.vertex_sets):
            raise ValueError("dims and vertex_sets length mismatch")
        self.root = root
        self._validate()
        self._cell_by_vertices = {vs: i for i, vs in enumerate(self.vertex_sets)}
        self._faces = tuple(self._compute_faces(i) for i in range(self.size))
        self._dist = None

    @property
    def size(self) -> int:
        return len(self.dims)

    @property
    def vertices(self) -> tuple:
        return tuple(i for i, d in enumerate(self.dims) if d == 0)

    @property
    def dimension(self) -> int:
        return max(self.dims) if self.dims else 0

    def _validate(self):
        seen = set()
        for i, (d, vs) in enumerate(zip(self.dims, self.vertex_sets)):
            if d == 0 and vs != frozenset({i}):
                raise ValueError(f"vertex cell {i} must have vertex set {{{i}}}")
            if d > 0 and len(vs) < 2:
                raise ValueError(f"cell {i} of dimension {d} has fewer than 2 vertices")
            if vs in seen:
                raise ValueError(f"duplicate vertex set for cell {i}")
            seen.add(vs)
        vertex_ids = {i for i, d in enumerate(self.dims) if d == 0}
        for i, vs in enumerate(self.vertex_sets):
            if not vs <= vertex_ids:
                raise ValueError(f"cell {i} refers to non-vertex cells")

    def _compute_faces(self, i) -> tuple:
        vs = self.vertex_sets[i]
        return tuple(
            j
            for j, ws in enumerate(self.vertex_sets)
            if ws < vs and self.dims[j] < self.dims[i]
        )

    def faces(self, i: int) -> tuple:
        """All proper faces of cell i (cells with strictly smaller vertex set)."""
        return self._faces[i]

    def facets(self, i: int) -> tuple:
        """Maximal proper faces of cell i."""
        fs = self._faces[i]
        return tuple(f for f in fs if not any(f in self._faces[g] for g in fs))

    def facet_pairs(self) -> tuple:
        return tuple((f, i) for i in range(self.size) for f in self.facets(i))

    def cell_with_vertices(self, vs) -> int | None:
        return self._cell_by_vertices.get(frozenset(vs))

    def cofaces(self, i: int) -> tuple:
        return tuple(j for j in range(self.size) if i in self._faces[j])

    # -- tree geometry -------------------------------------------------

    def vertex_adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for i, d in enumerate(self.dims):
            if d == 1:
                a, b = sorted(self.vertex_sets[i])
                adj[a].append(b)
                adj[b].append(a)
        return {v: sorted(ns) for v, ns in adj.items()}

    def is_tree(self) -> bool:
        if self.dimension > 1:
            return False
        verts = self.vertices
        edges = [i for i, d in enumerate(self.dims) if d == 1]
        if any(len(self.vertex_sets[e]) != 2 for e in edges):
            return False
        if len(edges) != len(verts) - 1:
            return False
        adj = self.vertex_adjacency()
        seen = set()
        queue = deque([verts[0]])
        while queue:
            v = queue.popleft()
            if v in seen:
                continue
            seen.add(v)
            queue.extend(adj[v])
        return len(seen) == len(verts)

    def require_tree(self):
        if not self.is_tree():
            raise NotATree("operation requires a tree complex")

    def _distances(self):
        if self._dist is None:
            adj = self.vertex_adjacency()
            dist = {}
            for s in self.vertices:
                d = {s: 0}
                queue = deque([s])
                while queue:
                    v = queue.popleft()
                    for w in adj[v]:
                        if w not in d:
                            d[w] = d[v] + 1
                            queue.append(w)
                dist[s] = d
            self._dist = dist
        return self._dist

    def tree_distance(self, u: int, v: int) -> int:
        return self._distances()[u][v]

    def tree_path(self, u: int, v: int) -> tuple:
        """Vertices of the unique geodesic from u to v (inclusive)."""
        dist = self._distances()[v]
        path = [u]
        adj = self.vertex_adjacency()
        while path[-1] != v:
            cur = path[-1]
            path.append(min(w for w in adj[cur] if dist[w] == dist[cur] - 1))
        return tuple(path)

    def tree_diameter(self) -> int:
        dist = self._distances()
        return max(max(d.values()) for d in dist.values())

    def __repr__(self):
        return f"Complex({len(self.vertices)} vertices, {self.size} cells)"


class Subcomplex:
    """A facet-closed subset of a parent complex's cells."""

    def __init__(self, parent: Complex, cells, convex_asserted: bool = False):
        self.parent = parent
        self.cells = frozenset(cells)
        if not self.cells:
            raise ValueError("subcomplex must be nonempty")
        for c in self.cells:
            for f in parent.faces(c):
                if f not in self.cells:
                    raise ValueError(f"subcomplex not facet-closed: cell {c} missing face {f}")
        self.convex_asserted = convex_asserted

    @property
    def vertices(self) -> tuple:
        return tuple(sorted(c for c in self.cells if self.parent.dims[c] == 0))

    @property
    def sorted_cells(self) -> tuple:
        return tuple(sorted(self.cells, key=lambda c: (self.parent.dims[c], c)))

    def __eq__(self, other):
        return (
            isinstance(other, Subcomplex)
            and self.parent is other.parent
            and self.cells == other.cells
        )

    def __hash__(self):
        return hash(self.cells)

    def __repr__(self):
        return f"Subcomplex({sorted(self.cells)})"


def build_regular_tree_ball(q: int, r: int, max_vertices: int = 4096) -> Complex:
    """The radius-r ball in the (q+1)-regular tree, as a 1-dimensional complex.

    Vertices are indexed breadth-first from the center (index 0); edges
    follow in discovery order.  For q > 1 the vertex count is
    1 + (q+1)(q^r - 1)/(q - 1).
    """
    if q < 2:
        raise ValueError("branching factor q must be >= 2")
    if r < 0:
        raise ValueError("radius must be >= 0")
    n_vertices = 1 + (q + 1) * ((q**r - 1) // (q - 1))
    if n_vertices > max_vertices:
        raise SizeLimit(f"tree ball would have {n_vertices} vertices (cap {max_vertices})")
    dims = [0] * n_vertices
    vertex_sets = [frozenset({i}) for i in range(n_vertices)]
    edges = []
    next_vertex = 1
    frontier = [(0, 0)]  # (vertex, depth)
    while frontier:
        v, depth = frontier.pop(0)
        if depth == r:
            continue
        n_children = q + 1 if v == 0 else q
        for _ in range(n_children):
            child = next_vertex
            next_vertex += 1
            edges.append((v, child))
            frontier.append((child, depth + 1))
    for a, b in edges:
        dims.append(1)
        vertex_sets.append(frozenset({a, b}))
    return Complex(dims, vertex_sets, root=0)


def _subtree_subcomplex(c: Complex, hull_vertices) -> Subcomplex:
    cells = set(hull_vertices)
    for i, d in enumerate(c.dims):
        if d == 1 and c.vertex_sets[i] <= cells:
            cells.add(i)
    return Subcomplex(c, cells)


def convex_hull_tree(c: Complex, vertex_set) -> Subcomplex:
    """Smallest geodesically closed subcomplex containing the given vertices.

    In a tree this is the Steiner subtree: the union of the pairwise
    geodesics, together with every edge between included vertices.
    """
    c.require_tree()
    vertex_set = sorted(set(vertex_set))
    if not vertex_set:
        raise ValueError("vertex set must be nonempty")
    base = vertex_set[0]
    hull = set()
    for v in vertex_set:
        hull.update(c.tree_path(v, base))
    return _subtree_subcomplex(c, hull)


def is_convex(s: Subcomplex) -> bool:
    """True iff s equals the convex hull of its own vertex set (trees only)."""
    s.parent.require_tree()
    return s.cells == convex_hull_tree(s.parent, s.vertices).cells


def enumerate_convex_subcomplexes(
    c: Complex, max_count: int = 1000, work_cap: int = 200_000
) -> list:
    """All distinct nonempty convex subcomplexes of a tree, in a fixed order.

    Convex subcomplexes of a tree are exactly its subtrees with all induced
    edges.  Enumeration order is (cell count, sorted cell tuple); the list
    is truncated at ``max_count``.
    """
    c.require_tree()
    adj = c.vertex_adjacency()
    seen = set()
    frontier = [frozenset({v}) for v in c.vertices]
    seen.update(frontier)
    while frontier:
        nxt = []
        for s in frontier:
            for v in sorted(s):
                for w in adj[v]:
                    if w not in s:
                        t = s | {w}
                        if t not in seen:
                            seen.add(t)
                            nxt.append(t)
                            if len(seen) > work_cap:
                                raise SizeLimit("too many convex subcomplexes to enumerate")
        frontier = nxt
    subcomplexes = [_subtree_subcomplex(c, s) for s in seen]
    subcomplexes.sort(key=lambda s: (len(s.cells), s.sorted_cells))
    return subcomplexes[:max_count]
