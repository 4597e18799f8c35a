"""Block-function spaces over an idempotent system, with their structure maps.

For a derived system the block space F is the direct sum over cells of the
images of the cell idempotents, flattened in (dim, index) cell order.  Each
block is coordinatized by its RREF image basis, so a vector of im(e_sigma)
has coordinates given by reading its pivot entries.  The sum-of-blocks map
pi: F -> V, the signed block map alpha: V -> F, and the permuted-block
group action on F are all exact matrices here, and the composite pi.alpha
equals the alternating sum over the whole complex by construction.

In this finite setting every block function has finite support and every
vector is smooth, so the finitely-supported and product-style function
spaces coincide with F; verification targets the identities, not the
infinite-dimensional distinctions (reports carry that note).
"""

import random
from dataclasses import dataclass

from .errors import NotExhaustive, NotFixed, NotIncreasing
from .groups import LinearRep, averaging_idempotent
from .idempotents import IdempotentSystem, alternating_sum
from .linalg import Matrix, Subspace, image, is_idempotent, subspace_sum

MODEL_NOTES = (
    "finite model: every subgroup is compact modulo the (trivial) centre, so the"
    " compact and compact-mod-centre splitting notions coincide",
    "finite model: block functions all have finite support and all vectors are"
    " smooth, so the finitely-supported and smooth-product function spaces"
    " coincide with the block space",
    "finite model: the finite-support cuspidality surrogate holds vacuously;"
    " it is recorded, not tested",
)


class BlockSpace:
    """The block space F of a derived idempotent system, with its G-action."""

    def __init__(self, sys: IdempotentSystem, action, rep: LinearRep):
        if rep.dim != sys.dim:
            raise ValueError("representation dimension does not match the system")
        if action.complex is not sys.complex:
            raise ValueError("action and system live on different complexes")
        if not sys.derived:
            from .idempotents import derive_cell_idempotents

            derive_cell_idempotents(sys)
        self.sys = sys
        self.action = action
        self.rep = rep
        cx = sys.complex
        self.cells = tuple(sorted(range(cx.size), key=lambda c: (cx.dims[c], c)))
        self.block_images = {c: image(sys.cell_idempotents[c]) for c in self.cells}
        self.offsets = {}
        total = 0
        for c in self.cells:
            self.offsets[c] = total
            total += self.block_images[c].dim
        self.dim = total
        self._block_map_cache: dict = {}

    def block_rank(self, c: int) -> int:
        return self.block_images[c].dim

    def block_slice(self, c: int) -> slice:
        off = self.offsets[c]
        return slice(off, off + self.block_rank(c))

    def inclusion(self, c: int) -> Matrix:
        """im(e_c) -> V as a (dim V) x (rank) matrix of basis columns."""
        sub = self.block_images[c]
        if sub.dim == 0:
            return Matrix.zero(self.sys.field, self.sys.dim, 0)
        return Matrix(self.sys.field, sub.basis).transpose()

    def coords(self, c: int, vector) -> tuple:
        """Coordinates of a vector of im(e_c): its entries at the pivot columns."""
        sub = self.block_images[c]
        out = tuple(vector[p] for p in sub.pivots)
        check = self.inclusion(c).apply(out)
        if tuple(check) != tuple(vector):
            raise ValueError(f"vector is not in the block image at cell {c}")
        return out

    def pi(self) -> Matrix:
        """Sum-of-blocks map F -> V (inclusion on every block)."""
        field = self.sys.field
        zero = field.zero()
        rows = [[zero] * self.dim for _ in range(self.sys.dim)]
        for c in self.cells:
            off = self.offsets[c]
            for k, basis_row in enumerate(self.block_images[c].basis):
                for i, a in enumerate(basis_row):
                    rows[i][off + k] = a
        return Matrix(field, rows)

    def alpha(self) -> Matrix:
        """Signed block map V -> F: the block at sigma is (-1)^dim e_sigma v."""
        field = self.sys.field
        rows = []
        for c in self.cells:
            e = self.sys.cell_idempotents[c]
            sign = 1 if self.sys.complex.dims[c] % 2 == 0 else -1
            for p in self.block_images[c].pivots:
                row = e.entries[p]
                rows.append(row if sign == 1 else tuple(field.neg(a) for a in row))
        if not rows:
            return Matrix.zero(field, 0, self.sys.dim)
        return Matrix(field, rows)

    def block_map(self, g: int, c: int) -> Matrix:
        """The block of the F-action of g from cell c to cell g.c.

        This is coords_{g.c} . rho(g) . inclusion_c; membership of the
        translated block in the target image is verified, which is the
        statement that the action preserves the block constraint.
        """
        key = (g, c)
        cached = self._block_map_cache.get(key)
        if cached is not None:
            return cached
        target = self.action.act(g, c)
        full = tuple(range(self.sys.dim))
        if self.block_images[c].pivots == full and self.block_images[target].pivots == full:
            # full blocks in standard coordinates: the block map is rho(g)
            m = self.rep.matrix(g)
            self._block_map_cache[key] = m
            return m
        moved = self.rep.act(g, self.inclusion(c))
        pivots = self.block_images[target].pivots
        m = Matrix(self.sys.field, (moved.entries[p] for p in pivots)) if pivots else (
            Matrix.zero(self.sys.field, 0, moved.cols)
        )
        if self.inclusion(target) @ m != moved:
            raise ValueError(f"action of {g} does not preserve the block at cell {c}")
        self._block_map_cache[key] = m
        return m

    def rho_F(self, g: int) -> Matrix:
        """The dense F-action matrix of g (block permutation structure)."""
        field = self.sys.field
        zero = field.zero()
        rows = [[zero] * self.dim for _ in range(self.dim)]
        for c in self.cells:
            target = self.action.act(g, c)
            m = self.block_map(g, c)
            r_off, c_off = self.offsets[target], self.offsets[c]
            for i, row in enumerate(m.entries):
                out = rows[r_off + i]
                for j, a in enumerate(row):
                    out[c_off + j] = a
        return Matrix(field, rows)

    def pi_after_action(self, g: int) -> Matrix:
        """pi . rho_F(g), assembled blockwise."""
        field = self.sys.field
        zero = field.zero()
        rows = [[zero] * self.dim for _ in range(self.sys.dim)]
        for c in self.cells:
            target = self.action.act(g, c)
            block = self.inclusion(target) @ self.block_map(g, c)
            off = self.offsets[c]
            for i in range(self.sys.dim):
                row = rows[i]
                for j, a in enumerate(block.entries[i]):
                    row[off + j] = a
        return Matrix(field, rows)

    def action_after_alpha(self, g: int, alpha: Matrix) -> Matrix:
        """rho_F(g) . alpha, assembled blockwise."""
        field = self.sys.field
        zero = field.zero()
        rows = [[zero] * self.sys.dim for _ in range(self.dim)]
        for c in self.cells:
            target = self.action.act(g, c)
            off_c = self.offsets[c]
            alpha_block = Matrix(
                field, alpha.entries[off_c : off_c + self.block_rank(c)]
            ) if self.block_rank(c) else None
            if alpha_block is None:
                continue
            block = self.block_map(g, c) @ alpha_block
            off_t = self.offsets[target]
            for i, row in enumerate(block.entries):
                rows[off_t + i] = list(row)
        return Matrix(field, rows)

    def verify_action(self, exhaustive_limit: int = 48, samples: int = 30):
        """Block preservation for every g; homomorphism law on sampled pairs.

        Block preservation is checked inside block_map.  The homomorphism
        law is compared blockwise: the (g h)-block out of any cell must be
        the g-block at h.c composed with the h-block at c.
        """
        order = self.action.group.order
        for g in range(order):
            for c in self.cells:
                self.block_map(g, c)
        rng = random.Random(4)
        n_pairs = min(samples, order * order)
        for _ in range(n_pairs):
            g, h = rng.randrange(order), rng.randrange(order)
            gh = self.action.group.mul(g, h)
            for c in self.cells:
                hc = self.action.act(h, c)
                if self.block_map(g, hc) @ self.block_map(h, c) != self.block_map(gh, c):
                    raise ValueError(f"F-action is not a homomorphism at ({g},{h})")

    def verify_equivariance(self, alpha: Matrix, pi: Matrix,
                            exhaustive_limit: int = 48) -> dict:
        """Check rho(g) pi = pi rho_F(g) and rho_F(g) alpha = alpha rho(g).

        Exhaustive over the group up to ``exhaustive_limit``; beyond that,
        generators suffice (the laws multiply), and that is recorded.
        """
        group = self.action.group
        if group.order <= exhaustive_limit:
            elements = range(group.order)
            scope = "exhaustive"
        else:
            elements = group.generator_indices or range(min(group.order, 8))
            scope = "generators"
        for g in elements:
            if self.rep.act(g, pi) != self.pi_after_action(g):
                raise ValueError(f"pi is not equivariant at element {g}")
            if self.action_after_alpha(g, alpha) != self.rep.act_right(alpha, g):
                raise ValueError(f"alpha is not equivariant at element {g}")
        return {"equivariance_scope": scope, "elements_checked": len(list(elements))}


class BlockFunction:
    """An element of a block space, stored in flat block coordinates."""

    def __init__(self, space: BlockSpace, coords):
        coords = tuple(coords)
        if len(coords) != space.dim:
            raise ValueError("coordinate length mismatch")
        self.space = space
        self.coords = coords

    @classmethod
    def from_cell_vectors(cls, space: BlockSpace, cell_vectors: dict) -> "BlockFunction":
        """Build from ambient vectors per cell; each must satisfy e_sigma v = v."""
        field = space.sys.field
        coords = [field.zero()] * space.dim
        for c, vec in cell_vectors.items():
            vec = tuple(vec)
            e = space.sys.cell_idempotents[c]
            if e.apply(vec) != vec:
                raise ValueError(f"vector at cell {c} is not fixed by its idempotent")
            block = space.coords(c, vec)
            off = space.offsets[c]
            coords[off : off + len(block)] = block
        return cls(space, coords)

    def block_vector(self, c: int) -> tuple:
        """The ambient V-vector of this function at cell c."""
        sl = self.space.block_slice(c)
        return self.space.inclusion(c).apply(self.coords[sl.start : sl.stop])

    def act(self, g: int) -> "BlockFunction":
        space = self.space
        field = space.sys.field
        out = [field.zero()] * space.dim
        for c in space.cells:
            r = space.block_rank(c)
            if r == 0:
                continue
            off = space.offsets[c]
            x = self.coords[off : off + r]
            if not any(x):
                continue
            target = space.action.act(g, c)
            moved = space.block_map(g, c).apply(x)
            t_off = space.offsets[target]
            for i, a in enumerate(moved):
                out[t_off + i] = a
        return BlockFunction(space, out)

    def fixer(self) -> tuple:
        """All group elements fixing this function."""
        return tuple(
            g
            for g in range(self.space.action.group.order)
            if self.act(g).coords == self.coords
        )

    def sum_of_blocks(self) -> tuple:
        """pi applied to this function, summed blockwise."""
        field = self.space.sys.field
        total = [field.zero()] * self.space.sys.dim
        for c in self.space.cells:
            if self.space.block_rank(c) == 0:
                continue
            for i, a in enumerate(self.block_vector(c)):
                total[i] = field.add(total[i], a)
        return tuple(total)

    def __eq__(self, other):
        return (
            isinstance(other, BlockFunction)
            and self.space is other.space
            and self.coords == other.coords
        )


@dataclass
class LevelMaps:
    """alpha, pi and their composite q = pi.alpha for one system level."""

    space: BlockSpace
    alpha: Matrix
    pi: Matrix
    q: Matrix

    @classmethod
    def build(cls, space: BlockSpace) -> "LevelMaps":
        alpha = space.alpha()
        pi = space.pi()
        return cls(space=space, alpha=alpha, pi=pi, q=pi @ alpha)


def build_block_space(sys: IdempotentSystem, action, rep: LinearRep) -> BlockSpace:
    space = BlockSpace(sys, action, rep)
    space.verify_action()
    return space


@dataclass
class AlphaPiRecord:
    """Verification outcome for one level's structure maps."""

    q_idempotent: bool
    image_matches_vertex_sum: bool
    q_equals_whole_support_projection: bool
    equivariance_scope: str
    block_dims: dict
    f_dim: int
    q_rank: int

    @property
    def all_hold(self) -> bool:
        return (
            self.q_idempotent
            and self.image_matches_vertex_sum
            and self.q_equals_whole_support_projection
        )

    def to_dict(self) -> dict:
        return {
            "q_idempotent": self.q_idempotent,
            "image_matches_vertex_sum": self.image_matches_vertex_sum,
            "q_equals_whole_support_projection": self.q_equals_whole_support_projection,
            "equivariance_scope": self.equivariance_scope,
            "block_dims": {str(k): v for k, v in sorted(self.block_dims.items())},
            "f_dim": self.f_dim,
            "q_rank": self.q_rank,
            "all_hold": self.all_hold,
        }


def verify_alpha_pi(space: BlockSpace, maps: LevelMaps | None = None) -> AlphaPiRecord:
    """Check that q = pi.alpha is idempotent with the vertex-sum image and
    coincides with the whole-complex support projection."""
    from .complexes import Subcomplex

    maps = maps or LevelMaps.build(space)
    sys = space.sys
    whole = Subcomplex(sys.complex, range(sys.complex.size), convex_asserted=True)
    u_whole = alternating_sum(sys, whole)
    vertex_sum = Subspace.zero(sys.field, sys.dim)
    for x in sys.complex.vertices:
        vertex_sum = subspace_sum(vertex_sum, sys.vertex_image(x))
    equiv = space.verify_equivariance(maps.alpha, maps.pi)
    q_image = image(maps.q)
    return AlphaPiRecord(
        q_idempotent=is_idempotent(maps.q),
        image_matches_vertex_sum=q_image == vertex_sum,
        q_equals_whole_support_projection=maps.q == u_whole,
        equivariance_scope=equiv["equivariance_scope"],
        block_dims={c: space.block_rank(c) for c in space.cells},
        f_dim=space.dim,
        q_rank=q_image.dim,
    )


@dataclass
class MultiLevelResolution:
    """Concatenated multi-level alpha and pi with pi.alpha = identity."""

    levels: list
    alpha: Matrix
    pi: Matrix


def check_increasing(levels: list):
    """Raise NotIncreasing(n) unless q_n q_{n-1} = q_{n-1} = q_{n-1} q_n."""
    for n in range(1, len(levels)):
        q_prev, q_cur = levels[n - 1].q, levels[n].q
        if q_cur @ q_prev != q_prev or q_prev @ q_cur != q_prev:
            raise NotIncreasing(n)


def multi_level_alpha(levels: list) -> MultiLevelResolution:
    """Assemble the telescoped alpha into the concatenated block spaces.

    Level n of the result is alpha_n (Id - q_{n-1}); requires the q_n to be
    increasing and the top one to be the identity, and verifies that the
    concatenated pi composed with the result is exactly the identity.
    """
    if not levels:
        raise ValueError("need at least one level")
    check_increasing(levels)
    dim = levels[0].space.sys.dim
    eye = Matrix.identity(levels[0].space.sys.field, dim)
    if levels[-1].q != eye:
        raise NotExhaustive("top-level composite is not the identity")
    alpha = None
    pi = None
    q_prev = None
    for maps in levels:
        block = maps.alpha if q_prev is None else maps.alpha @ (eye - q_prev)
        alpha = block if alpha is None else alpha.vstack(block)
        pi = maps.pi if pi is None else pi.hstack(maps.pi)
        q_prev = maps.q
    assert pi @ alpha == eye, "telescoping failed to produce the identity"
    return MultiLevelResolution(levels=list(levels), alpha=alpha, pi=pi)


def smooth_product_decomposition(levels: list) -> list:
    """Projectors p_n = q_n - q_{n-1}: orthogonal idempotents summing to Id."""
    check_increasing(levels)
    field = levels[0].space.sys.field
    dim = levels[0].space.sys.dim
    eye = Matrix.identity(field, dim)
    if levels[-1].q != eye:
        raise NotExhaustive("top-level composite is not the identity")
    projectors = []
    prev = Matrix.zero(field, dim, dim)
    for maps in levels:
        p = maps.q - prev
        projectors.append(p)
        prev = maps.q
    for i, p in enumerate(projectors):
        assert is_idempotent(p), f"projector {i} not idempotent"
        for j, p2 in enumerate(projectors):
            if i != j:
                assert (p @ p2).is_zero(), f"projectors {i},{j} not orthogonal"
    total = projectors[0]
    for p in projectors[1:]:
        total = total + p
    assert total == eye, "projectors do not sum to the identity"
    return projectors


def build_resolution_levels(action, rep: LinearRep, radii, check_paths: bool = True) -> list:
    """LevelMaps for the ball-stabilizer family at the given radii.

    Convenience used by resolution and splitting campaigns: builds the
    family, the per-level systems, their block spaces, and the maps.
    """
    from .groups import LevelFamily, build_level_system
    from .idempotents import systems_from_level_idempotents

    fam = LevelFamily.from_ball_stabilizers(action, radii)
    idem = build_level_system(action, rep, fam)
    systems = systems_from_level_idempotents(
        action.complex, rep.field, rep.dim, idem, check_paths=check_paths
    )
    return [LevelMaps.build(build_block_space(s, action, rep)) for s in systems]


def pi_bar(space: BlockSpace, subgroup, psi: BlockFunction) -> tuple:
    """Averaged sum map: sum over cells of av(U) psi(sigma).

    Requires U to fix psi (exactly) and |U| to be invertible.  In this
    finite setting the value always equals the plain block sum; the
    equality is the verified content, not an assumption.
    """
    subgroup = tuple(subgroup)
    for u in subgroup:
        if psi.act(u) != psi:
            raise NotFixed(f"element {u} moves the block function")
    av = averaging_idempotent(subgroup, space.rep, description=f"subgroup of order {len(subgroup)}")
    field = space.sys.field
    total = [field.zero()] * space.sys.dim
    for c in space.cells:
        if space.block_rank(c) == 0:
            continue
        moved = av.apply(psi.block_vector(c))
        for i, a in enumerate(moved):
            total[i] = field.add(total[i], a)
    return tuple(total)


def finite_support_profile(space: BlockSpace, vector) -> dict:
    """Size of {g : e_sigma rho(g) v != 0} per cell (always finite here).

    The finite-support criterion this witnesses is vacuous in a finite
    model; the profile is reported for the record.
    """
    out = {}
    zero = (space.sys.field.zero(),) * space.sys.dim
    for c in space.cells:
        e = space.sys.cell_idempotents[c]
        count = 0
        for g in range(space.action.group.order):
            moved = space.rep.apply(g, tuple(vector))
            if tuple(e.apply(moved)) != zero:
                count += 1
        out[c] = count
    return out
