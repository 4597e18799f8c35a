"""Construction of equivariant sections and retractions through block spaces.

Given an extension W' >-> W ->> W'' of representations that splits
linearly, the engine produces a globally equivariant section W'' -> W (or
retraction W -> W') by:

  1. averaging an arbitrary linear section over each cell stabilizer to
     make it stabilizer-equivariant (possible exactly when the stabilizer
     order is invertible in the field - the good-field dichotomy),
  2. lifting the local maps cell-orbit-wise to the block space of the
     target representation (the compact-induction adjunction made
     concrete: one representative map per orbit determines the rest),
  3. composing with the telescoped block maps, whose composite with the
     sum map is the identity for exhaustive level families.

Every certificate re-verifies from scratch before it is returned; a
failing verification raises instead of emitting a bad certificate.
"""

import random
from dataclasses import dataclass, field as dc_field

from .errors import BadCharacteristic, NotLocallyEquivariant, VerificationFailure
from .fields import Field
from .groups import CellAction, FiniteGroup, LinearRep, averaging_idempotent
from .linalg import Matrix, Subspace, _rref_rows, image, inverse, rank
from .resolutions import multi_level_alpha


class Extension:
    """W' >-> W ->> W'' with equivariant inclusion and projection."""

    def __init__(self, rep_sub: LinearRep, rep_total: LinearRep, rep_quot: LinearRep,
                 inclusion: Matrix, projection: Matrix, label: str = ""):
        self.rep_sub = rep_sub
        self.rep_total = rep_total
        self.rep_quot = rep_quot
        self.inclusion = inclusion
        self.projection = projection
        self.label = label
        self.verify()

    @property
    def group(self) -> FiniteGroup:
        return self.rep_total.group

    @property
    def field(self) -> Field:
        return self.rep_total.field

    def verify(self, exhaustive_limit: int = 48):
        i, p = self.inclusion, self.projection
        n = self.rep_total.dim
        if i.rows != n or p.cols != n:
            raise ValueError("inclusion/projection shapes do not match W")
        if i.cols != self.rep_sub.dim or p.rows != self.rep_quot.dim:
            raise ValueError("inclusion/projection shapes do not match W'/W''")
        if not (p @ i).is_zero():
            raise ValueError("p . i is not zero")
        if rank(i) != i.cols:
            raise ValueError("inclusion is not injective")
        if rank(p) != p.rows:
            raise ValueError("projection is not surjective")
        if rank(i) + rank(p) != n:
            raise ValueError("rank(i) + rank(p) != dim W")
        group = self.group
        if group.order <= exhaustive_limit:
            elements = range(group.order)
        else:
            elements = group.generator_indices or range(min(group.order, 8))
        for g in elements:
            if self.rep_total.act(g, i) != self.rep_sub.act_right(i, g):
                raise ValueError(f"inclusion not equivariant at element {g}")
            if self.rep_quot.act(g, p) != self.rep_total.act_right(p, g):
                raise ValueError(f"projection not equivariant at element {g}")

    def __repr__(self):
        return (
            f"Extension({self.rep_sub.dim} -> {self.rep_total.dim} -> "
            f"{self.rep_quot.dim} over {self.field.tag})"
        )


def extension_from_invariant_subspace(rep: LinearRep, subspace: Subspace,
                                      label: str = "") -> Extension:
    """Build the extension with W' the given invariant subspace of W.

    The quotient is coordinatized by the non-pivot columns of the RREF
    basis of W', which keeps every map exact and canonical.
    """
    field = rep.field
    n = rep.dim
    k = subspace.dim
    if subspace.ambient_dim != n:
        raise ValueError("subspace does not live in W")
    if k == 0 or k == n:
        raise ValueError("invariant subspace must be proper and nonzero")
    basis = Matrix(field, subspace.basis)  # k x n
    incl = basis.transpose()  # n x k
    pivots = list(subspace.pivots)
    non_pivots = [c for c in range(n) if c not in set(pivots)]
    # change of basis [W' basis | complement unit vectors]
    one, zero = field.one(), field.zero()
    embed = Matrix(field, [[one if r == c else zero for c in non_pivots] for r in range(n)])
    c_inv = inverse(incl.hstack(embed))
    proj = Matrix(field, c_inv.entries[k:])  # (n-k) x n
    sub_mats = []
    quot_mats = []
    for g in range(rep.group.order):
        moved = rep.act(g, incl)  # n x k, columns in W'
        coords = Matrix(field, (moved.entries[p] for p in pivots))
        if incl @ coords != moved:
            raise ValueError("subspace is not invariant under the representation")
        sub_mats.append(coords)
        quot_mats.append(proj @ rep.act(g, embed))
    rep_sub = LinearRep.from_matrices(rep.group, field, sub_mats)
    rep_quot = LinearRep.from_matrices(rep.group, field, quot_mats)
    return Extension(rep_sub, rep, rep_quot, incl, proj, label=label)


def invariant_subspace_from_vectors(rep: LinearRep, vectors) -> Subspace:
    """Smallest invariant subspace containing the given vectors."""
    rows = []
    for v in vectors:
        for g in range(rep.group.order):
            rows.append(rep.apply(g, tuple(v)))
    return Subspace.from_rows(rep.field, rep.dim, rows)


def _unimodular_twist(field: Field, n: int, rng: random.Random, ops: int) -> Matrix:
    """A random integer matrix with determinant +-1 (exact inverse stays small)."""
    t = Matrix.identity(field, n)
    rows = [list(r) for r in t.entries]
    for _ in range(ops):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = field.from_int(rng.choice([-2, -1, 1, 2]))
        rows[j] = [field.add(a, field.mul(c, b)) for a, b in zip(rows[j], rows[i])]
    return Matrix(field, rows)


def random_extension(group: FiniteGroup, field: Field, max_dim: int, seed,
                     action: CellAction | None = None, twist: bool = True) -> Extension:
    """A seeded random extension: random W, random invariant W', quotient W''.

    W is a direct sum drawn from the available representation pool (regular
    and, when an action is supplied, permutation representations), twisted
    by a random unimodular basis change; W' is generated by random vectors
    under the group action.  Identical seeds give identical extensions.
    """
    rng = random.Random(f"extension:{seed}")
    pool = []
    if group.order <= max_dim:
        pool.append(("regular", group.order))
    if action is not None:
        pool.append(("perm-vertices", len(action.complex.vertices)))
        pool.append(("perm-cells", action.complex.size))
    pool.append(("trivial", 1))
    pool = [(kind, d) for kind, d in pool if d <= max_dim]

    def make(kind):
        if kind == "regular":
            return LinearRep.regular(group, field)
        if kind == "perm-vertices":
            return LinearRep.permutation(action, field, on="vertices")
        if kind == "perm-cells":
            return LinearRep.permutation(action, field, on="cells")
        return LinearRep.trivial(group, field)

    kind, dim = rng.choice(pool)
    rep = make(kind)
    label = [kind]
    while dim < 2 or rng.random() < 0.5:
        extras = [(k, d) for k, d in pool if dim + d <= max_dim]
        if not extras:
            break
        kind2, d2 = rng.choice(extras)
        rep = LinearRep.direct_sum(rep, make(kind2))
        dim += d2
        label.append(kind2)
    if dim < 2:
        raise ValueError("cannot build a splittable extension in dimension < 2")
    if twist and dim > 1:
        t = _unimodular_twist(field, dim, rng, ops=min(2 * dim, 40))
        rep = rep.conjugated(t, inverse(t))

    subspace = None
    for _ in range(4):
        k = rng.randint(1, 2)
        vectors = [
            [field.from_int(rng.randint(-2, 2)) for _ in range(dim)] for _ in range(k)
        ]
        candidate = invariant_subspace_from_vectors(rep, vectors)
        if 0 < candidate.dim < dim:
            subspace = candidate
            break
    if subspace is None:
        # fall back to the fixed-vector line of the group average
        av = averaging_idempotent(tuple(range(group.order)), rep,
                                  description=f"whole group, order {group.order}")
        candidate = image(av)
        if 0 < candidate.dim < dim:
            subspace = candidate
        else:
            raise ValueError("could not find a proper invariant subspace")
    return extension_from_invariant_subspace(
        rep, subspace, label="+".join(label) + f" dim {dim}, sub {subspace.dim}"
    )


def _canonical_linear_section(p: Matrix) -> Matrix:
    """Solve p t = Id by embedding through the pivot columns of p."""
    field = p.field
    _, pivots = _rref_rows(field, p.entries)
    if len(pivots) != p.rows:
        raise ValueError("projection is not surjective")
    p_piv = p.submatrix(range(p.rows), pivots)
    p_piv_inv = inverse(p_piv)
    t = Matrix.zero(field, p.cols, p.rows)
    rows = [list(r) for r in t.entries]
    for local_row, col in enumerate(pivots):
        rows[col] = list(p_piv_inv.entries[local_row])
    return Matrix(field, rows)


def _canonical_linear_retraction(i: Matrix) -> Matrix:
    """Solve r i = Id by inverting i on its pivot rows."""
    field = i.field
    _, pivots = _rref_rows(field, i.transpose().entries)
    if len(pivots) != i.cols:
        raise ValueError("inclusion is not injective")
    i_piv = i.submatrix(pivots, range(i.cols))
    i_piv_inv = inverse(i_piv)
    r = Matrix.zero(field, i.cols, i.rows)
    rows = [list(row) for row in r.entries]
    for local_col, row_idx in enumerate(pivots):
        for a in range(i.cols):
            rows[a][row_idx] = i_piv_inv.entries[a][local_col]
    return Matrix(field, rows)


def average_map(rep_out: LinearRep, base: Matrix, rep_in: LinearRep, subgroup,
                description: str = "") -> Matrix:
    """(1/|K|) sum of rho_out(k) base rho_in(k)^-1: the K-equivariant average."""
    subgroup = tuple(subgroup)
    m = len(subgroup)
    field = base.field
    if field.divides_order(m):
        raise BadCharacteristic(m, field.char, description or f"subgroup of order {m}")
    total = None
    group = rep_out.group
    for k in subgroup:
        term = rep_out.act(k, rep_in.act_right(base, group.inv(k)))
        total = term if total is None else total + term
    return total.scale(field.ratio(1, m))


def local_equivariant_section(ext: Extension, subgroup, description: str = "") -> Matrix:
    """A K-equivariant section of the projection, by averaging over K.

    The starting section is canonical (pivot columns of p), so the result
    is deterministic.  Raises BadCharacteristic when |K| is not invertible.
    """
    t = _canonical_linear_section(ext.projection)
    s = average_map(ext.rep_total, t, ext.rep_quot, subgroup, description)
    if ext.projection @ s != Matrix.identity(ext.field, ext.rep_quot.dim):
        raise VerificationFailure("averaged section lost the section property")
    for k in subgroup:
        if ext.rep_total.act(k, s) != ext.rep_quot.act_right(s, k):
            raise VerificationFailure(f"averaged section not equivariant at {k}")
    return s


def local_equivariant_retraction(ext: Extension, subgroup, description: str = "") -> Matrix:
    """A K-equivariant retraction of the inclusion, by averaging over K."""
    r0 = _canonical_linear_retraction(ext.inclusion)
    r = average_map(ext.rep_sub, r0, ext.rep_total, subgroup, description)
    if r @ ext.inclusion != Matrix.identity(ext.field, ext.rep_sub.dim):
        raise VerificationFailure("averaged retraction lost the retraction property")
    for k in subgroup:
        if ext.rep_sub.act(k, r) != ext.rep_total.act_right(r, k):
            raise VerificationFailure(f"averaged retraction not equivariant at {k}")
    return r


def frobenius_lift(space, sigma: int, h: Matrix, rep_w: LinearRep) -> dict:
    """Extend a stabilizer-equivariant block map to the whole cell orbit.

    ``h`` maps the block at ``sigma`` to W and must commute with the cell
    stabilizer.  The returned dict sends each orbit cell tau to the block
    map at tau, defined through the minimal coset representative; the
    choice is verified to be representative-independent.
    """
    action = space.action
    group = action.group
    stab = action.cell_stabilizer(sigma)
    for k in stab:
        if rep_w.act(k, h) != h @ space.block_map(k, sigma):
            raise NotLocallyEquivariant(
                f"local map at cell {sigma} does not commute with stabilizer element {k}"
            )
    reps = action.coset_representatives(sigma)
    out = {}
    for tau, g in sorted(reps.items()):
        out[tau] = rep_w.act(g, h) @ space.block_map(group.inv(g), tau)
    if len(stab) > 1:
        # well-definedness spot check with a second representative
        tau = min(reps)
        g1 = reps[tau]
        g2 = next(g for g in range(group.order)
                  if action.act(g, sigma) == tau and g != g1)
        alt = rep_w.act(g2, h) @ space.block_map(group.inv(g2), tau)
        if alt != out[tau]:
            raise NotLocallyEquivariant(
                f"lift at cell {tau} depends on the coset representative"
            )
    return out


@dataclass
class SplittingCertificate:
    """A verified equivariant section or retraction, with its transcript."""

    direction: str  # "section" | "retraction"
    matrix: Matrix
    equivariance_scope: str
    transcript: list = dc_field(default_factory=list)
    input_hashes: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        from .serialize import matrix_to_dict

        return {
            "direction": self.direction,
            "matrix": matrix_to_dict(self.matrix),
            "equivariance_scope": self.equivariance_scope,
            "transcript": self.transcript,
            "input_hashes": self.input_hashes,
        }


def _extension_hashes(ext: Extension) -> dict:
    from .serialize import content_hash, matrix_to_dict

    return {
        "inclusion": content_hash(matrix_to_dict(ext.inclusion)),
        "projection": content_hash(matrix_to_dict(ext.projection)),
    }


def _equivariance_elements(group: FiniteGroup, exhaustive_limit: int):
    if group.order <= exhaustive_limit:
        return list(range(group.order)), "global (exhaustive)"
    gens = list(group.generator_indices) or list(range(min(group.order, 8)))
    return gens, "global (generators)"


def _assemble_level_map(space, blocks: dict, rep_w: LinearRep) -> Matrix:
    """hstack the per-cell block maps in the space's cell order."""
    out = None
    for c in space.cells:
        m = blocks[c]
        out = m if out is None else out.hstack(m)
    if out is None:
        out = Matrix.zero(rep_w.field, rep_w.dim, 0)
    return out


def construct_global_section(ext: Extension, levels: list,
                             exhaustive_limit: int = 48) -> SplittingCertificate:
    """A fully equivariant section of the projection, per the block recipe.

    ``levels`` are LevelMaps built on the quotient representation W'' with
    an exhaustive top level.  Per level and cell orbit: average the
    canonical linear section over the cell stabilizer, restrict to the
    block, lift across the orbit, and compose the assembled map with the
    telescoped alpha.
    """
    resolution = multi_level_alpha(levels)
    transcript = []
    lifted = None
    for maps in levels:
        space = maps.space
        blocks = {}
        for orbit in space.action.orbits():
            sigma = orbit[0]
            stab = space.action.cell_stabilizer(sigma)
            s_local = local_equivariant_section(
                ext, stab, description=f"stabilizer of cell {sigma}, order {len(stab)}"
            )
            h = s_local @ space.inclusion(sigma)
            blocks.update(frobenius_lift(space, sigma, h, ext.rep_total))
        level_map = _assemble_level_map(space, blocks, ext.rep_total)
        compat = ext.projection @ level_map == maps.pi
        transcript.append({
            "check": "projection_compose_lift_equals_pi",
            "level_f_dim": space.dim,
            "passed": compat,
        })
        if not compat:
            raise VerificationFailure("lifted map does not cover pi through p")
        lifted = level_map if lifted is None else lifted.hstack(level_map)
    section = lifted @ resolution.alpha
    elements, scope = _equivariance_elements(ext.group, exhaustive_limit)
    ok_ps = ext.projection @ section == Matrix.identity(ext.field, ext.rep_quot.dim)
    transcript.append({"check": "p_compose_s_is_identity", "passed": ok_ps})
    if not ok_ps:
        raise VerificationFailure("constructed section fails p . s = Id")
    for g in elements:
        if ext.rep_total.act(g, section) != ext.rep_quot.act_right(section, g):
            raise VerificationFailure(f"section not equivariant at element {g}")
    transcript.append({
        "check": "section_equivariance",
        "elements_checked": len(elements),
        "passed": True,
    })
    return SplittingCertificate(
        "section", section, scope, transcript, _extension_hashes(ext)
    )


def construct_global_retraction(ext: Extension, levels: list,
                                exhaustive_limit: int = 48) -> SplittingCertificate:
    """A fully equivariant retraction of the inclusion (dual construction).

    ``levels`` are LevelMaps built on the subrepresentation W' with an
    exhaustive top level.  Per level and orbit: average the canonical
    retraction over the stabilizer, precompose the telescoped alpha rows
    with its conjugates across the orbit, and compose with pi.
    """
    resolution = multi_level_alpha(levels)
    field = ext.field
    eye = Matrix.identity(field, ext.rep_sub.dim)
    transcript = []
    e_blocks = None
    q_prev = None
    for maps in levels:
        space = maps.space
        twisted_alpha = maps.alpha if q_prev is None else maps.alpha @ (eye - q_prev)
        retractions = {}
        for orbit in space.action.orbits():
            sigma = orbit[0]
            stab = space.action.cell_stabilizer(sigma)
            r_local = local_equivariant_retraction(
                ext, stab, description=f"stabilizer of cell {sigma}, order {len(stab)}"
            )
            reps = space.action.coset_representatives(sigma)
            for tau, g in reps.items():
                retractions[tau] = ext.rep_sub.act(
                    g, ext.rep_total.act_right(r_local, ext.group.inv(g))
                )
        rows = None
        for c in space.cells:
            off = space.offsets[c]
            r_c = space.block_rank(c)
            alpha_rows = Matrix(field, twisted_alpha.entries[off : off + r_c], cols=ext.rep_sub.dim)
            block = alpha_rows @ retractions[c]
            rows = block if rows is None else rows.vstack(block)
        if rows is None:
            rows = Matrix.zero(field, 0, ext.rep_total.dim)
        compat = rows @ ext.inclusion == twisted_alpha
        transcript.append({
            "check": "extension_compose_inclusion_equals_alpha",
            "level_f_dim": space.dim,
            "passed": compat,
        })
        if not compat:
            raise VerificationFailure("dual lift does not extend alpha through i")
        e_blocks = rows if e_blocks is None else e_blocks.vstack(rows)
        q_prev = maps.q
    retraction = resolution.pi @ e_blocks
    elements, scope = _equivariance_elements(ext.group, exhaustive_limit)
    ok_ri = retraction @ ext.inclusion == eye
    transcript.append({"check": "r_compose_i_is_identity", "passed": ok_ri})
    if not ok_ri:
        raise VerificationFailure("constructed retraction fails r . i = Id")
    for g in elements:
        if ext.rep_sub.act(g, retraction) != ext.rep_total.act_right(retraction, g):
            raise VerificationFailure(f"retraction not equivariant at element {g}")
    transcript.append({
        "check": "retraction_equivariance",
        "elements_checked": len(elements),
        "passed": True,
    })
    return SplittingCertificate(
        "retraction", retraction, scope, transcript, _extension_hashes(ext)
    )
