"""Idempotent systems on complexes and support projections.

A system assigns a vertex idempotent e_x to every vertex; cell idempotents
are the products over a cell's vertices (well-defined only when those
commute, which is checked, not assumed).  The support projection of a
subcomplex is the alternating sum of its cell idempotents; for consistent
systems and convex subcomplexes it is an idempotent whose image is the sum
of the vertex images and whose kernel is the intersection of the vertex
kernels.  Verification computes all three statements with the subspace
oracles and returns them as data.
"""

from dataclasses import dataclass

from .complexes import Complex, Subcomplex, is_convex
from .errors import NonCommutingOnCell, NotConvex
from .fields import Field
from .linalg import (
    Matrix,
    Subspace,
    image,
    is_idempotent,
    kernel,
    subspace_intersect,
    subspace_sum,
)


class IdempotentSystem:
    """Vertex idempotents on a complex, with derived cell idempotents."""

    def __init__(self, complex_: Complex, field: Field, dim: int, vertex_idempotents: dict,
                 label: str = ""):
        self.complex = complex_
        self.field = field
        self.dim = dim
        self.vertex_idempotents = dict(vertex_idempotents)
        self.cell_idempotents: dict = {}
        self.consistency: dict = {}
        self.label = label
        for x, e in self.vertex_idempotents.items():
            if e.rows != dim or e.cols != dim:
                raise ValueError(f"idempotent at vertex {x} has wrong shape")
            if not is_idempotent(e):
                raise ValueError(f"matrix at vertex {x} is not idempotent")
        missing = set(complex_.vertices) - set(self.vertex_idempotents)
        if missing:
            raise ValueError(f"missing vertex idempotents: {sorted(missing)}")

    @property
    def derived(self) -> bool:
        return bool(self.cell_idempotents)

    def vertex_image(self, x: int) -> Subspace:
        return image(self.vertex_idempotents[x])

    def vertex_kernel(self, x: int) -> Subspace:
        return kernel(self.vertex_idempotents[x])

    def __repr__(self):
        return f"IdempotentSystem({self.complex!r}, dim {self.dim}, {self.field.tag})"


def derive_cell_idempotents(sys: IdempotentSystem) -> IdempotentSystem:
    """Populate e_sigma = product of the vertex idempotents of sigma.

    Commutation of the factors is verified pairwise on every cell, and
    order-independence is double-checked by evaluating the product in two
    different vertex orders.  Raises NonCommutingOnCell on failure: such a
    system cannot model a building-style family.
    """
    cx = sys.complex
    for c in range(cx.size):
        verts = sorted(cx.vertex_sets[c])
        es = [sys.vertex_idempotents[v] for v in verts]
        for i in range(len(verts)):
            for j in range(i + 1, len(verts)):
                if es[i] @ es[j] != es[j] @ es[i]:
                    raise NonCommutingOnCell(c, verts[i], verts[j])
        prod = es[0]
        for e in es[1:]:
            prod = prod @ e
        if len(es) > 1:
            check = es[-1]
            for e in reversed(es[:-1]):
                check = check @ e
            assert check == prod, "commuting factors gave order-dependent product"
        assert is_idempotent(prod)
        sys.cell_idempotents[c] = prod
    sys.consistency["cells_commute"] = True
    return sys


def check_path_condition(sys: IdempotentSystem, max_failures: int = 5) -> dict:
    """Evaluate the tree path condition e_x e_z = e_x e_y e_z on geodesics.

    Only the form with y adjacent to z is computed; the general form for
    every intermediate vertex follows from it by telescoping along the
    geodesic.  The result is recorded in ``sys.consistency`` and returned.
    """
    cx = sys.complex
    cx.require_tree()
    failures = []
    verts = cx.vertices
    for x in verts:
        e_x = sys.vertex_idempotents[x]
        cache = {}
        for z in verts:
            if cx.tree_distance(x, z) < 2:
                continue
            path = cx.tree_path(x, z)
            y = path[-2]
            if y not in cache:
                cache[y] = e_x @ sys.vertex_idempotents[y]
            lhs = e_x @ sys.vertex_idempotents[z]
            rhs = cache[y] @ sys.vertex_idempotents[z]
            if lhs != rhs:
                failures.append((x, y, z))
                if len(failures) >= max_failures:
                    break
        if len(failures) >= max_failures:
            break
    report = {
        "path_condition_holds": not failures,
        "path_condition_failures": failures,
    }
    sys.consistency.update(report)
    return report


def alternating_sum(sys: IdempotentSystem, sigma: Subcomplex) -> Matrix:
    """Sum of (-1)^dim e_sigma over the cells of sigma, in (dim, index) order."""
    if not sys.derived:
        derive_cell_idempotents(sys)
    total = Matrix.zero(sys.field, sys.dim, sys.dim)
    for c in sigma.sorted_cells:
        e = sys.cell_idempotents[c]
        total = total + e if sys.complex.dims[c] % 2 == 0 else total - e
    return total


def support_projection(sys: IdempotentSystem, sigma: Subcomplex,
                       require_convex: bool = True) -> Matrix:
    """The support projection of a finite convex subcomplex.

    Convexity is verified for trees; for other complexes the subcomplex
    must carry a caller assertion (``convex_asserted``).  Passing
    ``require_convex=False`` skips the gate (used by the fuzz campaign,
    which evaluates the sum on deliberately non-convex subcomplexes).
    """
    if require_convex:
        if sigma.parent.is_tree():
            if not is_convex(sigma):
                raise NotConvex(f"subcomplex {sorted(sigma.cells)} is not convex")
        elif not sigma.convex_asserted:
            raise NotConvex("convexity is not verifiable here and was not asserted")
    return alternating_sum(sys, sigma)


@dataclass
class VerificationRecord:
    """Outcome of checking the support-projection identities on one subcomplex."""

    sigma_cells: tuple
    convex: bool | None
    idempotent: bool
    image_matches: bool
    kernel_matches: bool
    rank: int
    image_dim: int
    kernel_dim: int
    path_condition_holds: bool | None = None

    @property
    def all_identities_hold(self) -> bool:
        return self.idempotent and self.image_matches and self.kernel_matches

    def to_dict(self) -> dict:
        return {
            "sigma_cells": sorted(self.sigma_cells),
            "convex": self.convex,
            "idempotent": self.idempotent,
            "image_matches": self.image_matches,
            "kernel_matches": self.kernel_matches,
            "rank": self.rank,
            "image_dim": self.image_dim,
            "kernel_dim": self.kernel_dim,
            "path_condition_holds": self.path_condition_holds,
            "all_identities_hold": self.all_identities_hold,
        }


def verify_support_projection(sys: IdempotentSystem, sigma: Subcomplex,
                              vertex_images: dict | None = None,
                              vertex_kernels: dict | None = None) -> VerificationRecord:
    """Check idempotency and both subspace identities for one subcomplex.

    Runs regardless of convexity (failures are data, not errors); the
    record carries the convexity status when it is verifiable.  Copies of
    the per-vertex image/kernel subspaces may be passed in to avoid
    recomputation across many subcomplexes.
    """
    u = alternating_sum(sys, sigma)
    verts = sigma.vertices
    if vertex_images is None:
        vertex_images = {x: sys.vertex_image(x) for x in verts}
    if vertex_kernels is None:
        vertex_kernels = {x: sys.vertex_kernel(x) for x in verts}
    img_sum = Subspace.zero(sys.field, sys.dim)
    for x in verts:
        img_sum = subspace_sum(img_sum, vertex_images[x])
    ker_meet = Subspace.full(sys.field, sys.dim)
    for x in verts:
        ker_meet = subspace_intersect(ker_meet, vertex_kernels[x])
    u_image = image(u)
    u_kernel = kernel(u)
    convex = is_convex(sigma) if sigma.parent.is_tree() else None
    return VerificationRecord(
        sigma_cells=tuple(sorted(sigma.cells)),
        convex=convex,
        idempotent=is_idempotent(u),
        image_matches=u_image == img_sum,
        kernel_matches=u_kernel == ker_meet,
        rank=u_image.dim,
        image_dim=img_sum.dim,
        kernel_dim=ker_meet.dim,
        path_condition_holds=sys.consistency.get("path_condition_holds"),
    )


def support_projection_is_equivariant(sys: IdempotentSystem, action, rep,
                                      sigma: Subcomplex, elements) -> bool:
    """Check rho(g) u_Sigma rho(g)^-1 = u_{g Sigma} for the given elements."""
    u = alternating_sum(sys, sigma)
    for g in elements:
        moved = Subcomplex(sys.complex, {action.act(g, c) for c in sigma.cells})
        u_moved = alternating_sum(sys, moved)
        if rep.act(g, u) != rep.act_right(u_moved, g):
            return False
    return True


def systems_from_level_idempotents(complex_: Complex, field: Field, dim: int,
                                   level_idempotents: dict,
                                   check_paths: bool = True) -> list:
    """One derived IdempotentSystem per level from build_level_system output."""
    systems = []
    for n in sorted(level_idempotents):
        sys = IdempotentSystem(
            complex_, field, dim, level_idempotents[n], label=f"level {n}"
        )
        derive_cell_idempotents(sys)
        if check_paths and complex_.is_tree():
            check_path_condition(sys)
        systems.append(sys)
    return systems


def approximate_unit_level(systems: list, x: int, vector) -> int | None:
    """Minimal level n with e[n][x] v = v, or None when no level reaches v.

    For exhaustive families the deepest idempotent is the identity, so
    every vector is reached.
    """
    for n, sys in enumerate(systems):
        if sys.vertex_idempotents[x].apply(vector) == tuple(vector):
            return n
    return None
