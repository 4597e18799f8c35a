"""Randomized verification campaigns and their reports.

Every campaign is driven by a config dict and a 64-bit seed; per-trial
randomness comes from Random(f"{seed}:{campaign}:{trial}"), so reports are
deterministic given (config, seed).  Each trial builds a fully concrete
instance recipe (complex, group generators as cycle strings, field, rep,
level radii) that can be rebuilt bit-identically later: counterexample
fixtures store the recipe and replay through the same code path.

Instances for the theorem-verifying campaigns are filtered to systems
satisfying the operational consistency conditions (pairwise commutation on
cells and the tree path condition); rejections are counted in the report.
The fuzz campaign deliberately drops the filters to map which conditions
matter, and hunts for non-convex subcomplexes where the support-projection
identities fail.
"""

import random
import time
from dataclasses import dataclass

from .complexes import (
    Complex,
    Subcomplex,
    build_regular_tree_ball,
    enumerate_convex_subcomplexes,
    is_convex,
)
from .errors import (
    BadCharacteristic,
    ConfigError,
    NonCommutingOnCell,
    NotATree,
    SizeLimit,
)
from .fields import Field, is_prime
from .groups import (
    CellAction,
    FiniteGroup,
    LevelFamily,
    LinearRep,
    build_level_system,
    cycles_string,
    parse_cycles,
    product_set_is_subgroup,
    tree_automorphism_generators,
    tree_automorphism_vertex_perms,
)
from .idempotents import (
    support_projection_is_equivariant,
    systems_from_level_idempotents,
    verify_support_projection,
)
from .linalg import image
from .resolutions import (
    MODEL_NOTES,
    BlockFunction,
    LevelMaps,
    build_block_space,
    multi_level_alpha,
    pi_bar,
    smooth_product_decomposition,
    verify_alpha_pi,
)
from .serialize import canonical_json, complex_hash, content_hash
from .splitting import construct_global_retraction, construct_global_section, random_extension

REPORT_SCHEMA = "equisplit-report/1"

DEFAULT_CAPS = {
    "max_vertices": 64,
    "max_group_order": 5000,
    "max_dim": 60,
    "max_subcomplexes": 48,
    "exhaustive_limit": 48,
    "max_retries": 12,
}

CAMPAIGNS = ("support-projection", "resolution", "splitting", "retraction", "fuzz")


@dataclass
class Instance:
    """A fully built campaign instance plus the recipe that rebuilds it."""

    recipe: dict
    complex: Complex
    group: FiniteGroup
    action: CellAction
    field: Field
    rep: LinearRep | None
    radii: list

    def info(self) -> dict:
        return {
            "complex_hash": complex_hash(self.complex),
            "vertices": len(self.complex.vertices),
            "cells": self.complex.size,
            "group_order": self.group.order,
            "field": self.field.tag,
            "rep_dim": self.rep.dim if self.rep is not None else None,
            "radii": list(self.radii),
        }


# -- recipes -----------------------------------------------------------


def _validate_caps(config: dict) -> dict:
    caps = dict(DEFAULT_CAPS)
    caps.update(config.get("caps", {}))
    for key, value in caps.items():
        if not isinstance(value, int) or value <= 0:
            raise ConfigError(f"cap {key} must be a positive integer, got {value!r}")
    return caps


def build_instance(recipe: dict, caps: dict | None = None) -> Instance:
    """Rebuild an instance from its concrete recipe (deterministic)."""
    caps = caps or DEFAULT_CAPS
    cspec = recipe["complex"]
    if "data" in cspec:
        from .serialize import complex_from_dict

        cx = complex_from_dict(cspec["data"])
        if len(cx.vertices) > caps["max_vertices"]:
            raise SizeLimit(f"complex has {len(cx.vertices)} vertices (cap {caps['max_vertices']})")
    else:
        cx = build_regular_tree_ball(cspec["tree_q"], cspec["tree_r"], caps["max_vertices"])
    gspec = recipe["group"]
    if gspec["kind"] == "full-automorphisms":
        perms = tree_automorphism_vertex_perms(cx, caps["max_group_order"])
    elif gspec["kind"] == "subgroup":
        n = len(cx.vertices)
        perms = [parse_cycles(text, n) for text in gspec["generators"]]
    else:
        raise ConfigError(f"unknown group recipe kind {gspec['kind']!r}")
    group, elements = FiniteGroup.from_permutations(perms, caps["max_group_order"])
    action = CellAction.from_vertex_perms(group, cx, elements)
    field = Field.from_tag(recipe["field"])
    rep = _build_rep(recipe.get("rep"), group, action, field, caps)
    return Instance(
        recipe=recipe,
        complex=cx,
        group=group,
        action=action,
        field=field,
        rep=rep,
        radii=list(recipe.get("radii", [])),
    )


def _build_rep(rspec, group, action, field, caps):
    if rspec is None:
        return None
    kind = rspec["kind"]
    if kind == "regular":
        rep = LinearRep.regular(group, field)
    elif kind == "permutation":
        rep = LinearRep.permutation(action, field, on=rspec.get("on", "vertices"))
    elif kind == "sum":
        parts = [
            _build_rep(part, group, action, field, caps) for part in rspec["parts"]
        ]
        rep = parts[0]
        for part in parts[1:]:
            rep = LinearRep.direct_sum(rep, part)
    elif kind == "matrices":
        from .serialize import matrix_from_dict

        images = [matrix_from_dict(d) for d in rspec["images"]]
        if any(m.field != field for m in images):
            raise ConfigError("explicit matrix images use a different field than the instance")
        rep = LinearRep.from_generator_images(group, field, images)
    else:
        raise ConfigError(f"unknown rep kind {kind!r}")
    if rep.dim > caps["max_dim"]:
        raise SizeLimit(f"representation dimension {rep.dim} exceeds cap {caps['max_dim']}")
    rep.verify(exhaustive_limit=min(caps["exhaustive_limit"], 24))
    return rep


def _pick_field(config: dict, group_order: int, rng: random.Random) -> str:
    tag = config.get("field", "Q")
    if tag == "F-auto":
        good = [p for p in (2, 3, 5, 7, 11, 13, 17, 19, 23) if group_order % p != 0]
        if not good:
            raise ConfigError(f"no small prime avoids group order {group_order}")
        return f"F{rng.choice(good)}"
    if tag == "F-bad":
        bad = [p for p in (2, 3, 5, 7, 11, 13) if group_order % p == 0]
        if not bad:
            raise ConfigError(f"group order {group_order} has no small prime factor")
        return f"F{rng.choice(bad)}"
    Field.from_tag(tag)
    return tag


def _pick_group_recipe(config: dict, cx: Complex, caps: dict, rng: random.Random) -> dict:
    gspec = config.get("group", {"kind": "full-automorphisms"})
    kind = gspec.get("kind", "full-automorphisms")
    if kind == "full-automorphisms":
        return {"kind": "full-automorphisms"}
    if kind == "cycles":
        return {"kind": "subgroup", "generators": list(gspec["generators"])}
    if kind == "cycles-file":
        from pathlib import Path

        try:
            text = Path(gspec["file"]).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot load generators file {gspec['file']!r}: {exc}")
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        return {"kind": "subgroup", "generators": lines}
    if kind == "random-subgroup":
        n = len(cx.vertices)
        max_order = min(gspec.get("max_order", caps["max_group_order"]), caps["max_group_order"])
        try:
            pool = tree_automorphism_vertex_perms(cx, caps["max_group_order"])
        except SizeLimit:
            base = tree_automorphism_generators(cx)
            pool = list(base)
            for _ in range(8):
                a, b = rng.choice(base), rng.choice(pool)
                pool.append(tuple(a[b[i]] for i in range(n)))
        for _ in range(12):
            k = rng.randint(1, 3)
            gens = [rng.choice(pool) for _ in range(k)]
            try:
                group, _ = FiniteGroup.from_permutations(gens, max_order)
            except SizeLimit:
                continue
            return {"kind": "subgroup", "generators": [cycles_string(p) for p in gens]}
        return {"kind": "subgroup", "generators": ["()"]}
    raise ConfigError(f"unknown group kind {kind!r}")


def _pick_rep_spec(config: dict, group_order: int, cx: Complex, caps: dict,
                   rng: random.Random) -> dict:
    rspec = config.get("rep", {"kind": "mixed"})
    kind = rspec.get("kind", "mixed")
    if kind != "mixed":
        return dict(rspec)
    choices = [{"kind": "permutation", "on": "vertices"}]
    if cx.size <= caps["max_dim"]:
        choices.append({"kind": "permutation", "on": "cells"})
    if group_order <= caps["max_dim"]:
        choices.append({"kind": "regular"})
    if group_order + len(cx.vertices) <= caps["max_dim"]:
        choices.append({
            "kind": "sum",
            "parts": [{"kind": "regular"}, {"kind": "permutation", "on": "vertices"}],
        })
    if len(cx.vertices) + cx.size <= caps["max_dim"]:
        choices.append({
            "kind": "sum",
            "parts": [
                {"kind": "permutation", "on": "vertices"},
                {"kind": "permutation", "on": "cells"},
            ],
        })
    return rng.choice(choices)


def _pick_radii(config: dict, cx: Complex, campaign: str, rng: random.Random) -> list:
    radii = config.get("radii", "auto")
    if radii != "auto":
        return list(radii)
    diam = cx.tree_diameter()
    if campaign == "support-projection":
        return [1]
    if campaign == "fuzz":
        return [1]
    if campaign in ("splitting", "retraction"):
        return [max(diam, 1)] if rng.random() < 0.5 else sorted({1, max(diam, 1)})
    # resolution: prefer a genuine multi-level ladder when the tree allows it
    if diam <= 1:
        return [1]
    ladder = sorted({1, 2, max(diam, 2)})
    return ladder


def _resolve_complex_spec(cspec: dict, caps: dict, rng: random.Random) -> dict:
    """Turn a config complex spec into a self-contained recipe entry."""
    if "file" in cspec:
        import json
        from pathlib import Path

        try:
            data = json.loads(Path(cspec["file"]).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load complex file {cspec['file']!r}: {exc}")
        return {"data": data}
    if "data" in cspec:
        return {"data": cspec["data"]}
    if "mix" in cspec:
        q, r = rng.choice(cspec["mix"])
        return {"tree_q": q, "tree_r": r}
    return {"tree_q": cspec["tree_q"], "tree_r": cspec["tree_r"]}


def generate_instance(config: dict, campaign: str, caps: dict, rng: random.Random,
                      with_rep: bool = True) -> Instance:
    complex_recipe = _resolve_complex_spec(
        config.get("complex", {"tree_q": 2, "tree_r": 1}), caps, rng
    )
    probe_cx = build_instance(
        {"complex": complex_recipe, "group": {"kind": "subgroup", "generators": ["()"]},
         "field": "Q", "rep": None, "radii": []},
        caps,
    ).complex
    group_recipe = _pick_group_recipe(config, probe_cx, caps, rng)
    probe = build_instance(
        {"complex": complex_recipe, "group": group_recipe,
         "field": "Q", "rep": None, "radii": []},
        caps,
    )
    field_tag = _pick_field(config, probe.group.order, rng)
    rep_spec = (
        _pick_rep_spec(config, probe.group.order, probe_cx, caps, rng) if with_rep else None
    )
    recipe = {
        "complex": complex_recipe,
        "group": group_recipe,
        "field": field_tag,
        "rep": rep_spec,
        "radii": _pick_radii(config, probe_cx, campaign, rng),
    }
    lspec = config.get("levels")
    if lspec is not None:
        if lspec.get("kind") == "explicit":
            recipe["levels_explicit"] = lspec["levels"]
        elif lspec.get("kind") == "ball-stabilizers":
            recipe["radii"] = list(lspec["radii"])
        else:
            raise ConfigError(f"unknown levels kind {lspec.get('kind')!r}")
    return build_instance(recipe, caps)


# -- per-campaign trials -----------------------------------------------


def _build_systems(instance: Instance, check_paths: bool = True):
    explicit = instance.recipe.get("levels_explicit")
    if explicit is not None:
        levels = [
            {int(x): tuple(sorted(members)) for x, members in level.items()}
            for level in explicit
        ]
        fam = LevelFamily(instance.action, levels, description="explicit family")
        fam.validate()
    else:
        fam = LevelFamily.from_ball_stabilizers(instance.action, instance.radii)
    idem = build_level_system(instance.action, instance.rep, fam)
    systems = systems_from_level_idempotents(
        instance.complex, instance.field, instance.rep.dim, idem, check_paths=check_paths
    )
    # record whether each cell product is realized by an actual subgroup
    cx = instance.complex
    for n, sys in enumerate(systems):
        realized = {}
        for c in range(cx.size):
            verts = sorted(cx.vertex_sets[c])
            if len(verts) != 2:
                continue
            realized[c] = product_set_is_subgroup(
                instance.group, fam.subgroup(n, verts[0]), fam.subgroup(n, verts[1])
            )
        sys.consistency["cell_product_subgroup_realized"] = realized
    return systems


def _admissible_instance(config, campaign, caps, rng, notes):
    """Generate until the derived systems satisfy the consistency filters."""
    for attempt in range(caps["max_retries"]):
        instance = generate_instance(config, campaign, caps, rng)
        try:
            systems = _build_systems(instance)
        except NonCommutingOnCell:
            notes["rejected_noncommuting"] = notes.get("rejected_noncommuting", 0) + 1
            continue
        if all(s.consistency.get("path_condition_holds", True) for s in systems):
            return instance, systems
        notes["rejected_path_condition"] = notes.get("rejected_path_condition", 0) + 1
    raise ConfigError(
        f"could not generate a consistent system in {caps['max_retries']} attempts"
    )


def _sigma_sample(cx: Complex, cap: int) -> list:
    """Convex subcomplexes, stride-sampled across sizes when over the cap."""
    sigmas = enumerate_convex_subcomplexes(cx, max_count=100_000)
    if len(sigmas) <= cap:
        return sigmas
    step = len(sigmas) / cap
    picked = [sigmas[int(i * step)] for i in range(cap - 1)]
    picked.append(sigmas[-1])  # always include the whole complex
    return picked


def support_projection_trial(config: dict, caps: dict, rng: random.Random) -> dict:
    notes: dict = {}
    instance, systems = _admissible_instance(config, "support-projection", caps, rng, notes)
    sigmas = _sigma_sample(instance.complex, caps["max_subcomplexes"])
    records = []
    passed = True
    for level, sys in enumerate(systems):
        vertex_images = {x: sys.vertex_image(x) for x in instance.complex.vertices}
        vertex_kernels = {x: sys.vertex_kernel(x) for x in instance.complex.vertices}
        for sigma in sigmas:
            rec = verify_support_projection(sys, sigma, vertex_images, vertex_kernels)
            records.append({"level": level, **rec.to_dict()})
            passed = passed and rec.all_identities_hold
        if instance.group.order <= caps["exhaustive_limit"]:
            sample = [sigmas[0], sigmas[len(sigmas) // 2], sigmas[-1]]
            gs = sorted(rng.sample(range(instance.group.order), min(6, instance.group.order)))
            for sigma in sample:
                if not support_projection_is_equivariant(
                    sys, instance.action, instance.rep, sigma, gs
                ):
                    passed = False
                    notes["equivariance_failure"] = True
    return {
        "recipe": instance.recipe,
        "instance": instance.info(),
        "sigma_count": len(sigmas),
        "consistency": [
            {
                "path_condition_holds": s.consistency.get("path_condition_holds"),
                "cell_products_realized": all(
                    s.consistency.get("cell_product_subgroup_realized", {}).values()
                ),
            }
            for s in systems
        ],
        "records": records,
        "notes": notes,
        "passed": passed,
    }


def resolution_trial(config: dict, caps: dict, rng: random.Random) -> dict:
    notes: dict = {}
    instance, systems = _admissible_instance(config, "resolution", caps, rng, notes)
    limit = caps["exhaustive_limit"]
    levels = []
    level_records = []
    passed = True
    for sys in systems:
        space = build_block_space(sys, instance.action, instance.rep)
        maps = LevelMaps.build(space)
        rec = verify_alpha_pi(space, maps)
        level_records.append(rec.to_dict())
        passed = passed and rec.all_hold
        levels.append(maps)
    multi = None
    eye_rank = instance.rep.dim
    if levels[-1].q.is_identity():
        multi_level_alpha(levels)  # raises unless increasing + exhaustive + pi.alpha = Id
        projectors = smooth_product_decomposition(levels)
        ranks = [image(p).dim for p in projectors]
        multi = {
            "levels": len(levels),
            "projector_ranks": ranks,
            "ranks_sum_to_dim": sum(ranks) == eye_rank,
            "pi_alpha_identity": True,  # multi_level_alpha asserts it
        }
        passed = passed and multi["ranks_sum_to_dim"]
        # approximate-unit probe on a random vector
        v = tuple(instance.field.from_int(rng.randint(-2, 2)) for _ in range(instance.rep.dim))
        x = rng.choice(instance.complex.vertices)
        reached = None
        for n, sys in enumerate(systems):
            if sys.vertex_idempotents[x].apply(v) == v:
                reached = n
                break
        multi["approximate_unit_level"] = reached
        multi["approximate_unit_reached"] = reached is not None
        passed = passed and (reached is not None)
    else:
        notes["top_level_not_exhaustive"] = True
    # averaged-sum independence over all comparable fixer subgroup pairs
    space = levels[0].space
    raw = BlockFunction(
        space, [instance.field.from_int(rng.randint(-2, 2)) for _ in range(space.dim)]
    )
    subgroup_pool = (
        instance.group.all_subgroups()
        if instance.group.order <= limit
        else [instance.group.subgroup_closure([rng.randrange(instance.group.order)])]
    )
    u0 = rng.choice(subgroup_pool)
    if instance.field.divides_order(len(u0)):
        u0 = (instance.group.identity,)
    acc = [instance.field.zero()] * space.dim
    for u in u0:
        moved = raw.act(u)
        acc = [instance.field.add(a, b) for a, b in zip(acc, moved.coords)]
    scale = instance.field.ratio(1, len(u0))
    psi = BlockFunction(space, [instance.field.mul(scale, a) for a in acc])
    fixer = psi.fixer()
    if instance.group.order <= limit:
        fixer_subgroups = [
            s for s in instance.group.all_subgroups() if set(s) <= set(fixer)
        ]
    else:
        fixer_subgroups = [(instance.group.identity,), tuple(sorted(fixer))]
    pi_psi = levels[0].pi.apply(psi.coords)
    pairs_checked = 0
    for a in fixer_subgroups:
        if instance.field.divides_order(len(a)):
            continue
        for b in fixer_subgroups:
            if len(a) <= len(b) and set(a) <= set(b) and instance.group.is_normal_in(a, b):
                if instance.field.divides_order(len(b)):
                    continue
                va = pi_bar(space, a, psi)
                vb = pi_bar(space, b, psi)
                if not (va == vb == pi_psi):
                    passed = False
                    notes["pi_bar_mismatch"] = {"small": len(a), "big": len(b)}
                pairs_checked += 1
    return {
        "recipe": instance.recipe,
        "instance": instance.info(),
        "levels": level_records,
        "multi_level": multi,
        "pi_bar_pairs_checked": pairs_checked,
        "fixer_order": len(fixer),
        "notes": notes,
        "passed": passed,
    }


def splitting_trial(config: dict, caps: dict, rng: random.Random,
                    direction: str = "section") -> dict:
    from .resolutions import build_resolution_levels

    instance = generate_instance(config, "splitting", caps, rng, with_rep=False)
    seed = rng.randrange(2**32)
    expect_bad = bool(config.get("expect_bad_characteristic", False))
    notes: dict = {}
    record = {
        "recipe": instance.recipe,
        "instance": instance.info(),
        "extension_seed": seed,
        "direction": direction,
        "notes": notes,
    }
    try:
        ext = random_extension(
            instance.group, instance.field, caps["max_dim"], seed, action=instance.action
        )
        record["dims"] = [ext.rep_sub.dim, ext.rep_total.dim, ext.rep_quot.dim]
        record["extension_label"] = ext.label
        target = ext.rep_quot if direction == "section" else ext.rep_sub
        levels = build_resolution_levels(
            instance.action, target, instance.radii, check_paths=False
        )
        if direction == "section":
            cert = construct_global_section(ext, levels, caps["exhaustive_limit"])
        else:
            cert = construct_global_retraction(ext, levels, caps["exhaustive_limit"])
        record["certificate_hash"] = content_hash(cert.to_dict())
        record["equivariance_scope"] = cert.equivariance_scope
        record["transcript"] = cert.transcript
        record["bad_characteristic"] = None
        record["passed"] = not expect_bad
        if expect_bad:
            notes["expected_bad_characteristic_but_succeeded"] = True
    except BadCharacteristic as exc:
        record["bad_characteristic"] = {
            "order": exc.order,
            "char": exc.char,
            "description": exc.description,
            "char_divides_order": exc.order % exc.char == 0,
        }
        record["passed"] = expect_bad and exc.order % exc.char == 0
        if not expect_bad:
            notes["unexpected_bad_characteristic"] = True
    return record


# -- fuzzing -----------------------------------------------------------


def _random_facet_closed_subcomplex(cx: Complex, rng: random.Random) -> Subcomplex:
    verts = list(cx.vertices)
    k = rng.randint(1, max(1, len(verts) - 1))
    chosen = set(rng.sample(verts, k))
    cells = set(chosen)
    for c in range(cx.size):
        if cx.dims[c] == 1 and cx.vertex_sets[c] <= chosen and rng.random() < 0.7:
            cells.add(c)
    return Subcomplex(cx, cells)


def shrink_sigma(sys, sigma_cells) -> tuple:
    """Greedy cell removal keeping at least one failing identity.

    Cells are tried in descending (dim, index) order; a cell can go only if
    no remaining cell has it as a face and the shrunk subcomplex still
    fails verification.  Returns the minimized cell tuple (a fixpoint).
    """
    cx = sys.complex
    current = set(sigma_cells)

    def still_fails(cells):
        rec = verify_support_projection(sys, Subcomplex(cx, cells))
        return not rec.all_identities_hold

    if not still_fails(current):
        return tuple(sorted(current))
    changed = True
    while changed:
        changed = False
        for cell in sorted(current, key=lambda c: (-cx.dims[c], -c)):
            if len(current) == 1:
                break
            blocked = any(
                cell in cx.faces(other) for other in current if other != cell
            )
            if blocked:
                continue
            candidate = current - {cell}
            if still_fails(candidate):
                current = candidate
                changed = True
    return tuple(sorted(current))


def fuzz_trial(config: dict, caps: dict, rng: random.Random) -> dict:
    notes: dict = {}
    instance = generate_instance(config, "fuzz", caps, rng)
    try:
        systems = _build_systems(instance, check_paths=True)
    except NonCommutingOnCell as exc:
        return {
            "recipe": instance.recipe,
            "instance": instance.info(),
            "noncommuting_cell": exc.cell,
            "records": [],
            "counterexamples": [],
            "passed": True,
            "notes": {"system_inadmissible": True},
        }
    sys = systems[0]
    records = []
    counterexamples = []
    passed = True
    consistent = sys.consistency.get("path_condition_holds", False)
    # a few convex controls: these must pass on consistent systems
    convex_pool = _sigma_sample(instance.complex, caps["max_subcomplexes"])
    for sigma in convex_pool[:: max(1, len(convex_pool) // 6)][:6]:
        rec = verify_support_projection(sys, sigma)
        records.append({"kind": "convex-control", **rec.to_dict()})
        if consistent and not rec.all_identities_hold:
            passed = False
            notes["convex_failure_on_consistent_system"] = True
    # non-convex probes
    probes = config.get("probes_per_trial", 12)
    for _ in range(probes):
        sigma = _random_facet_closed_subcomplex(instance.complex, rng)
        convex = is_convex(sigma)
        rec = verify_support_projection(sys, sigma)
        records.append({"kind": "probe", **rec.to_dict()})
        if convex and consistent and not rec.all_identities_hold:
            passed = False
            notes["convex_failure_on_consistent_system"] = True
        if not convex and not rec.all_identities_hold:
            minimized = shrink_sigma(sys, rec.sigma_cells)
            replay = verify_support_projection(sys, Subcomplex(instance.complex, minimized))
            counterexamples.append({
                "recipe": instance.recipe,
                "system_level": 0,
                "sigma_cells": sorted(rec.sigma_cells),
                "minimized_cells": sorted(minimized),
                "minimized_record": replay.to_dict(),
                "failing_checks": [
                    name
                    for name, ok in (
                        ("idempotent", replay.idempotent),
                        ("image_matches", replay.image_matches),
                        ("kernel_matches", replay.kernel_matches),
                    )
                    if not ok
                ],
            })
    return {
        "recipe": instance.recipe,
        "instance": instance.info(),
        "path_condition_holds": consistent,
        "records": records,
        "counterexamples": counterexamples,
        "passed": passed,
        "notes": notes,
    }


def replay_fixture(fixture: dict, caps: dict | None = None) -> dict:
    """Rebuild a counterexample fixture and re-verify it (bit-deterministic)."""
    caps = caps or DEFAULT_CAPS
    instance = build_instance(fixture["recipe"], caps)
    systems = _build_systems(instance, check_paths=True)
    sys = systems[fixture.get("system_level", 0)]
    sigma = Subcomplex(instance.complex, fixture["minimized_cells"])
    rec = verify_support_projection(sys, sigma)
    return rec.to_dict()


def shrink_fixture(fixture: dict, caps: dict | None = None) -> dict:
    """Re-minimize a fixture; already-minimal fixtures come back unchanged."""
    caps = caps or DEFAULT_CAPS
    instance = build_instance(fixture["recipe"], caps)
    systems = _build_systems(instance, check_paths=True)
    sys = systems[fixture.get("system_level", 0)]
    cells = fixture.get("sigma_cells", fixture.get("minimized_cells"))
    minimized = shrink_sigma(sys, cells)
    rec = verify_support_projection(sys, Subcomplex(instance.complex, minimized))
    out = dict(fixture)
    out["minimized_cells"] = sorted(minimized)
    out["minimized_record"] = rec.to_dict()
    out["failing_checks"] = [
        name
        for name, ok in (
            ("idempotent", rec.idempotent),
            ("image_matches", rec.image_matches),
            ("kernel_matches", rec.kernel_matches),
        )
        if not ok
    ]
    return out


# -- campaign driver ---------------------------------------------------


def validate_config(config: dict) -> dict:
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    campaign = config.get("campaign")
    if campaign not in CAMPAIGNS:
        raise ConfigError(f"campaign must be one of {CAMPAIGNS}, got {campaign!r}")
    if "seed" not in config or not isinstance(config["seed"], int):
        raise ConfigError("a 64-bit integer seed is mandatory")
    trials = config.get("trials", 10)
    if not isinstance(trials, int) or trials <= 0:
        raise ConfigError("trials must be a positive integer")
    field = config.get("field", "Q")
    if field not in ("Q", "F-auto", "F-bad"):
        if not (isinstance(field, str) and field.startswith("F") and field[1:].isdigit()
                and is_prime(int(field[1:]))):
            raise ConfigError(f"bad field spec {field!r}")
    cspec = config.get("complex", {"tree_q": 2, "tree_r": 1})
    if "mix" in cspec:
        for pair in cspec["mix"]:
            if len(pair) != 2 or pair[0] < 2 or pair[1] < 0:
                raise ConfigError(f"bad complex mix entry {pair!r}")
    elif "file" in cspec or "data" in cspec:
        pass  # resolved (and size-checked) at instance build time
    elif not (cspec.get("tree_q", 0) >= 2 and cspec.get("tree_r", -1) >= 0):
        raise ConfigError(f"bad complex spec {cspec!r}")
    _validate_caps(config)
    return config


def run_campaign(config: dict) -> dict:
    """Run one campaign and return the structured report (deterministic)."""
    config = validate_config(config)
    caps = _validate_caps(config)
    campaign = config["campaign"]
    seed = config["seed"]
    trials = config.get("trials", 10)
    started = time.perf_counter()
    trial_records = []
    counterexamples = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{campaign}:{t}")
        try:
            if campaign == "support-projection":
                rec = support_projection_trial(config, caps, rng)
            elif campaign == "resolution":
                rec = resolution_trial(config, caps, rng)
            elif campaign == "splitting":
                rec = splitting_trial(config, caps, rng, direction="section")
            elif campaign == "retraction":
                rec = splitting_trial(config, caps, rng, direction="retraction")
            else:
                rec = fuzz_trial(config, caps, rng)
                counterexamples.extend(rec.pop("counterexamples"))
        except (SizeLimit, NotATree, ConfigError, NonCommutingOnCell) as exc:
            rec = {"passed": False, "error": str(exc), "error_type": type(exc).__name__}
        rec["index"] = t
        trial_records.append(rec)
    passed = sum(1 for r in trial_records if r["passed"])
    summary = {
        "trials": trials,
        "passed": passed,
        "failed": trials - passed,
        "counterexamples_found": len(counterexamples),
        "bad_characteristic_trials": sum(
            1 for r in trial_records if r.get("bad_characteristic")
        ),
    }
    mandatory_ok = passed == trials
    if campaign == "fuzz" and config.get("require_counterexample", True):
        mandatory_ok = mandatory_ok and counterexamples
    report = {
        "schema": REPORT_SCHEMA,
        "campaign": campaign,
        "seed": seed,
        "config": config,
        "config_hash": content_hash(config),
        "model_notes": list(MODEL_NOTES),
        "trials": trial_records,
        "summary": summary,
        "counterexamples": counterexamples,
        "all_mandatory_passed": bool(mandatory_ok),
        "timing": {"wall_clock_seconds": round(time.perf_counter() - started, 3)},
    }
    return report


def report_without_timing(report: dict) -> dict:
    out = dict(report)
    out.pop("timing", None)
    return out


def report_bytes(report: dict) -> bytes:
    """Canonical bytes of a report with timing stripped (determinism contract)."""
    return canonical_json(report_without_timing(report)).encode("utf-8")
