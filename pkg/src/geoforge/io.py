"""Geometry files (JSON) and diagram export (DOT).

Element references are ``[type, index]`` with 1-based indices.  Group
generators are 1-based cycle strings over the disjoint union of the
type-classes, numbered type by type in type order.  Relations too large to
list are written as the orbit of one incident pair ("incidence_orbits"); they
require every type to carry the same point action.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import AttachmentError, GeoforgeError, ParameterError
from .geometry import (Attachment, DiagramEntry, ExplicitRelation, ListLabels, OrbitRelation,
                       Pregeometry)
from .perm import PermGroup, Permutation

FORMAT = "geoforge-geometry/1"
EXPLICIT_EDGE_LIMIT = 2_000_000


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _type_key(t, types):
    for u in types:
        if str(u) == str(t):
            return u
    raise ParameterError(f"unknown type {t!r}")


def _offsets(geo: Pregeometry) -> tuple[dict, int]:
    offs, total = {}, 0
    for t in geo.types:
        offs[t] = total
        total += geo.sizes[t]
    return offs, total


def geometry_to_json(geo: Pregeometry, edge_limit: int = EXPLICIT_EDGE_LIMIT) -> dict:
    att = geo.attached
    out = {"format": FORMAT, "types": list(geo.types),
           "elements": {str(t): [geo.label((t, i)) for i in range(geo.sizes[t])] for t in geo.types}}
    incidence, orbits = [], []
    for (s, t), rel in sorted(geo.relations.items()):
        lazy = not rel.explicit or rel.num_edges > edge_limit
        if lazy and att is not None and att.is_uniform:
            if rel.explicit:
                x, y = att.chamber[s], att.chamber[t]
                if not rel.contains(np.array([x]), np.array([y]))[0]:
                    raise GeoforgeError(f"base chamber is not incident on types {s},{t}")
            else:
                x, y = rel.x, rel.y
            orbits.append({"types": [s, t], "pair": [[s, int(x) + 1], [t, int(y) + 1]]})
            continue
        a, b = rel.edges()
        incidence.extend([[s, int(i) + 1], [t, int(j) + 1]] for i, j in zip(a.tolist(), b.tolist()))
    out["incidence"] = incidence
    if orbits:
        out["incidence_orbits"] = orbits
    if att is not None:
        offs, total = _offsets(geo)
        gens = []
        for k in range(len(att.actions[geo.types[0]])):
            img = np.concatenate([att.actions[t][k] + offs[t] for t in geo.types])
            gens.append(str(Permutation._wrap(img)))
        out["group"] = {"degree": total, "generators": gens}
        out["base_chamber"] = [[t, att.chamber[t] + 1] for t in geo.types]
    spec = geo.meta.get("spec")
    if spec is not None:
        out["instance"] = spec
    extra = {k: v for k, v in geo.meta.items() if k != "spec"}
    if extra:
        out["meta"] = _plain(extra)
    return out


def _split_generators(obj: dict, geo_types, sizes) -> dict:
    grp = obj["group"]
    total = sum(sizes[t] for t in geo_types)
    if int(grp.get("degree", total)) != total:
        raise ParameterError("group degree differs from the number of elements")
    actions = {t: [] for t in geo_types}
    for text in grp["generators"]:
        img = Permutation.parse(text, total).images
        off = 0
        for t in geo_types:
            part = img[off:off + sizes[t]] - off
            if part.size and (part.min() < 0 or part.max() >= sizes[t]):
                raise AttachmentError(f"generator {text[:40]} does not preserve type {t}")
            actions[t].append(part)
            off += sizes[t]
    return actions


def _uniform_group(actions: dict, types) -> list | None:
    first = actions[types[0]]
    for t in types[1:]:
        if len(actions[t]) != len(first) or any(
                a.size != b.size or not np.array_equal(a, b) for a, b in zip(actions[t], first)):
            return None
    return first


def geometry_from_json(obj: dict, trust_instance: bool = True) -> Pregeometry:
    """Rebuild a pregeometry from its JSON form.

    When the file names a family instance and its incidence and generators
    match a fresh build exactly, the fresh build is returned (it carries the
    known group orders).  Otherwise everything is taken from the file and the
    group order is computed from scratch.  A group that fails the attach check
    is recorded in ``meta["attach_error"]`` instead of raising, so a damaged
    file can still be examined.
    """
    if obj.get("kind") == "sd-symbolic":
        raise ParameterError("an sd-symbolic bundle is not a geometry")
    types = list(obj["types"])
    elements = {_type_key(k, types): v for k, v in obj["elements"].items()}
    sizes = {t: len(elements[t]) for t in types}
    if trust_instance and obj.get("instance"):
        built = _try_instance(obj)
        if built is not None:
            return built
    actions = None
    uniform = None
    if "group" in obj:
        actions = _split_generators(obj, types, sizes)
        uniform = _uniform_group(actions, types)
    rels = {}
    pairs = {}
    for ref_a, ref_b in obj.get("incidence", []):
        s, t = _type_key(ref_a[0], types), _type_key(ref_b[0], types)
        i, j = int(ref_a[1]) - 1, int(ref_b[1]) - 1
        if types.index(s) > types.index(t):
            s, t, i, j = t, s, j, i
        pairs.setdefault((s, t), ([], []))
        pairs[(s, t)][0].append(i)
        pairs[(s, t)][1].append(j)
    for (s, t), (a, b) in pairs.items():
        rels[(s, t)] = ExplicitRelation(sizes[s], sizes[t], np.array(a), np.array(b))
    group = None
    if uniform is not None:
        deg = sizes[types[0]]
        group = PermGroup([Permutation._wrap(g) for g in uniform], deg)
    for orb in obj.get("incidence_orbits", []):
        if group is None:
            raise ParameterError("orbit-defined incidence needs the same point action on every type")
        s, t = _type_key(orb["types"][0], types), _type_key(orb["types"][1], types)
        x, y = int(orb["pair"][0][1]) - 1, int(orb["pair"][1][1]) - 1
        rels[(s, t)] = OrbitRelation(group, x, y)
    labels = {t: ListLabels(elements[t]) for t in types}
    meta = dict(obj.get("meta", {}))
    if obj.get("instance"):
        meta["spec"] = obj["instance"]
    geo = Pregeometry(types, sizes, rels, labels, None, meta)
    if actions is not None:
        chamber = {_type_key(t, types): int(i) - 1 for t, i in obj["base_chamber"]}
        if uniform is not None:
            from .actions import ActionSpace
            space = ActionSpace(group, None, {"kind": "file"}, {})
            att = Attachment.uniform(types, space, chamber, group)
        else:
            att = Attachment(types, actions, chamber)
        try:
            geo.attach(att, check=True)
        except AttachmentError as exc:
            geo.meta["attach_error"] = str(exc)
    return geo


def _try_instance(obj: dict) -> Pregeometry | None:
    from .construct import FamilySpec, build_family
    try:
        spec = FamilySpec.from_json(obj["instance"])
        geo = build_family(spec)
    except (GeoforgeError, ValueError, KeyError, TypeError):
        return None
    if not isinstance(geo, Pregeometry):
        return None
    if "meta" in obj:
        # derived objects (e.g. quotients) are not the instance itself
        if any(k in obj["meta"] for k in ("parts", "quotient_of", "origin")):
            return None
    fresh = geometry_to_json(geo)
    for key in ("types", "incidence", "incidence_orbits", "group", "base_chamber"):
        if _plain(fresh.get(key)) != _plain(obj.get(key)):
            return None
    if {str(k): len(v) for k, v in fresh["elements"].items()} != \
            {str(k): len(v) for k, v in obj["elements"].items()}:
        return None
    return geo


def save_geometry(geo: Pregeometry, path) -> dict:
    obj = geometry_to_json(geo)
    Path(path).write_text(json.dumps(obj, separators=(",", ":")))
    return obj


def load_geometry(path, trust_instance: bool = True) -> Pregeometry:
    obj = json.loads(Path(path).read_text())
    return geometry_from_json(obj, trust_instance)


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------

def diagram_dot(geo: Pregeometry, entries: list[DiagramEntry], name: str = "diagram") -> str:
    """Basic diagram in DOT.

    Edges carry "d1 g d2"; each end is labelled "n/s" for that residue, since
    element counts and orders depend on which residue a type sits in.
    """
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for t in geo.types:
        lines.append(f'  "{t}" [label="{t}"];')
    for e in entries:
        if not e.is_edge:
            continue
        s, t = e.pair
        p = e.params
        if p is None:
            lines.append(f'  "{s}" -- "{t}" [label="disconnected"];')
            continue
        g = p.g if p.g is not None else "-"
        lines.append(f'  "{s}" -- "{t}" [label="{p.d1} {g} {p.d2}", '
                     f'taillabel="{p.n1}/{p.s1}", headlabel="{p.n2}/{p.s2}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def params_table(entries: list[DiagramEntry]) -> str:
    head = f"{'pair':8s} {'edge':5s} {'n1':>8s} {'n2':>8s} {'s1':>6s} {'s2':>6s} {'d1':>3s} {'d2':>3s} {'g':>3s}"
    rows = [head]
    for e in entries:
        pair = f"{e.pair[0]}-{e.pair[1]}"
        if e.params is None:
            rows.append(f"{pair:8s} {'yes':5s} disconnected residue")
            continue
        p = e.params
        edge = "yes" if e.is_edge else "no"
        g = "-" if p.g is None else str(p.g)
        rows.append(f"{pair:8s} {edge:5s} {p.n1:8d} {p.n2:8d} {p.s1:6d} {p.s2:6d} {p.d1:3d} {p.d2:3d} {g:>3s}")
    return "\n".join(rows)
