"""Property batteries over constructed geometries, collected into reports.

Each check yields a :class:`CheckResult` with a status (pass, fail or
skipped), the measured values, and on failure a concrete counterexample.
Reports serialize as JSON lines and carry a hash of the instance so a result
can be matched to the geometry file it came from.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import config
from .errors import GeoforgeError, HypothesisError, ResourceLimitError
from .geometry import (DiagramEntry, Pregeometry, base_corank1_counts, base_residue,
                       common_neighbors, components, count_chambers, chambers,
                       is_chamber, is_complete_bipartite, is_connected, isomorphic_rank2,
                       model_geometry, rank2_params, residue, truncation,
                       unextendable_flag, degree_sequences)
from .perm import generates_whole

PASS, FAIL, SKIP = "pass", "fail", "skipped"


@dataclass
class CheckResult:
    name: str
    status: str
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"check": self.name, "status": self.status, "detail": _plain(self.detail),
                "seconds": round(self.seconds, 4)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


@dataclass
class VerificationReport:
    instance: dict
    instance_hash: str = ""
    checks: list = field(default_factory=list)

    def extend(self, results: Sequence[CheckResult]):
        self.checks.extend(results)

    def failures(self, strict: bool = False) -> list[CheckResult]:
        bad = {FAIL, SKIP} if strict else {FAIL}
        return [c for c in self.checks if c.status in bad]

    def ok(self, strict: bool = False) -> bool:
        return not self.failures(strict)

    def status_of(self, name: str) -> str | None:
        for c in self.checks:
            if c.name == name:
                return c.status
        return None

    def get(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_jsonl(self) -> str:
        lines = []
        for c in sorted(self.checks, key=lambda c: c.name):
            row = c.to_json()
            row["instance_hash"] = self.instance_hash
            row["instance"] = self.instance
            lines.append(json.dumps(row, sort_keys=True))
        return "\n".join(lines)

    def summary(self) -> str:
        width = max((len(c.name) for c in self.checks), default=10)
        out = []
        for c in sorted(self.checks, key=lambda c: c.name):
            note = ""
            if c.status != PASS:
                note = "  " + json.dumps(_plain(c.detail))[:200]
            out.append(f"{c.status.upper():7s} {c.name:{width}s} {c.seconds:8.2f}s{note}")
        nf = len([c for c in self.checks if c.status == FAIL])
        ns = len([c for c in self.checks if c.status == SKIP])
        out.append(f"{len(self.checks)} checks, {nf} failed, {ns} skipped")
        return "\n".join(out)


def _timed(name: str, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        status, detail = fn()
    except ResourceLimitError as exc:
        status, detail = SKIP, {"reason": str(exc)}
    except HypothesisError as exc:
        status, detail = FAIL, {"reason": str(exc)}
    return CheckResult(name, status, detail, time.perf_counter() - t0)


def instance_hash(geo: Pregeometry) -> str:
    """sha256 over types, sizes, sorted edges (or orbit generators), group and chamber."""
    h = hashlib.sha256()
    h.update(json.dumps({"types": list(geo.types), "sizes": {str(k): v for k, v in geo.sizes.items()}},
                        sort_keys=True).encode())
    for key in sorted(geo.relations):
        rel = geo.relations[key]
        h.update(repr(key).encode())
        if rel.explicit:
            h.update(np.ascontiguousarray(rel._keys).tobytes())
        else:
            h.update(f"orbit:{rel.x}:{rel.y}".encode())
    att = geo.attached
    if att is not None:
        for t in att.types:
            for g in att.actions[t]:
                h.update(np.ascontiguousarray(g).tobytes())
        h.update(json.dumps({str(k): v for k, v in att.chamber.items()}, sort_keys=True).encode())
    return h.hexdigest()


def _el(e):
    return [e[0], int(e[1]) + 1]


def _flag_json(flag):
    return [_el(e) for e in flag]


# ---------------------------------------------------------------------------
# class C conditions
# ---------------------------------------------------------------------------

def _need_group(geo: Pregeometry):
    if geo.attached is None:
        raise HypothesisError("no group attached")
    return geo.attached


def verify_c_class(geo: Pregeometry) -> list[CheckResult]:
    att = _need_group(geo)

    def vertex():
        detail = {}
        for t in geo.types:
            orb = att.orbit_in_type(att.group, (t, att.chamber[t]))
            detail[str(t)] = int(orb.size)
            if orb.size != geo.sizes[t]:
                missing = int(np.setdiff1d(np.arange(geo.sizes[t]), orb)[0])
                return FAIL, {"type": t, "orbit": int(orb.size), "size": geo.sizes[t],
                              "outside_orbit": _el((t, missing))}
        return PASS, {"orbit_sizes": detail}

    def incidence():
        detail = {}
        for s, t in itertools.combinations(geo.types, 2):
            xs = (s, att.chamber[s])
            nb = np.sort(geo.neighbors(xs, t))
            orb = att.orbit_in_type(att.stabilizer([xs]), (t, att.chamber[t]))
            detail[f"{s}-{t}"] = int(orb.size)
            if not np.array_equal(orb, nb):
                extra = np.setdiff1d(nb, orb)
                return FAIL, {"pair": [s, t], "neighbours": int(nb.size), "stabilizer_orbit": int(orb.size),
                              "incident_pair_outside_orbit": [_el(xs), _el((t, int(extra[0])))] if extra.size else None}
        return PASS, {"stabilizer_orbit_sizes": detail}

    def chamber():
        K = att.chamber_flag()
        for e, f in itertools.combinations(K, 2):
            if not geo.incident(e, f):
                return FAIL, {"non_incident": [_el(e), _el(f)]}
        return PASS, {"base_chamber": _flag_json(K)}

    def connected():
        detail = {}
        for s, t in itertools.combinations(geo.types, 2):
            comps = components(truncation(geo, [s, t]), limit=2)
            detail[f"{s}-{t}"] = len(comps) == 1
            if len(comps) > 1:
                return FAIL, {"pair": [s, t], "components_witness": [_el(comps[0][0]), _el(comps[1][0])]}
        return PASS, {"pairs": detail}

    return [_timed("c-class.vertex-transitive", vertex),
            _timed("c-class.incidence-transitive", incidence),
            _timed("c-class.chamber", chamber),
            _timed("c-class.rank2-connected", connected)]


# ---------------------------------------------------------------------------
# flag-transitivity
# ---------------------------------------------------------------------------

def recursive_flag_check(geo: Pregeometry) -> tuple[str, dict]:
    """Type by type, G_(Q) must be transitive on the common neighbours of Q in the next type.

    Q runs over all subsets of the base chamber's earlier elements (Q empty is
    vertex-transitivity).  Together with incidence-transitivity this proves
    that the geometry axiom holds and that G is flag-transitive.
    """
    att = _need_group(geo)
    K = dict(att.chamber)
    types = geo.types
    if not is_chamber(geo, att.chamber_flag()):
        return FAIL, {"reason": "base chamber is not a chamber"}
    results = []
    for k in range(len(types)):
        t = types[k]
        earlier = types[:k]
        for r in range(0, k + 1):
            for Q in itertools.combinations(earlier, r):
                flag = [(s, K[s]) for s in Q]
                target = common_neighbors(geo, flag, t)
                grp = att.stabilizer(flag) if flag else att.group
                orb = att.orbit_in_type(grp, (t, K[t]))
                ok = np.array_equal(orb, target)
                row = {"type": t, "Q": [_el(e) for e in flag], "target": int(target.size),
                       "orbit": int(orb.size)}
                results.append(row)
                if not ok:
                    outside = np.setdiff1d(target, orb)
                    row["unreached"] = _el((t, int(outside[0]))) if outside.size else None
                    return FAIL, {"failed": row, "checked": len(results)}
    return PASS, {"checked": len(results), "cases": results}


def direct_flag_check(geo: Pregeometry, budget: int | None = None) -> tuple[str, dict]:
    """Chamber orbit of the base chamber against the total chamber count."""
    att = _need_group(geo)
    total = count_chambers(geo, budget)
    limit = config.flag_budget() if budget is None else budget
    if total > limit:
        raise ResourceLimitError(f"{total} chambers exceed the budget {limit}")
    K = att.chamber_flag()
    pts = tuple(att.point(e) for e in K)
    orb = att.group.orbit(pts)
    if len(orb) == total:
        return PASS, {"chambers": total, "orbit": len(orb)}
    inside = orb.index
    for ch in chambers(geo, budget):
        key = tuple(att.point(e) for e in ch)
        if key not in inside:
            return FAIL, {"chambers": total, "orbit": len(orb),
                          "witness": [_flag_json(K), _flag_json(ch)]}
    return FAIL, {"chambers": total, "orbit": len(orb)}


def verify_flag_transitive(geo: Pregeometry, strategy: str = "both",
                           budget: int | None = None) -> list[CheckResult]:
    out = []
    if strategy in ("both", "recursive"):
        out.append(_timed("flag-transitive.recursive", lambda: recursive_flag_check(geo)))
    if strategy in ("both", "direct"):
        out.append(_timed("flag-transitive.direct", lambda: direct_flag_check(geo, budget)))
    ran = [c for c in out if c.status != SKIP]
    if len(ran) == 2:
        agree = ran[0].status == ran[1].status
        out.append(CheckResult("flag-transitive.agree", PASS if agree else FAIL,
                               {s.name: s.status for s in ran}))
    if ran and all(c.status == PASS for c in ran):
        geo.attached.flag_transitive = True
    elif any(c.status == FAIL for c in ran):
        geo.attached.flag_transitive = False
    return out


def verify_geometry(geo: Pregeometry, budget: int | None = None) -> list[CheckResult]:
    """Every flag extends to a chamber: exhaustive, or via the recursive orbit test when too large."""

    def run():
        try:
            bad = unextendable_flag(geo, budget)
        except ResourceLimitError as exc:
            if geo.attached is None:
                raise
            status, detail = recursive_flag_check(geo)
            if status == PASS:
                geo.attached.flag_transitive = True
                return PASS, {"method": "recursive flag-transitivity", "budget": str(exc)}
            return SKIP, {"reason": str(exc), "recursive": status}
        if bad is None:
            return PASS, {"method": "exhaustive"}
        return FAIL, {"method": "exhaustive", "unextendable_flag": _flag_json(bad)}

    return [_timed("geometry", run)]


# ---------------------------------------------------------------------------
# thickness and connectivity
# ---------------------------------------------------------------------------

def _ensure_flag_transitive(geo: Pregeometry):
    att = _need_group(geo)
    if att.flag_transitive is None:
        status, _ = recursive_flag_check(geo)
        att.flag_transitive = status == PASS
    if not att.flag_transitive:
        raise HypothesisError("the attached group is not flag-transitive")


def verify_thick(geo: Pregeometry) -> list[CheckResult]:
    def run():
        _ensure_flag_transitive(geo)
        counts = base_corank1_counts(geo)
        low = min(counts.values())
        detail = {"corank1_chamber_counts": {str(t): c for t, c in counts.items()}, "min": low}
        if low >= 3:
            return PASS, detail
        t = min(counts, key=counts.get)
        K = geo.attached.chamber_flag()
        detail["thin_flag"] = _flag_json([e for e in K if e[0] != t])
        return FAIL, detail

    return [_timed("thick", run)]


def verify_connected(geo: Pregeometry) -> list[CheckResult]:
    """Each rank-2 truncation: BFS verdict and the joint-generation verdict must agree."""
    att = _need_group(geo)
    out = []
    for s, t in itertools.combinations(geo.types, 2):
        def run(s=s, t=t):
            comps = components(truncation(geo, [s, t]), limit=2)
            bfs = len(comps) == 1
            ga = att.stabilizer([(s, att.chamber[s])]).generators
            gb = att.stabilizer([(t, att.chamber[t])]).generators
            gen = generates_whole(att.group, ga, gb)
            detail = {"bfs": bfs, "joint_generation": gen}
            if not bfs:
                detail["components_witness"] = [_el(comps[0][0]), _el(comps[1][0])]
            return (PASS if bfs and gen else FAIL), detail
        out.append(_timed(f"connected.{s}-{t}", run))
    return out


def verify_thick_connected(geo: Pregeometry) -> list[CheckResult]:
    return verify_thick(geo) + verify_connected(geo)


def verify_structure(geo: Pregeometry) -> list[CheckResult]:
    """Structural witnesses for the group: order, primitivity, point-stabilizer order."""
    att = _need_group(geo)

    def run():
        if not att.is_uniform:
            raise ResourceLimitError("structure report only for uniform actions")
        G = att.group
        wit = G.block_witness()
        t0 = geo.types[0]
        detail = {"degree": G.degree, "order": G.order(),
                  "point_stabilizer_order": att.stabilizer([(t0, att.chamber[t0])]).order(),
                  "primitive": wit is None}
        if wit is not None:
            detail["block"] = [x + 1 for x in wit[:20]]
        return (PASS if wit is None else FAIL), detail

    return [_timed("structure.primitive", run)]


# ---------------------------------------------------------------------------
# diagrams
# ---------------------------------------------------------------------------

def diagram_entries(geo: Pregeometry, pairs=None) -> list[DiagramEntry]:
    from .geometry import basic_diagram
    return basic_diagram(geo, require_verified=False, pairs=pairs)


def verify_diagram(geo: Pregeometry) -> list[CheckResult]:
    def run():
        att = _need_group(geo)
        if att.flag_transitive is None:
            status, _ = recursive_flag_check(geo)
            att.flag_transitive = status == PASS
        entries = diagram_entries(geo)
        bad = [e for e in entries if not e.connected]
        detail = {"entries": [e.to_json() for e in entries],
                  "edges": sorted([list(e.pair) for e in entries if e.is_edge])}
        if bad:
            # not a failure: class C only asks for connected truncations
            detail["disconnected_residues"] = [list(e.pair) for e in bad]
        return PASS, detail

    out = [_timed("diagram.basic", run)]
    spec = geo.meta.get("spec") or {}
    if spec.get("family") == "pa":
        b = spec["rank"]
        if b >= 3:
            from .actions import component_from_descriptor
            H = component_from_descriptor(spec["component"])
            out.extend(verify_diagram_pa(spec["n"], b, H, geo))
        else:
            out.append(CheckResult("diagram.pa-prediction", SKIP,
                                   {"reason": "prediction is ambiguous for b < 3; measured params only"}))
    return out


def pa_prediction(n: int, b: int, delta: int) -> dict:
    """Predicted rank-2 residue for each type pair of the PA family (b >= 3).

    Values are (kind, a, b, m, delta) for model geometries or ("K", n1, n2)
    for complete bipartite residues.  m = n - 2b + 6.
    """
    M = n - 2 * b + 6
    pred = {}
    for u, v in itertools.combinations(range(1, b + 1), 2):
        if (u, v) == (1, 2):
            pred[(u, v)] = ("U", 4, 2, M, delta)
        elif (u, v) == (b - 1, b):
            pred[(u, v)] = ("U", 2, 4, M, delta)
        elif (u, v) == (1, b):
            pred[(u, v)] = ("Ubar", 2, 2, M, delta)
        elif v == u + 1:
            pred[(u, v)] = ("U", 2, 4, 6, 1)
        elif u == 1:
            pred[(u, v)] = ("K", delta ** 2 * math.comb(M - 2, 2), 6)
        elif v == b:
            pred[(u, v)] = ("K", 6, delta ** 2 * math.comb(M - 2, 2))
        else:
            pred[(u, v)] = ("K", 6, 6)
    return pred


def closed_form_params(kind: str, a: int, b: int, m: int, delta: int) -> tuple | None:
    """Displayed diagram decorations: (n1, n2, s1, s2, d1, d2, g)."""
    C = math.comb
    if kind == "U" and (a, b) == (2, 4) and (m, delta) == (6, 1):
        return (15, 15, 5, 5, 3, 3, 2)
    if kind == "U" and (a, b) == (2, 4):
        return (C(m, 2) * delta ** 2, C(m, 4) * delta ** 4, C(m - 2, 2) * delta ** 2 - 1, 5, 4, 4, 2)
    if kind == "U" and (a, b) == (4, 2):
        return (C(m, 4) * delta ** 4, C(m, 2) * delta ** 2, 5, C(m - 2, 2) * delta ** 2 - 1, 4, 4, 2)
    if kind == "Ubar" and (a, b) == (2, 2):
        n1 = C(m, 2) * delta ** 2
        s = C(m - 2, 2) * delta ** 2 - 1
        return (n1, n1, s, s, 3, 3, 2)
    return None


def verify_diagram_pa(n: int, b: int, H, geo: Pregeometry | None = None,
                      iso_limit: int = 2000) -> list[CheckResult]:
    """Compare every base co-rank-2 residue of PA{H, n, b} with the predicted model."""
    if b < 3:
        return [CheckResult("diagram.pa-prediction", SKIP,
                            {"reason": "prediction is ambiguous for b < 3; measured params only"})]
    if geo is None:
        from .construct import FamilySpec, build_family
        geo = build_family(FamilySpec("pa", n=n, rank=b, component=H.descriptor))
    delta = H.degree - 1
    pred = pa_prediction(n, b, delta)
    out = []
    for (u, v), p in sorted(pred.items()):
        def run(u=u, v=v, p=p):
            res = base_residue(geo, (u, v))
            detail = {"predicted": list(p[:1]) + [int(x) for x in p[1:]],
                      "sizes": [res.sizes[u], res.sizes[v]]}
            if p[0] == "K":
                cb = is_complete_bipartite(res)
                detail["complete_bipartite"] = cb
                ok = cb and (res.sizes[u], res.sizes[v]) == (p[1], p[2])
                return (PASS if ok else FAIL), detail
            kind, a, bb, m, dl = p
            model = model_geometry(kind, a, bb, m, dl)
            measured = rank2_params(res)
            expected = rank2_params(model)
            closed = closed_form_params(kind, a, bb, m, dl)
            detail.update(measured=list(measured.as_tuple()), model=list(expected.as_tuple()),
                          closed_form=list(closed) if closed else None,
                          complete_bipartite=is_complete_bipartite(res))
            ok = measured.as_tuple() == expected.as_tuple() and not detail["complete_bipartite"]
            ok = ok and degree_sequences(res) == degree_sequences(model)
            if closed is not None:
                ok = ok and tuple(closed) == measured.as_tuple()
            if res.num_elements() <= iso_limit:
                iso = isomorphic_rank2(res, model)
                detail["isomorphic"] = iso
                ok = ok and iso
            return (PASS if ok else FAIL), detail
        out.append(_timed(f"diagram.pa.{u}-{v}", run))
    return out


# ---------------------------------------------------------------------------
# HA bound
# ---------------------------------------------------------------------------

def verify_ha_bound(geo: Pregeometry) -> list[CheckResult]:
    spec = geo.meta.get("spec") or {}
    comp = spec.get("component") or {}
    if spec.get("family") != "pa" or comp.get("kind") != "agl":
        return [CheckResult("ha-bound", SKIP, {"reason": "instance is not built from an affine component"})]

    def run():
        att = _need_group(geo)
        d = spec["n"] * int(comp.get("d", 1))
        K = att.chamber_flag()
        orders = [att.group.order()]
        for k in range(1, len(K) + 1):
            orders.append(att.stabilizer(K[:k]).order())
        decreasing = all(x > y for x, y in zip(orders, orders[1:]))
        detail = {"rank": geo.rank, "d": d, "p": comp.get("p"), "bound": d + 1,
                  "stabilizer_chain_orders": orders, "strictly_decreasing": decreasing}
        return (PASS if geo.rank <= d + 1 and decreasing else FAIL), detail

    return [_timed("ha-bound", run)]


# ---------------------------------------------------------------------------
# diagonal (SD) battery
# ---------------------------------------------------------------------------

def index_sets_exhaustive(n: int, q: int = 3) -> dict:
    """All x in Delta^n, |Delta| = q, all ordered (alpha, beta), all i < j <= n, a > j.

    x lies in both Lambda_i and Lambda_j exactly when
    non_alpha[1,l] + non_beta[l+1,n] + l takes the same value a for l = i, j;
    the claim is then that entries i+1..j are alpha.
    """
    X = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int8)
    cases = 0
    hits = 0
    for alpha in range(q):
        na = np.zeros((X.shape[0], n + 1), dtype=np.int16)
        na[:, 1:] = np.cumsum(X != alpha, axis=1)  # non_alpha[1,l]
        for beta in range(q):
            nbv = np.zeros((X.shape[0], n + 1), dtype=np.int16)
            rev = np.cumsum((X != beta)[:, ::-1], axis=1)[:, ::-1]
            nbv[:, :n] = rev  # nbv[:, l] = non_beta[l+1, n]
            S = na + nbv + np.arange(n + 1, dtype=np.int16)  # = a when x in Lambda_l
            for i in range(1, n):
                for j in range(i + 1, n + 1):
                    both = (S[:, i] == S[:, j]) & (S[:, j] > j)
                    cases += 1
                    if not both.any():
                        continue
                    hits += int(both.sum())
                    seg = X[both][:, i:j]
                    bad = np.flatnonzero((seg != alpha).any(axis=1))
                    if bad.size:
                        x = X[both][bad[0]]
                        return {"violation": {"x": (x + 1).tolist(), "alpha": alpha + 1, "beta": beta + 1,
                                              "i": i, "j": j, "a": int(S[both][bad[0], i])},
                                "cases": cases}
    return {"violation": None, "cases": cases, "tuples_in_both": hits, "n": n, "q": q}


def verify_sd_battery(ns: Sequence[int] = (9, 13), samples: int = 10_000, seed: int = 20240601,
                      exhaustive_max_n: int = 10, uniqueness_samples: int = 2_000,
                      m: int = 5) -> list[CheckResult]:
    from .diagonal import SdSystem, mul

    out = []

    def exhaustive():
        rows = []
        for n in range(2, exhaustive_max_n + 1):
            res = index_sets_exhaustive(n)
            rows.append({"n": n, "index_label_cases": res["cases"], "tuples_in_both": res.get("tuples_in_both")})
            if res["violation"] is not None:
                return FAIL, {"violation": res["violation"], "n": n}
        return PASS, {"delta": 3, "max_n": exhaustive_max_n, "per_n": rows, "violations": 0}

    out.append(_timed("sd.index-sets-exhaustive", exhaustive))

    for n in ns:
        system = SdSystem(n=n, m=m)
        elems = system.elements
        pairs = [(s, a) for a in range(2, (n - 1) // 4 + 1) for s in range(1, a)]

        def rep_checks(n=n, system=system, pairs=pairs):
            rng = np.random.Generator(np.random.Philox(seed + n))
            per = {}
            for s, a in pairs:
                for _ in range(samples):
                    t = elems[int(rng.integers(len(elems)))]
                    sigma = rng.permutation(n).tolist()
                    rep = system.rep(s, a, t, sigma)
                    direct = system.image_of_seed(a, s, t, sigma)
                    supp = system.support(rep)
                    cnt = sum(1 for x in rep[:2 * s] if x != system.alpha) + \
                        sum(1 for x in rep[2 * s:] if x != system.one)
                    same = system.canonicalize(rep) == system.canonicalize(direct)
                    if supp > 2 * a or cnt != 2 * a - 2 * s or not same:
                        return FAIL, {"s": s, "a": a, "t": system.T.to_json(t),
                                      "sigma": [k + 1 for k in sigma], "support": supp,
                                      "count": cnt, "in_image_coset": same}
                per[f"s={s},a={a}"] = samples
            return PASS, {"T": system.descriptor, "n": n, "samples": per, "rng": "philox",
                          "seed": seed + n, "violations": 0}

        out.append(_timed(f"sd.rep-n{n}", rep_checks))

        def uniqueness(n=n, system=system, pairs=pairs):
            rng = np.random.Generator(np.random.Philox(seed + 1000 + n))
            found = 0
            for k in range(uniqueness_samples):
                if k % 2 == 0 and pairs:
                    s, a = pairs[int(rng.integers(len(pairs)))]
                    t = elems[int(rng.integers(len(elems)))]
                    raw = system.rep(s, a, t, rng.permutation(n).tolist())
                else:
                    # random tuple with a random number of identity entries
                    ones = int(rng.integers(n + 1))
                    raw = [system.one if c < ones else elems[int(rng.integers(len(elems)))]
                           for c in rng.permutation(n).tolist()]
                    shift = elems[int(rng.integers(len(elems)))]
                    raw = [mul(shift, x) for x in raw]
                hits = system.small_support_translates(system.canonicalize(raw))
                if len(hits) > 1:
                    return FAIL, {"coset": [system.T.to_json(x) for x in raw], "translates": len(hits)}
                found += len(hits)
            return PASS, {"n": n, "samples": uniqueness_samples, "with_small_rep": found,
                          "seed": seed + 1000 + n, "violations": 0}

        out.append(_timed(f"sd.uniqueness-n{n}", uniqueness))
    return out


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

CHECKS = ("c-class", "geometry", "flag-transitive", "thick", "connected", "diagram",
          "ha-bound", "sd-battery", "structure")


def run_checks(geo: Pregeometry | None, checks: Sequence[str], instance: dict,
               strategy: str = "both", budget: int | None = None, jobs: int = 1,
               sd_params: dict | None = None) -> VerificationReport:
    """Run the named batteries; results are ordered by check name."""
    checks = list(dict.fromkeys(checks))
    for c in checks:
        if c not in CHECKS:
            raise ValueError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    report = VerificationReport(instance, instance_hash(geo) if geo is not None else "")
    if geo is not None and geo.attached is None and any(c != "geometry" and c != "sd-battery" for c in checks):
        raise HypothesisError("the geometry has no attached group")

    # flag-transitivity first: thickness and the diagram depend on it
    ordered = sorted(checks, key=lambda c: 0 if c == "flag-transitive" else 1)
    tasks = []
    for c in ordered:
        if c == "c-class":
            tasks.append(lambda: verify_c_class(geo))
        elif c == "geometry":
            tasks.append(lambda: verify_geometry(geo, budget))
        elif c == "flag-transitive":
            report.extend(verify_flag_transitive(geo, strategy, budget))
        elif c == "thick":
            tasks.append(lambda: verify_thick(geo))
        elif c == "connected":
            tasks.append(lambda: verify_connected(geo))
        elif c == "diagram":
            tasks.append(lambda: verify_diagram(geo))
        elif c == "ha-bound":
            tasks.append(lambda: verify_ha_bound(geo))
        elif c == "structure":
            tasks.append(lambda: verify_structure(geo))
        elif c == "sd-battery":
            tasks.append(lambda: verify_sd_battery(**(sd_params or {})))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(lambda f: f(), tasks):
                report.extend(res)
    else:
        for f in tasks:
            report.extend(f())
    report.checks.sort(key=lambda c: c.name)
    return report
