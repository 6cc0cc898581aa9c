"""Slow reference implementation of the branch minimizations, for tests.

Everything here is recomputed from first principles with plain Python
dictionaries and loops: depth-first enumeration of integer count vectors,
marginals and entropies built from scratch, and the constraint family
written out again by hand.  No solver machinery is shared with the
package, so agreement between the two routes is meaningful evidence.

Candidate sets mirror the engine exactly: every denominator-d count
vector, plus the law-times-channel anchor points with the competitor word
drawn fresh or duplicated (product form for the relaxed variants), each
honestly feasibility-tested with the same marginal tolerance of half a
lattice step and the same equivocation-order tolerance.
"""

import math
from itertools import product

ALPHA_TOL = 1e-10  # decoder-order slack, must match the engine
RATE_TOL = 1e-10   # rate-constraint boundary slack, must match the engine
ZERO_SNAP = 1e-12  # objective values below this are an exact zero


# ---------------------------------------------------------------------------
# branch definitions, written out independently of the package

def _mi_t(a, b, c=()):
    t = lambda v: (v,) if isinstance(v, str) else tuple(v)
    return (t(a), t(b), t(c))


_TEN = (
    ("pair_xy", [_mi_t("X", "Y", "U")], "min3"),
    ("pair_xyt", [_mi_t("X", "YT", "U")], "min3"),
    ("pair_xty", [_mi_t("XT", "Y", "U")], "min3"),
    ("pair_xtyt", [_mi_t("XT", "YT", "U")], "min3"),
    ("triple_x", [_mi_t("X", "Y", "U"), _mi_t("XT", "Y", "U"),
                  _mi_t("XT", "X", ("U", "Y"))], "rx_min4"),
    ("triple_x_alt", [_mi_t("X", "YT", "U"), _mi_t("XT", "YT", "U"),
                      _mi_t("XT", "X", ("U", "YT"))], "rx_min4"),
    ("triple_y", [_mi_t("X", "Y", "U"), _mi_t("X", "YT", "U"),
                  _mi_t("YT", "Y", ("U", "X"))], "ry_min4"),
    ("triple_y_alt", [_mi_t("XT", "Y", "U"), _mi_t("XT", "YT", "U"),
                      _mi_t("YT", "Y", ("U", "XT"))], "ry_min4"),
    ("quad", [_mi_t("X", "Y", "U"), _mi_t("XT", "YT", "U"),
              _mi_t(("XT", "YT"), ("X", "Y"), "U")], "rxy_min5"),
    ("quad_alt", [_mi_t("XT", "Y", "U"), _mi_t("X", "YT", "U"),
                  _mi_t(("X", "YT"), ("XT", "Y"), "U")], "rxy_min5"),
)


def _branch_def(name):
    if name == "X":
        return dict(
            labels=("U", "X", "Y", "XT", "Z"),
            pins=[(("U", "X"), "ux"), (("U", "XT"), "ux"), (("U", "Y"), "uy")],
            cons=[
                ("pair_xy", [_mi_t("X", "Y", "U")], "min3"),
                ("pair_xty", [_mi_t("XT", "Y", "U")], "min3"),
                ("triple_x", [_mi_t("X", "Y", "U"), _mi_t("XT", "Y", "U"),
                              _mi_t("XT", "X", ("U", "Y"))], "rx_min4"),
            ],
            clamp=[_mi_t("XT", ("X", "Z"), ("Y", "U")), _mi_t("XT", "Y", "U")],
            clamp_off="rx",
            alpha=("XT", "Y"),
            anchors=("fresh", "diag"),
        )
    if name == "Y":
        return dict(
            labels=("U", "X", "Y", "YT", "Z"),
            pins=[(("U", "Y"), "uy"), (("U", "YT"), "uy"), (("U", "X"), "ux")],
            cons=[
                ("pair_xy", [_mi_t("X", "Y", "U")], "min3"),
                ("pair_xyt", [_mi_t("X", "YT", "U")], "min3"),
                ("triple_y", [_mi_t("X", "Y", "U"), _mi_t("X", "YT", "U"),
                              _mi_t("YT", "Y", ("U", "X"))], "ry_min4"),
            ],
            clamp=[_mi_t("YT", ("Y", "Z"), ("X", "U")), _mi_t("X", "YT", "U")],
            clamp_off="ry",
            alpha=("X", "YT"),
            anchors=("fresh", "diag"),
        )
    if name == "XY":
        return dict(
            labels=("U", "X", "Y", "XT", "YT", "Z"),
            pins=[(("U", "X"), "ux"), (("U", "XT"), "ux"),
                  (("U", "Y"), "uy"), (("U", "YT"), "uy")],
            cons=list(_TEN),
            clamp=[_mi_t(("XT", "YT"), ("X", "Y", "Z"), "U"),
                   _mi_t("XT", "YT", "U")],
            clamp_off="rxy",
            alpha=("XT", "YT"),
            anchors=("fresh", "diag"),
        )
    raise ValueError(name)


def _baseline_def(name):
    base = dict(labels=("U", "X", "Y", "Z"),
                pins=[(("U", "X"), "ux"), (("U", "Y"), "uy")],
                alpha=None, anchors=("product",))
    if name == "X":
        return dict(base, cons=[("pair_xy", [_mi_t("X", "Y", "U")], "rx3")],
                    clamp=[_mi_t("X", ("Y", "Z"), "U")], clamp_off="rx")
    if name == "Y":
        return dict(base, cons=[("pair_xy", [_mi_t("X", "Y", "U")], "ry3")],
                    clamp=[_mi_t("Y", ("X", "Z"), "U")], clamp_off="ry")
    if name == "XY":
        return dict(base, cons=[("pair_xy", [_mi_t("X", "Y", "U")], "rxy3")],
                    clamp=[_mi_t(("X", "Y"), "Z", "U"), _mi_t("X", "Y", "U")],
                    clamp_off="rxy")
    raise ValueError(name)


def _rhs(kind, rx, ry, delta):
    m = min(rx, ry)
    return {
        "min3": m + 3 * delta,
        "rx_min4": rx + m + 4 * delta,
        "ry_min4": ry + m + 4 * delta,
        "rxy_min5": rx + ry + m + 5 * delta,
        "rx3": rx + 3 * delta,
        "ry3": ry + 3 * delta,
        "rxy3": rx + ry + 3 * delta,
    }[kind]


def _clamp_off(kind, rx, ry):
    return {"rx": rx, "ry": ry, "rxy": rx + ry}[kind]


# ---------------------------------------------------------------------------
# dictionary-based information measures

def _marginal(mass, labels, keep):
    idx = [labels.index(k) for k in keep]
    out = {}
    for cell, p in mass.items():
        if p <= 0.0:
            continue
        key = tuple(cell[i] for i in idx)
        out[key] = out.get(key, 0.0) + p
    return out


def _entropy_of(mass, labels, keep):
    h = 0.0
    for p in _marginal(mass, labels, keep).values():
        if p > 0.0:
            h -= p * math.log2(p)
    return h


def _mi_of(mass, labels, term):
    a, b, c = term
    h_ac = _entropy_of(mass, labels, a + c)
    h_bc = _entropy_of(mass, labels, b + c)
    h_abc = _entropy_of(mass, labels, a + b + c)
    h_c = _entropy_of(mass, labels, c) if c else 0.0
    return h_ac + h_bc - h_abc - h_c


def _divergence(mass, labels, w):
    m4 = _marginal(mass, labels, ("U", "X", "Y", "Z"))
    m3 = _marginal(mass, labels, ("U", "X", "Y"))
    total = 0.0
    for (u, x, y, z), p in m4.items():
        wv = w[x][y][z]
        if wv == 0.0:
            return math.inf
        total += p * math.log2((p / m3[(u, x, y)]) / wv)
    return total


def _objective(mass, labels, spec, w, rx, ry):
    d = _divergence(mass, labels, w)
    if d == math.inf:
        return math.inf
    mi = _mi_of(mass, labels, _mi_t("X", "Y", "U"))
    claw = sum(_mi_of(mass, labels, t) for t in spec["clamp"])
    clamp = max(0.0, claw - _clamp_off(spec["clamp_off"], rx, ry))
    val = max(0.0, d + mi + clamp)
    return 0.0 if val < ZERO_SNAP else val


def _feasible(mass, labels, spec, law_targets, tol, rx, ry, delta):
    for keep, which in spec["pins"]:
        marg = _marginal(mass, labels, keep)
        target = law_targets[which]
        for cell, t in target.items():
            if abs(marg.get(cell, 0.0) - t) > tol:
                return False
        for cell, v in marg.items():
            if cell not in target and v > tol:
                return False
    for _name, terms, kind in spec["cons"]:
        lhs = sum(_mi_of(mass, labels, t) for t in terms)
        if lhs > _rhs(kind, rx, ry, delta) + RATE_TOL:
            return False
    if spec["alpha"] is not None:
        h_zu = _entropy_of(mass, labels, ("Z", "U"))
        a_true = _entropy_of(mass, labels, ("X", "Y", "Z", "U")) - h_zu
        a_comp = _entropy_of(mass, labels, spec["alpha"] + ("Z", "U")) - h_zu
        if a_true < a_comp - ALPHA_TOL:
            return False
    return True


# ---------------------------------------------------------------------------
# candidate enumeration

def _law_targets(law):
    pu, px, py = law
    ux = {}
    uy = {}
    for u, p in enumerate(pu):
        for x, q in enumerate(px[u]):
            ux[(u, x)] = p * q
        for y, q in enumerate(py[u]):
            uy[(u, y)] = p * q
    return {"ux": ux, "uy": uy}


def _sizes(labels, law, w):
    pu, px, py = law
    sx, sy, sz = len(w), len(w[0]), len(w[0][0])
    table = {"U": len(pu), "X": sx, "Y": sy, "XT": sx, "YT": sy, "Z": sz}
    return tuple(table[lab] for lab in labels)


def _anchor_mass(labels, law, w, kind):
    pu, px, py = law
    sizes = _sizes(labels, law, w)
    pos = {lab: i for i, lab in enumerate(labels)}
    mass = {}
    for cell in product(*map(range, sizes)):
        u, x, y = cell[pos["U"]], cell[pos["X"]], cell[pos["Y"]]
        p = pu[u] * px[u][x] * py[u][y]
        if "XT" in pos:
            xt = cell[pos["XT"]]
            p *= (1.0 if xt == x else 0.0) if kind == "diag" else px[u][xt]
        if "YT" in pos:
            yt = cell[pos["YT"]]
            p *= (1.0 if yt == y else 0.0) if kind == "diag" else py[u][yt]
        p *= w[x][y][cell[pos["Z"]]]
        if p > 0.0:
            mass[cell] = p
    return mass


def _enumerate_masses(labels, sizes, d, spec, law_targets):
    """Yield every denominator-d count vector as a mass dict, pruning
    partial assignments that already overrun a pinned marginal."""
    cells = list(product(*map(range, sizes)))
    pin_maps = []
    for keep, which in spec["pins"]:
        idx = [labels.index(k) for k in keep]
        target = law_targets[which]
        upper = {}
        for cell_key, t in target.items():
            u = 0
            for g in range(d + 1):
                if abs(g / d - t) <= 0.5 / d:
                    u = g
            upper[cell_key] = u
        pin_maps.append(([tuple(c[i] for i in idx) for c in cells], upper))
    m = len(cells)
    counts = [0] * m
    running = [dict() for _ in pin_maps]

    def rec(pos, left):
        if pos == m - 1:
            ok = True
            for (keys, upper), run in zip(pin_maps, running):
                k = keys[pos]
                if run.get(k, 0) + left > upper.get(k, -1):
                    ok = False
                    break
            if ok:
                counts[pos] = left
                yield {c: g / d for c, g in zip(cells, counts) if g}
            return
        for g in range(left + 1):
            ok = True
            for (keys, upper), run in zip(pin_maps, running):
                k = keys[pos]
                if run.get(k, 0) + g > upper.get(k, -1):
                    ok = False
                    break
            if not ok:
                continue
            counts[pos] = g
            for (keys, _), run in zip(pin_maps, running):
                k = keys[pos]
                run[k] = run.get(k, 0) + g
            yield from rec(pos + 1, left - g)
            for (keys, _), run in zip(pin_maps, running):
                k = keys[pos]
                run[k] -= g
        counts[pos] = 0

    yield from rec(0, d)


def _minimize(spec, d, rates, w, law, delta):
    rx, ry = rates
    labels = spec["labels"]
    sizes = _sizes(labels, law, w)
    targets = _law_targets(law)
    tol = 0.5 / d
    best = math.inf
    any_feasible = False
    for mass in _enumerate_masses(labels, sizes, d, spec, targets):
        if not _feasible(mass, labels, spec, targets, tol, rx, ry, delta):
            continue
        any_feasible = True
        val = _objective(mass, labels, spec, w, rx, ry)
        if val < best:
            best = val
    for kind in spec["anchors"]:
        mass = _anchor_mass(labels, law, w, kind)
        if _feasible(mass, labels, spec, targets, tol, rx, ry, delta):
            any_feasible = True
            val = _objective(mass, labels, spec, w, rx, ry)
            if val < best:
                best = val
    return best, any_feasible


def oracle_branch_min(branch, d, rates, w, law, delta=0.0):
    """Brute-force minimum of one expurgated branch.

    ``w`` is nested lists w[x][y][z]; ``law`` is (p_u, p_x_given_u,
    p_y_given_u) as nested lists.  Returns (value, any_feasible).
    """
    return _minimize(_branch_def(branch), d, rates, w, law, delta)


def oracle_baseline_min(branch, d, rates, w, law, delta=0.0):
    """Brute-force minimum of one relaxed reference branch."""
    return _minimize(_baseline_def(branch), d, rates, w, law, delta)


def oracle_expurgated(d, rates, w, law, delta=0.0):
    """min over the three expurgated branches."""
    best = math.inf
    for name in ("X", "Y", "XY"):
        val, _ = oracle_branch_min(name, d, rates, w, law, delta)
        best = min(best, val)
    return best
