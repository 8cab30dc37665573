"""Exact rational polyhedral cones.

H-representations are integer inequality/equality rows (a row r constrains
r . v >= 0 or r . v = 0); V-representations are primitive integer extremal
rays plus a lineality basis.  Conversions run the double description
method; projections run either Fourier-Motzkin elimination with Chernikov
pruning or the double-description route (enumerate rays, drop coordinates,
re-extremalize).  Everything is computed in exact integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from ._simplex import conic_combination
from .errors import InvalidParameter

Row = tuple[int, ...]


# -- small integer linear algebra --------------------------------------------

def primitive(vector: Sequence[int | Fraction]) -> Row:
    """Scale to coprime integers, preserving orientation."""
    fracs = [Fraction(v) for v in vector]
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // gcd(denom, f.denominator)
    ints = [int(f * denom) for f in fracs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def sign_canonical(vector: Sequence[int]) -> Row:
    """Primitive form with the first nonzero entry positive (for lines)."""
    vec = primitive(vector)
    for v in vec:
        if v > 0:
            return vec
        if v < 0:
            return tuple(-x for x in vec)
    return vec


def dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def rref(rows: Iterable[Sequence[int]]) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form with primitive integer rows.

    Returns the nonzero rows and their pivot columns; pivots are positive.
    """
    work = [[Fraction(v) for v in row] for row in rows]
    pivots: list[int] = []
    r = 0
    width = len(work[0]) if work else 0
    for c in range(width):
        pivot_row = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        lead = work[r][c]
        work[r] = [v / lead for v in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [v - f * w for v, w in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    out = [primitive(work[i]) for i in range(r)]
    return out, pivots


def nullspace(rows: Sequence[Sequence[int]], dim: int) -> list[Row]:
    """Primitive integer basis of {v : row . v = 0 for all rows}."""
    reduced, pivots = rref(rows)
    free_cols = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * dim
        vec[fc] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            # row has 1 at pc after normalization by primitive(); recover scale
            vec[pc] = -Fraction(row[fc], row[pc])
        basis.append(primitive(vec))
    return basis


def reduce_mod_span(vector: Sequence[int], basis_rref: Sequence[Row],
                    pivots: Sequence[int]) -> Row:
    """Canonical representative of a vector modulo the row span of a basis."""
    vec = [Fraction(v) for v in vector]
    for row, pc in zip(basis_rref, pivots):
        if vec[pc] != 0:
            f = vec[pc] / row[pc]
            vec = [v - f * w for v, w in zip(vec, row)]
    return primitive(vec)


# -- representations -----------------------------------------------------------

@dataclass(frozen=True)
class HRep:
    """Cone as {v : E v = 0, A v >= 0} with integer rows."""

    dimension: int
    equalities: tuple[Row, ...] = ()
    inequalities: tuple[Row, ...] = ()
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidParameter("dimension must be positive")
        eqs = tuple(primitive(r) for r in self.equalities if any(r))
        ineqs = tuple(primitive(r) for r in self.inequalities if any(r))
        for row in (*eqs, *ineqs):
            if len(row) != self.dimension:
                raise InvalidParameter("row length must equal the dimension")
        object.__setattr__(self, "equalities", eqs)
        object.__setattr__(self, "inequalities", ineqs)
        if self.labels is not None and len(self.labels) != self.dimension:
            raise InvalidParameter("labels must match the dimension")


@dataclass(frozen=True)
class VRep:
    """Cone as conic hull of rays plus the span of lineality vectors."""

    dimension: int
    rays: tuple[Row, ...] = ()
    lineality: tuple[Row, ...] = ()
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidParameter("dimension must be positive")
        for row in (*self.rays, *self.lineality):
            if len(row) != self.dimension:
                raise InvalidParameter("vector length must equal the dimension")


# -- double description --------------------------------------------------------

def _insertion_order(rows: Sequence[Row]) -> list[Row]:
    return sorted(set(rows), key=lambda r: (sum(1 for v in r if v), r))


def _dd_pointed_with_lineality(dim: int, rows: Sequence[Row]) -> tuple[list[Row], list[Row]]:
    """Core double-description pass over inequality rows only.

    Maintains a lineality basis B and extremal rays R of the cone cut out
    by the rows processed so far (initially the whole space).  Rays carry
    bitmasks of the processed rows they satisfy with equality; adjacency
    uses the standard combinatorial test on those masks, with a popcount
    prefilter (a pair needs at least dim - |B| - 2 common tight rows).
    """
    basis: list[Row] = [tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)]
    rays: list[tuple[Row, int]] = []
    ordered = _insertion_order(rows)
    for t, a in enumerate(ordered):
        bit = 1 << t
        prev_mask = bit - 1
        vals_b = [dot(a, b) for b in basis]
        pivot = next((i for i, v in enumerate(vals_b) if v != 0), None)
        if pivot is not None:
            b0 = basis[pivot]
            if vals_b[pivot] < 0:
                b0 = tuple(-v for v in b0)
            a_b0 = abs(vals_b[pivot])
            new_basis = []
            for i, b in enumerate(basis):
                if i == pivot:
                    continue
                if vals_b[i] == 0:
                    new_basis.append(b)
                else:
                    # b0 is already flipped so that a . b0 = a_b0 > 0
                    new_basis.append(sign_canonical(
                        tuple(a_b0 * x - vals_b[i] * y for x, y in zip(b, b0))))
            new_rays = []
            for r, z in rays:
                a_r = dot(a, r)
                if a_r == 0:
                    new_rays.append((r, z | bit))
                else:
                    adj = primitive(tuple(a_b0 * x - a_r * y for x, y in zip(r, b0)))
                    new_rays.append((adj, z | bit))
            new_rays.append((primitive(b0), prev_mask))
            basis = new_basis
            rays = new_rays
            continue
        # lineality untouched: split rays by sign
        pos: list[tuple[Row, int, int]] = []
        zero: list[tuple[Row, int]] = []
        neg: list[tuple[Row, int, int]] = []
        for r, z in rays:
            v = dot(a, r)
            if v > 0:
                pos.append((r, z, v))
            elif v < 0:
                neg.append((r, z, v))
            else:
                zero.append((r, z | bit))
        if not neg:
            rays = [(r, z) for r, z, _ in pos] + zero
            continue
        if not pos:
            rays = zero
            continue
        all_masks = [z for _, z in rays]
        min_common = dim - len(basis) - 2
        combined: dict[Row, int] = {}
        for rp, zp, vp in pos:
            for rn, zn, vn in neg:
                meet = zp & zn
                if min_common > 0 and _popcount_mask(meet) < min_common:
                    continue
                if not _adjacent(meet, zp, zn, all_masks):
                    continue
                w = primitive(tuple(vp * x - vn * y for x, y in zip(rn, rp)))
                combined.setdefault(w, meet | bit)
        rays = [(r, z) for r, z, _ in pos] + zero + list(combined.items())
    ray_vectors = [r for r, _ in rays]
    return ray_vectors, basis


def _popcount_mask(mask: int) -> int:
    return bin(mask).count("1")


def _adjacent(meet: int, zp: int, zn: int, all_masks: Sequence[int]) -> bool:
    for z in all_masks:
        if z == zp or z == zn:
            continue
        if meet & z == meet:
            return False
    return True


def enumerate_rays(h: HRep) -> VRep:
    """All extremal rays of the cone, primitive and lexicographically sorted.

    Equalities are removed first by substituting a basis of their solution
    space; any lineality remaining in the inequality system is reported
    explicitly rather than folded into rays.  Rays are canonicalized
    modulo the lineality span so outputs are deterministic.
    """
    if h.equalities:
        sub_basis = nullspace(h.equalities, h.dimension)
        if not sub_basis:
            return VRep(h.dimension, (), (), h.labels)
        reduced_rows = []
        for a in h.inequalities:
            row = tuple(dot(a, b) for b in sub_basis)
            if any(row):
                reduced_rows.append(primitive(row))
        rays_red, lin_red = _dd_pointed_with_lineality(len(sub_basis), reduced_rows)
        lift = lambda u: primitive(
            tuple(sum(u[i] * b[j] for i, b in enumerate(sub_basis)) for j in range(h.dimension)))
        rays = [lift(u) for u in rays_red]
        lineality = [lift(u) for u in lin_red]
    else:
        rays, lineality = _dd_pointed_with_lineality(h.dimension, h.inequalities)
    lin_rref, pivots = rref(lineality)
    canon = sorted({reduce_mod_span(r, lin_rref, pivots) for r in rays} - {tuple([0] * h.dimension)})
    return VRep(h.dimension, tuple(canon), tuple(lin_rref), h.labels)


def facets_from_rays(v: VRep) -> HRep:
    """Minimal H-representation of the conic hull via polar duality.

    The polar cone of cone(rays) + span(lineality) is cut out by the rays
    as inequality rows and the lineality as equality rows, so one double
    description pass yields the facets (polar rays) and the equality space
    (polar lineality) at once.
    """
    polar = HRep(v.dimension, equalities=v.lineality, inequalities=v.rays)
    polar_v = enumerate_rays(polar)
    return HRep(v.dimension, equalities=polar_v.lineality,
                inequalities=polar_v.rays, labels=v.labels)


def remove_redundancies(h: HRep, certificates: bool = False):
    """Irredundant H-representation of the same cone.

    Runs the double-description dual pass, which canonicalizes the facet
    set and the equality space.  With ``certificates`` each input row is
    expressed as a nonnegative rational combination of the kept rows (plus
    arbitrary combinations of the kept equalities), witnessing soundness.
    """
    minimal = facets_from_rays(enumerate_rays(h))
    if not certificates:
        return minimal
    certs = []
    ineqs = list(minimal.inequalities)
    frees = list(minimal.equalities)
    for row in (*h.equalities, *h.inequalities):
        combo = conic_combination(ineqs, frees, row)
        certs.append(combo)
    return minimal, certs


def membership(cone: HRep | VRep, vector: Sequence[int | Fraction]) -> bool:
    """Exact test whether a rational vector lies in the cone."""
    vec = [Fraction(v) for v in vector]
    if len(vec) != cone.dimension:
        raise InvalidParameter("vector dimension mismatch")
    if isinstance(cone, HRep):
        return (all(_dot_frac(row, vec) == 0 for row in cone.equalities)
                and all(_dot_frac(row, vec) >= 0 for row in cone.inequalities))
    target = primitive(vec) if any(vec) else tuple([0] * cone.dimension)
    if not any(target):
        return True
    return conic_combination(cone.rays, cone.lineality, target) is not None


def _dot_frac(row: Sequence[int], vec: Sequence[Fraction]) -> Fraction:
    return sum(Fraction(a) * b for a, b in zip(row, vec))


def contains(outer: HRep | VRep, inner: HRep | VRep) -> bool:
    """Whether every point of ``inner`` lies in ``outer``."""
    if outer.dimension != inner.dimension:
        raise InvalidParameter("cone dimensions differ")
    inner_v = inner if isinstance(inner, VRep) else enumerate_rays(inner)
    if isinstance(outer, VRep):
        outer_h = facets_from_rays(outer)
    else:
        outer_h = outer
    for ray in inner_v.rays:
        if not membership(outer_h, ray):
            return False
    for line in inner_v.lineality:
        if not membership(outer_h, line) or not membership(outer_h, [-v for v in line]):
            return False
    return True


def cones_equal(a: HRep | VRep, b: HRep | VRep) -> bool:
    """Mutual containment of two cones, exact."""
    return contains(a, b) and contains(b, a)


# -- Fourier-Motzkin elimination ------------------------------------------------

@dataclass
class _FMRow:
    vector: Row
    ancestry: int  # bitmask over original inequality indices


def fm_eliminate(h: HRep, coords: Iterable[int]) -> HRep:
    """Project the cone by eliminating the given coordinate positions.

    Coordinates are eliminated one at a time, preferring substitution via
    an equality row when one involves the coordinate, otherwise combining
    positive and negative rows.  Intermediate growth is controlled by
    primitive-form deduplication and the Chernikov ancestry rules (count
    bound and ancestry-superset drop); the final system is minimized by
    the double-description dual pass.
    """
    targets = sorted(set(coords))
    if not targets:
        return remove_redundancies(h)
    if len(targets) >= h.dimension:
        raise InvalidParameter("cannot eliminate every coordinate")
    for c in targets:
        if not 0 <= c < h.dimension:
            raise InvalidParameter(f"coordinate {c} out of range")

    eqs = [list(r) for r in h.equalities]
    ineqs = [_FMRow(r, 1 << i) for i, r in enumerate(h.inequalities)]
    remaining = set(targets)
    k_pair = 0
    while remaining:
        # prefer coordinates removable by equality substitution
        eq_coords = [c for c in remaining if any(e[c] for e in eqs)]
        if eq_coords:
            c = min(eq_coords)
            pivot = min((e for e in eqs if e[c]), key=lambda e: (sum(1 for v in e if v), e))
            eqs.remove(pivot)
            pc = pivot[c]
            new_eqs = []
            for e in eqs:
                if e[c]:
                    combo = [pc * x - e[c] * y for x, y in zip(e, pivot)]
                    if any(combo):
                        new_eqs.append(list(primitive(combo)))
                else:
                    new_eqs.append(e)
            eqs = new_eqs
            new_ineqs = []
            for row in ineqs:
                if row.vector[c]:
                    combo = [pc * x - row.vector[c] * y for x, y in zip(row.vector, pivot)]
                    if pc < 0:
                        combo = [-v for v in combo]
                    if any(combo):
                        new_ineqs.append(_FMRow(primitive(combo), row.ancestry))
                else:
                    new_ineqs.append(row)
            ineqs = _prune(new_ineqs, k_pair)
            remaining.discard(c)
            continue
        # otherwise pick the cheapest pairing coordinate
        def cost(c: int) -> tuple[int, int]:
            p = sum(1 for r in ineqs if r.vector[c] > 0)
            n = sum(1 for r in ineqs if r.vector[c] < 0)
            return (p * n - p - n, c)

        c = min(remaining, key=cost)
        remaining.discard(c)
        k_pair += 1
        pos = [r for r in ineqs if r.vector[c] > 0]
        neg = [r for r in ineqs if r.vector[c] < 0]
        zero = [r for r in ineqs if r.vector[c] == 0]
        produced: dict[Row, int] = {}
        for p in pos:
            vp = p.vector[c]
            for n in neg:
                vn = n.vector[c]
                ancestry = p.ancestry | n.ancestry
                if _popcount(ancestry) > k_pair + 1:
                    continue  # Chernikov count bound: necessarily redundant
                combo = primitive(tuple(vp * x - vn * y for x, y in zip(n.vector, p.vector)))
                if not any(combo):
                    continue
                old = produced.get(combo)
                if old is None or _popcount(ancestry) < _popcount(old):
                    produced[combo] = ancestry
        ineqs = _prune(zero + [_FMRow(v, anc) for v, anc in produced.items()], k_pair)

    keep = [i for i in range(h.dimension) if i not in set(targets)]
    project = lambda row: tuple(row[i] for i in keep)
    out_labels = tuple(h.labels[i] for i in keep) if h.labels else None
    projected = HRep(len(keep),
                     equalities=tuple(project(tuple(e)) for e in eqs),
                     inequalities=tuple(project(r.vector) for r in ineqs),
                     labels=out_labels)
    minimal = remove_redundancies(projected)
    return replace(minimal, labels=out_labels)


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _prune(rows: list[_FMRow], k_pair: int) -> list[_FMRow]:
    # dedupe on primitive vectors, keeping the smallest ancestry
    best: dict[Row, int] = {}
    for r in rows:
        old = best.get(r.vector)
        if old is None or _popcount(r.ancestry) < _popcount(old):
            best[r.vector] = r.ancestry
    items = [_FMRow(v, a) for v, a in best.items()]
    # ancestry-superset rule: a row derived from a strict superset of
    # another row's ancestors is redundant
    keep: list[_FMRow] = []
    for r in items:
        dominated = False
        for other in items:
            if other is r:
                continue
            if other.ancestry != r.ancestry and other.ancestry & r.ancestry == other.ancestry:
                dominated = True
                break
        if not dominated:
            keep.append(r)
    return keep


def dd_project(h: HRep, coords: Iterable[int]) -> HRep:
    """Projection via ray enumeration: drop coordinates, re-extremalize."""
    targets = sorted(set(coords))
    if len(targets) >= h.dimension:
        raise InvalidParameter("cannot eliminate every coordinate")
    keep = [i for i in range(h.dimension) if i not in set(targets)]
    v = enumerate_rays(h)
    rays = {primitive(tuple(r[i] for i in keep)) for r in v.rays}
    rays = {r for r in rays if any(r)}
    lineality = [tuple(l[i] for i in keep) for l in v.lineality]
    out_labels = tuple(h.labels[i] for i in keep) if h.labels else None
    projected = VRep(len(keep), tuple(sorted(rays)), tuple(lineality), out_labels)
    minimal_h = facets_from_rays(projected)
    return minimal_h


def extremalize(v: VRep) -> VRep:
    """Canonical extremal generator set of the cone spanned by ``v``."""
    return enumerate_rays(facets_from_rays(v))


# -- serialization ---------------------------------------------------------------

def rep_to_json(rep: HRep | VRep) -> str:
    if isinstance(rep, HRep):
        payload = {
            "type": "hrep",
            "dimension": rep.dimension,
            "coordinates": list(rep.labels) if rep.labels else None,
            "equalities": [list(r) for r in rep.equalities],
            "inequalities": [list(r) for r in rep.inequalities],
        }
    else:
        payload = {
            "type": "vrep",
            "dimension": rep.dimension,
            "coordinates": list(rep.labels) if rep.labels else None,
            "rays": [list(r) for r in rep.rays],
            "lineality": [list(r) for r in rep.lineality],
        }
    return json.dumps(payload, indent=2)


def rep_from_json(text: str) -> HRep | VRep:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"cone file is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "type" not in data:
        raise InvalidParameter("cone file must be an object with a 'type' field")
    kind = data["type"]
    if "dimension" not in data:
        raise InvalidParameter("cone file is missing the 'dimension' field")
    dim = int(data["dimension"])
    labels = tuple(data["coordinates"]) if data.get("coordinates") else None
    def rows(key: str) -> tuple[Row, ...]:
        out = []
        for i, row in enumerate(data.get(key, [])):
            if not isinstance(row, list) or len(row) != dim:
                raise InvalidParameter(f"{key}[{i}] must be a list of {dim} integers")
            out.append(tuple(int(v) for v in row))
        return tuple(out)
    if kind == "hrep":
        return HRep(dim, rows("equalities"), rows("inequalities"), labels)
    if kind == "vrep":
        return VRep(dim, rows("rays"), rows("lineality"), labels)
    raise InvalidParameter("cone file 'type' must be 'hrep' or 'vrep'")


def _row_text(row: Row, labels: Sequence[str] | None) -> str:
    if labels is None:
        return " ".join(str(v) for v in row)
    parts = []
    for coeff, label in zip(row, labels):
        if coeff == 0:
            continue
        sign = "+" if coeff > 0 else "-"
        mag = abs(coeff)
        factor = "" if mag == 1 else f"{mag}*"
        parts.append(f"{sign}{factor}{label}")
    return "".join(parts) if parts else "0"


def rep_to_text(rep: HRep | VRep) -> str:
    """PORTA-flavoured plaintext mirror of a representation."""
    lines = [f"DIM = {rep.dimension}"]
    if rep.labels:
        lines.append("COORDINATES")
        lines.append(" ".join(rep.labels))
    if isinstance(rep, HRep):
        if rep.equalities:
            lines.append("EQUALITIES_SECTION")
            for i, row in enumerate(rep.equalities, 1):
                lines.append(f"({i:3d}) {_row_text(row, rep.labels)} == 0")
        lines.append("INEQUALITIES_SECTION")
        for i, row in enumerate(rep.inequalities, 1):
            lines.append(f"({i:3d}) {_row_text(row, rep.labels)} >= 0")
    else:
        if rep.lineality:
            lines.append("LINEALITY_SECTION")
            for i, row in enumerate(rep.lineality, 1):
                lines.append(f"({i:3d}) " + " ".join(str(v) for v in row))
        lines.append("CONE_SECTION")
        for i, row in enumerate(rep.rays, 1):
            lines.append(f"({i:3d}) " + " ".join(str(v) for v in row))
    lines.append("END")
    return "\n".join(lines)
