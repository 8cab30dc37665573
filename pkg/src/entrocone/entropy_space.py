"""Entropy coordinates and constraint-system generation.

The coordinate system assigns one real coordinate to the joint entropy of
every nonempty subset of a ground set of variables, ordered by cardinality
and then lexicographically by member position.  Constraint systems are
lists of exact-rational linear forms over these coordinates: the elemental
Shannon inequalities, the conditional-independence equalities of a causal
structure, and the reduced system for line structures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Sequence

from .errors import InvalidParameter

Relation = Literal[">=", "=="]


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, eq=False)
class CoordinateIndex:
    """Nonempty variable subsets in (cardinality, position-lex) order.

    Subsets are stored as bitmasks over positions in ``variables``.  An
    optional ``allowed`` family restricts the index to a marginal scenario;
    it must be closed under taking nonempty subsets.
    """

    variables: tuple[str, ...]
    allowed: frozenset[int] | None = None
    masks: tuple[int, ...] = field(init=False)
    _positions: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.variables:
            raise InvalidParameter("coordinate index needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise InvalidParameter("variable names must be unique")
        n = len(self.variables)
        masks = [m for m in range(1, 1 << n)
                 if self.allowed is None or m in self.allowed]
        masks.sort(key=lambda m: (_popcount(m), _bit_positions(m)))
        object.__setattr__(self, "masks", tuple(masks))
        object.__setattr__(self, "_positions", {m: i for i, m in enumerate(masks)})

    def __len__(self) -> int:
        return len(self.masks)

    def position(self, mask: int) -> int:
        try:
            return self._positions[mask]
        except KeyError:
            raise InvalidParameter(f"subset mask {mask!r} is not a coordinate") from None

    def mask_of(self, names: Iterable[str]) -> int:
        mask = 0
        for name in names:
            try:
                mask |= 1 << self.variables.index(name)
            except ValueError:
                raise InvalidParameter(f"unknown variable {name!r}") from None
        return mask

    def label(self, mask: int) -> str:
        members = "".join(self.variables[i] for i in _bit_positions(mask))
        return f"H({members})"

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.label(m) for m in self.masks)

    def restrict(self, allowed_masks: Iterable[int]) -> "CoordinateIndex":
        return CoordinateIndex(self.variables, allowed=frozenset(allowed_masks))


def _bit_positions(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class LinearForm:
    """Rational-coefficient functional over entropy coordinates.

    ``coefficients`` maps subset masks to nonzero rationals; ``relation``
    states whether the form is constrained to be nonnegative or zero.
    """

    coefficients: tuple[tuple[int, Fraction], ...]
    relation: Relation = ">="

    @staticmethod
    def build(coeffs: Mapping[int, Fraction | int], relation: Relation = ">=") -> "LinearForm":
        items = tuple(sorted((m, Fraction(c)) for m, c in coeffs.items() if c != 0))
        return LinearForm(items, relation)

    def row(self, index: CoordinateIndex) -> tuple[Fraction, ...]:
        row = [Fraction(0)] * len(index)
        for mask, coeff in self.coefficients:
            row[index.position(mask)] += coeff
        return tuple(row)

    def evaluate(self, values: Sequence[float], index: CoordinateIndex) -> float:
        return float(sum(float(c) * values[index.position(m)] for m, c in self.coefficients))

    def text(self, index: CoordinateIndex) -> str:
        parts = []
        for mask, coeff in sorted(self.coefficients, key=lambda mc: index.position(mc[0])):
            sign = "+" if coeff > 0 else "-"
            mag = abs(coeff)
            factor = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign}{factor}{index.label(mask)}")
        rel = ">= 0" if self.relation == ">=" else "== 0"
        return f"{''.join(parts)} {rel}"


@dataclass(frozen=True)
class ConstraintSystem:
    """An H-representation given as labeled linear forms over an index."""

    index: CoordinateIndex
    equalities: tuple[LinearForm, ...] = ()
    inequalities: tuple[LinearForm, ...] = ()

    def __post_init__(self) -> None:
        for form in (*self.equalities, *self.inequalities):
            for mask, _ in form.coefficients:
                self.index.position(mask)

    def text(self) -> str:
        lines = [f"VARIABLES {' '.join(self.index.variables)}"]
        for form in self.equalities:
            lines.append(form.text(self.index))
        for form in self.inequalities:
            lines.append(form.text(self.index))
        return "\n".join(lines)

    def to_json(self) -> str:
        def forms(items: tuple[LinearForm, ...]) -> list[dict]:
            return [
                {
                    "terms": {self.index.label(m): str(c) for m, c in f.coefficients},
                    "relation": f.relation,
                }
                for f in items
            ]

        return json.dumps(
            {
                "variables": list(self.index.variables),
                "equalities": forms(self.equalities),
                "inequalities": forms(self.inequalities),
            },
            indent=2,
        )


def conditional_mutual_information(s: int, t: int, z: int = 0,
                                   relation: Relation = ">=") -> LinearForm:
    """I(S:T|Z) expanded as H(SZ) + H(TZ) - H(STZ) - H(Z)."""
    if s & t or s & z or t & z:
        raise InvalidParameter("S, T, Z must be pairwise disjoint")
    if not s or not t:
        raise InvalidParameter("S and T must be nonempty")
    coeffs: dict[int, Fraction] = {}
    for mask, c in ((s | z, 1), (t | z, 1), (s | t | z, -1), (z, -1)):
        if mask:
            coeffs[mask] = coeffs.get(mask, Fraction(0)) + c
    return LinearForm.build(coeffs, relation)


def elemental_shannon_system(variables: Sequence[str]) -> ConstraintSystem:
    """Minimal generating set of the Shannon constraints.

    For n >= 2 this is one monotonicity per variable and one conditional
    mutual-information positivity per ordered pair and conditioning subset,
    n + n(n-1)*2^(n-3) inequalities in total.  For a single variable the
    system degenerates to plain positivity.
    """
    if not variables:
        raise InvalidParameter("variable list must be nonempty")
    index = CoordinateIndex(tuple(variables))
    n = len(variables)
    full = (1 << n) - 1
    forms: list[LinearForm] = []
    if n == 1:
        forms.append(LinearForm.build({1: Fraction(1)}))
        return ConstraintSystem(index, (), tuple(forms))
    for i in range(n):
        rest = full & ~(1 << i)
        forms.append(LinearForm.build({full: Fraction(1), rest: Fraction(-1)}))
    for i in range(n):
        for j in range(i + 1, n):
            others = full & ~(1 << i) & ~(1 << j)
            sub = others
            # iterate over all subsets of the remaining variables
            s = sub
            while True:
                forms.append(conditional_mutual_information(1 << i, 1 << j, s))
                if s == 0:
                    break
                s = (s - 1) & sub
    return ConstraintSystem(index, (), tuple(forms))


def classical_ci_system(structure) -> ConstraintSystem:
    """Per-node conditional-independence equalities of a classical structure.

    Coordinates range over all nodes, observed and unobserved.  Each node
    with a nonempty set of non-descendants (its parents excluded) yields
    the equality I(node : non-descendants | parents) = 0.
    """
    names = tuple(node.id for node in structure.nodes)
    index = CoordinateIndex(names)
    forms: list[LinearForm] = []
    for node in structure.nodes:
        node_mask = index.mask_of([node.id])
        parents = index.mask_of(structure.parents(node.id))
        descendants = index.mask_of(structure.descendants(node.id))
        nondesc = ((1 << len(names)) - 1) & ~node_mask & ~descendants & ~parents
        if nondesc:
            forms.append(conditional_mutual_information(node_mask, nondesc, parents, "=="))
    return ConstraintSystem(index, tuple(forms), ())


def reduced_line_system(n: int) -> ConstraintSystem:
    """The n(n+1)/2 inequalities that survive the line-structure reduction.

    Over the observed coordinates of the n-node line: the n monotonicities
    H(all | all minus X_i) >= 0 plus I(X_i : X_j | M_ij) >= 0 for i < j,
    where M_ij is the set of observed nodes strictly between X_i and X_j.
    The conditional-independence content of the structure is not emitted
    here; it enters through the contiguous-block substitution.
    """
    if n < 1:
        raise InvalidParameter("line structure needs n >= 1")
    variables = tuple(f"X{i}" for i in range(1, n + 1))
    index = CoordinateIndex(variables)
    full = (1 << n) - 1
    forms: list[LinearForm] = []
    if n == 1:
        forms.append(LinearForm.build({1: Fraction(1)}))
        return ConstraintSystem(index, (), tuple(forms))
    for i in range(n):
        forms.append(LinearForm.build({full: Fraction(1), full & ~(1 << i): Fraction(-1)}))
    for i in range(n):
        for j in range(i + 1, n):
            between = 0
            for k in range(i + 1, j):
                between |= 1 << k
            forms.append(conditional_mutual_information(1 << i, 1 << j, between))
    return ConstraintSystem(index, (), tuple(forms))


# -- contiguous-block dimension reduction for line structures ---------------

def contiguous_blocks(mask: int) -> list[int]:
    """Decompose a subset mask into its maximal runs of consecutive positions."""
    blocks = []
    current = 0
    prev = None
    for pos in _bit_positions(mask):
        if prev is not None and pos == prev + 1:
            current |= 1 << pos
        else:
            if current:
                blocks.append(current)
            current = 1 << pos
        prev = pos
    if current:
        blocks.append(current)
    return blocks


def block_coordinate_labels(n: int) -> tuple[str, ...]:
    """Labels of the contiguous-interval coordinates, shortest intervals first."""
    labels = []
    for length in range(1, n + 1):
        for start in range(0, n - length + 1):
            members = "".join(f"X{start + k + 1}" for k in range(length))
            labels.append(f"H({members})")
    return tuple(labels)


def _block_position(n: int, start: int, length: int) -> int:
    # coordinates ordered by (length, start); lengths 1..length-1 precede
    return sum(n - L + 1 for L in range(1, length)) + start


def substitute_contiguous(system: ConstraintSystem) -> list[tuple[int, ...]]:
    """Rewrite forms over subset coordinates into contiguous-block coordinates.

    Every subset entropy is replaced by the sum of the entropies of its
    maximal contiguous blocks, which is exact for compatible distributions
    on a line structure.  Returns integer rows over the block coordinates
    (inequalities only; the system must not carry equalities).
    """
    if system.equalities:
        raise InvalidParameter("substitution expects an inequality-only system")
    n = len(system.index.variables)
    dim = n * (n + 1) // 2
    rows = []
    for form in system.inequalities:
        row = [Fraction(0)] * dim
        for mask, coeff in form.coefficients:
            for block in contiguous_blocks(mask):
                positions = _bit_positions(block)
                row[_block_position(n, positions[0], len(positions))] += coeff
        rows.append(_clear_denominators(row))
    return rows


def lift_block_vector(values: Sequence[int], n: int) -> tuple[int, ...]:
    """Expand a contiguous-block vector to the full subset-coordinate vector."""
    index = CoordinateIndex(tuple(f"X{i}" for i in range(1, n + 1)))
    out = []
    for mask in index.masks:
        total = 0
        for block in contiguous_blocks(mask):
            positions = _bit_positions(block)
            total += values[_block_position(n, positions[0], len(positions))]
        out.append(total)
    return tuple(out)


def contiguous_decomposition_equalities(n: int) -> tuple[LinearForm, ...]:
    """H(S) = sum of maximal contiguous blocks, for every non-contiguous S."""
    index = CoordinateIndex(tuple(f"X{i}" for i in range(1, n + 1)))
    forms = []
    for mask in index.masks:
        blocks = contiguous_blocks(mask)
        if len(blocks) > 1:
            coeffs: dict[int, Fraction] = {mask: Fraction(1)}
            for block in blocks:
                coeffs[block] = coeffs.get(block, Fraction(0)) - 1
            forms.append(LinearForm.build(coeffs, "=="))
    return tuple(forms)


def _clear_denominators(row: Sequence[Fraction]) -> tuple[int, ...]:
    from math import gcd, lcm
    denom = lcm(*(c.denominator for c in row)) if row else 1
    ints = [int(c * denom) for c in row]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def system_rows(system: ConstraintSystem) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Integer equality and inequality rows of a constraint system."""
    eqs = [_clear_denominators(f.row(system.index)) for f in system.equalities]
    ineqs = [_clear_denominators(f.row(system.index)) for f in system.inequalities]
    return eqs, ineqs
