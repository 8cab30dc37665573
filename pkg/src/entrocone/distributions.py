"""Finite-alphabet causal models, joint distributions and entropy vectors.

A model attaches a conditional probability table to every node of a causal
structure; compilation multiplies the tables into the joint distribution.
This module also constructs the explicit witness families used to certify
cone tightness: the line-structure witnesses, the post-selected joint of a
five-node line with binary outer settings, and the outer-node splitting of
three-node-line witnesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .causal import CausalStructure, build_line_structure, reduced_line_structure, structure_from_name
from .entropy_space import CoordinateIndex
from .errors import InvalidModel, InvalidParameter

_PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability table over named finite-alphabet variables."""

    variables: tuple[str, ...]
    alphabet_sizes: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        expected = tuple(self.alphabet_sizes)
        if self.table.shape != expected:
            raise InvalidModel(f"table shape {self.table.shape} != alphabets {expected}")
        if np.any(self.table < -_PROB_TOL):
            raise InvalidModel("probabilities must be nonnegative")
        total = float(self.table.sum())
        if abs(total - 1.0) > _PROB_TOL * max(1, self.table.size):
            raise InvalidModel(f"probabilities sum to {total!r}, not 1")

    def marginal(self, subset: Sequence[str]) -> "JointDistribution":
        missing = [v for v in subset if v not in self.variables]
        if missing:
            raise InvalidParameter(f"unknown variables {missing}")
        keep = [v for v in self.variables if v in set(subset)]
        axes = tuple(i for i, v in enumerate(self.variables) if v not in set(subset))
        table = self.table.sum(axis=axes) if axes else self.table
        sizes = tuple(self.alphabet_sizes[self.variables.index(v)] for v in keep)
        return JointDistribution(tuple(keep), sizes, table)


def marginal(joint: JointDistribution, subset: Sequence[str]) -> JointDistribution:
    return joint.marginal(subset)


@dataclass(frozen=True, eq=False)
class CausalModel:
    """A CPT per node of a causal structure.

    Each CPT is an array of shape (parent alphabets ..., node alphabet),
    parents ordered by their position in the structure's node list.  Rows
    must be normalized distributions.
    """

    structure: CausalStructure
    alphabet_sizes: Mapping[str, int]
    cpts: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        parents = self.structure.parents_map()
        for node in self.structure.node_ids():
            if node not in self.alphabet_sizes:
                raise InvalidModel(f"no alphabet size for node {node!r}")
            if node not in self.cpts:
                raise InvalidModel(f"no CPT for node {node!r}")
            cpt = np.asarray(self.cpts[node], dtype=float)
            expected = tuple(self.alphabet_sizes[p] for p in parents[node])
            expected += (self.alphabet_sizes[node],)
            if cpt.shape != expected:
                raise InvalidModel(
                    f"CPT for {node!r} has shape {cpt.shape}, expected {expected}")
            sums = cpt.sum(axis=-1)
            if np.any(np.abs(sums - 1.0) > _PROB_TOL * max(1, cpt.shape[-1])):
                raise InvalidModel(f"CPT rows for {node!r} do not sum to 1")
            if np.any(cpt < -_PROB_TOL):
                raise InvalidModel(f"CPT for {node!r} has negative entries")


def compile_model(model: CausalModel) -> JointDistribution:
    """Joint distribution over all nodes: the product of the CPTs."""
    names = model.structure.node_ids()
    sizes = tuple(model.alphabet_sizes[v] for v in names)
    parents = model.structure.parents_map()
    joint = np.ones(sizes, dtype=float)
    pos = {v: i for i, v in enumerate(names)}
    for node in names:
        cpt = np.asarray(model.cpts[node], dtype=float)
        involved = [*parents[node], node]
        # broadcast the CPT across the axes of the uninvolved variables
        order = sorted(range(len(involved)), key=lambda i: pos[involved[i]])
        arranged = np.transpose(cpt, order)
        shape = [1] * len(names)
        for i in sorted(pos[v] for v in involved):
            shape[i] = sizes[i]
        joint = joint * arranged.reshape(shape)
    return JointDistribution(names, sizes, joint)


# -- entropy vectors -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EntropyVector:
    """Joint entropies (bits) of every nonempty variable subset."""

    index: CoordinateIndex
    values: np.ndarray

    def __getitem__(self, names: Sequence[str]) -> float:
        return float(self.values[self.index.position(self.index.mask_of(names))])

    def snapped(self, tolerance: float = 1e-9) -> tuple[int, ...] | None:
        """Integer form of the vector, or None if any entry is off-integer."""
        ints = np.rint(self.values)
        if np.max(np.abs(self.values - ints)) <= tolerance:
            return tuple(int(v) for v in ints)
        return None


def shannon_entropy(probabilities: np.ndarray) -> float:
    """Base-2 entropy with the 0 log 0 := 0 convention."""
    flat = probabilities.reshape(-1)
    positive = flat[flat > 0]
    return float(-(positive * np.log2(positive)).sum())


def entropy_vector(joint: JointDistribution,
                   index: CoordinateIndex | None = None) -> EntropyVector:
    """Entropy of every nonempty subset, in coordinate-index order."""
    if index is None:
        index = CoordinateIndex(joint.variables)
    elif index.variables != joint.variables:
        raise InvalidParameter("index variables do not match the distribution")
    n = len(joint.variables)
    values = np.empty(len(index), dtype=float)
    for i, mask in enumerate(index.masks):
        axes = tuple(j for j in range(n) if not (mask >> j) & 1)
        values[i] = shannon_entropy(joint.table.sum(axis=axes) if axes else joint.table)
    return EntropyVector(index, values)


def conditional_mutual_information_bits(joint: JointDistribution, x: Sequence[str],
                                        y: Sequence[str], z: Sequence[str]) -> float:
    """I(X:Y|Z) in bits evaluated on a compiled distribution."""
    hxz = shannon_entropy(joint.marginal([*x, *z]).table)
    hyz = shannon_entropy(joint.marginal([*y, *z]).table)
    hxyz = shannon_entropy(joint.marginal([*x, *y, *z]).table)
    hz = shannon_entropy(joint.marginal(list(z)).table) if z else 0.0
    return hxz + hyz - hxyz - hz


# -- witness constructions ---------------------------------------------------------

def _uniform_bit() -> np.ndarray:
    return np.array([0.5, 0.5])


def _deterministic(parent_sizes: Sequence[int], out_size: int, fn) -> np.ndarray:
    cpt = np.zeros((*parent_sizes, out_size))
    if parent_sizes:
        for idx in np.ndindex(*parent_sizes):
            cpt[idx + (fn(*idx),)] = 1.0
    else:
        cpt[fn()] = 1.0
    return cpt


def witness_line(i: int, j: int, n: int) -> CausalModel:
    """The line-structure model whose entropy vector generates one extremal ray.

    Shared causes are uniform bits.  For i < j the chain copies the left
    cause at position i, XORs neighbouring causes in the interior, and
    copies the right cause at position j; everything outside is the
    constant 1.  The diagonal case puts a single fresh bit at position i.
    All alphabets are binary so the table shapes stay uniform.
    """
    if not (1 <= i <= j <= n):
        raise InvalidParameter("need 1 <= i <= j <= n")
    structure = build_line_structure(n)
    sizes = {v: 2 for v in structure.node_ids()}
    cpts: dict[str, np.ndarray] = {f"C{k}": _uniform_bit() for k in range(1, n)}

    def constant(_c1=None, _c2=None) -> int:
        return 1

    if n == 1:
        # degenerate line: a single observed root carries one uniform bit
        cpts["X1"] = _uniform_bit()
        return CausalModel(structure, sizes, cpts)

    for k in range(1, n + 1):
        parents = structure.parents(f"X{k}")
        if i == j:
            source = f"C{i}" if i <= n - 1 else f"C{n - 1}"
            if k == i:
                pos = parents.index(source)
                cpts[f"X{k}"] = _deterministic([2] * len(parents), 2,
                                               lambda *cs, p=pos: cs[p])
            else:
                cpts[f"X{k}"] = _deterministic([2] * len(parents), 2, constant)
        else:
            if k < i or k > j:
                cpts[f"X{k}"] = _deterministic([2] * len(parents), 2, constant)
            elif k == i:
                pos = parents.index(f"C{i}")
                cpts[f"X{k}"] = _deterministic([2] * len(parents), 2,
                                               lambda *cs, p=pos: cs[p])
            elif k == j:
                pos = parents.index(f"C{j - 1}")
                cpts[f"X{k}"] = _deterministic([2] * len(parents), 2,
                                               lambda *cs, p=pos: cs[p])
            else:
                cpts[f"X{k}"] = _deterministic([2] * len(parents), 2,
                                               lambda c_left, c_right: c_left ^ c_right)
    return CausalModel(structure, sizes, cpts)


def line_witness_models(n: int) -> dict[tuple[int, int], CausalModel]:
    """All n(n+1)/2 witnesses, keyed by (i, j)."""
    return {(i, j): witness_line(i, j, n)
            for i in range(1, n + 1) for j in range(i, n + 1)}


def post_select_joint(model: CausalModel) -> JointDistribution:
    """Joint of both-setting outcome copies for a five-node reduced line.

    The model must live on the reduced five-node line (outer observed
    nodes A and B acting as the outermost causes, binary).  The returned
    distribution over (X0, X1, Y, Z0, Z1) couples the X outcome under
    A=0 and A=1 through the shared interior cause, and likewise for Z
    under B; its (Xa, Y, Zb) marginals equal the setting-conditioned
    distributions of the model.
    """
    structure = model.structure
    expected = reduced_line_structure(5, names=("A", "X", "Y", "Z", "B"))
    if structure.node_ids() != expected.node_ids() or set(structure.edges) != set(expected.edges):
        raise InvalidParameter("model must live on the reduced 5-node line (A,X,Y,Z,B)")
    if model.alphabet_sizes["A"] != 2 or model.alphabet_sizes["B"] != 2:
        raise InvalidParameter("outer settings A and B must be binary")
    nx = model.alphabet_sizes["X"]
    ny = model.alphabet_sizes["Y"]
    nz = model.alphabet_sizes["Z"]
    nc2 = model.alphabet_sizes["C2"]
    nc3 = model.alphabet_sizes["C3"]
    p_c2 = np.asarray(model.cpts["C2"], dtype=float)
    p_c3 = np.asarray(model.cpts["C3"], dtype=float)
    # CPT axes follow node order: X given (A, C2); Y given (C2, C3); Z given (B, C3)
    p_x = np.asarray(model.cpts["X"], dtype=float)
    p_y = np.asarray(model.cpts["Y"], dtype=float)
    p_z = np.asarray(model.cpts["Z"], dtype=float)
    table = np.zeros((nx, nx, ny, nz, nz))
    for c2 in range(nc2):
        for c3 in range(nc3):
            weight = p_c2[c2] * p_c3[c3]
            if weight == 0:
                continue
            block = (p_x[0, c2][:, None, None, None, None]
                     * p_x[1, c2][None, :, None, None, None]
                     * p_y[c2, c3][None, None, :, None, None]
                     * p_z[0, c3][None, None, None, :, None]
                     * p_z[1, c3][None, None, None, None, :])
            table += weight * block
    return JointDistribution(("X0", "X1", "Y", "Z0", "Z1"), (nx, nx, ny, nz, nz), table)


def setting_conditionals(model: CausalModel) -> dict[tuple[int, int], np.ndarray]:
    """P(X, Y | A=a, B=b) tables of a compiled reduced-line Bell model."""
    joint = compile_model(model).marginal(["A", "X", "Y", "B"])
    names = joint.variables
    table = np.moveaxis(joint.table, [names.index("A"), names.index("B"),
                                      names.index("X"), names.index("Y")], [0, 1, 2, 3])
    out = {}
    for a in range(2):
        for b in range(2):
            block = table[a, b]
            weight = block.sum()
            if weight <= _PROB_TOL:
                raise InvalidParameter(f"setting (A={a}, B={b}) has zero probability")
            out[(a, b)] = block / weight
    return out


SplitMode = str
_SPLIT_MODES = ("keep0", "keep1", "copy")


def split_p3_witness(model: CausalModel, x_mode: SplitMode, z_mode: SplitMode) -> JointDistribution:
    """Split the outer nodes of a three-node-line joint into setting copies.

    From the observed joint (X, Y, Z) of the model, build a distribution
    over (X0, X1, Y, Z0, Z1) where each outer pair is either (value, 1),
    (1, value) or two perfect copies, per the requested mode.
    """
    if x_mode not in _SPLIT_MODES or z_mode not in _SPLIT_MODES:
        raise InvalidParameter(f"modes must be one of {_SPLIT_MODES}")
    if model.structure.observed_ids() != ("X1", "X2", "X3"):
        raise InvalidParameter("model must live on the 3-node line")
    joint = compile_model(model).marginal(["X1", "X2", "X3"])
    nx, ny, nz = joint.alphabet_sizes
    table = np.zeros((nx, nx, ny, nz, nz))
    for (x, y, z), p in np.ndenumerate(joint.table):
        if p == 0:
            continue
        x0, x1 = {"keep0": (x, 1), "keep1": (1, x), "copy": (x, x)}[x_mode]
        z0, z1 = {"keep0": (z, 1), "keep1": (1, z), "copy": (z, z)}[z_mode]
        table[x0, x1, y, z0, z1] += p
    return JointDistribution(("X0", "X1", "Y", "Z0", "Z1"), (nx, nx, ny, nz, nz), table)


# -- the chained conditional-entropy functional -------------------------------------

def _cond_entropy_of_table(table: np.ndarray, given_axis: int) -> float:
    """H(other | given) for a two-variable joint table."""
    h_joint = shannon_entropy(table)
    h_given = shannon_entropy(table.sum(axis=0 if given_axis == 1 else 1))
    return h_joint - h_given


def bc_functional(tables: Mapping[tuple[int, int], np.ndarray],
                  minus_setting: tuple[int, int] = (0, 0),
                  swap_roles: bool = False) -> float:
    """Chained conditional-entropy expression over four conditional tables.

    ``tables[(a, b)]`` is the joint of (X, Y) conditioned on the settings.
    The default orientation evaluates
    H(Y|X)_11 + H(X|Y)_10 + H(X|Y)_01 - H(X|Y)_00, in bits; other
    ``minus_setting`` choices and the role swap give the permuted variants,
    all of which are nonnegative whenever a joint over both outcome copies
    exists.
    """
    keys = {(a, b) for a in range(2) for b in range(2)}
    if set(tables.keys()) != keys:
        raise InvalidParameter("need the four tables (a, b) for a, b in {0, 1}")
    shapes = {tuple(np.asarray(t).shape) for t in tables.values()}
    if len(shapes) != 1 or any(len(s) != 2 for s in shapes):
        raise InvalidParameter("tables must share one two-variable shape")
    norm = {}
    for key, t in tables.items():
        arr = np.asarray(t, dtype=float)
        if np.any(arr < -_PROB_TOL):
            raise InvalidParameter(f"table {key} has negative entries")
        total = arr.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameter(f"table {key} sums to {total!r}, not 1")
        norm[key] = arr
    a_star, b_star = minus_setting
    if (a_star, b_star) not in keys:
        raise InvalidParameter("minus_setting must be a pair of bits")

    def h_x_given_y(a: int, b: int) -> float:
        t = norm[(a, b)]
        if swap_roles:
            t = t.T
        return _cond_entropy_of_table(t, given_axis=1)

    def h_y_given_x(a: int, b: int) -> float:
        t = norm[(a, b)]
        if swap_roles:
            t = t.T
        return _cond_entropy_of_table(t, given_axis=0)

    return (h_x_given_y(a_star, 1 - b_star)
            + h_y_given_x(1 - a_star, 1 - b_star)
            + h_x_given_y(1 - a_star, b_star)
            - h_x_given_y(a_star, b_star))


def bc_functional_variants(tables: Mapping[tuple[int, int], np.ndarray]) -> dict[str, float]:
    """All eight orientation variants of the functional."""
    out = {}
    for swap in (False, True):
        for a in range(2):
            for b in range(2):
                label = f"{'yx' if swap else 'xy'}:{a}{b}"
                out[label] = bc_functional(tables, minus_setting=(a, b), swap_roles=swap)
    return out


# -- model serialization ---------------------------------------------------------

def model_to_json(model: CausalModel) -> str:
    payload = {
        "structure": (model.structure.name or
                      json.loads(model.structure.to_json())),
        "alphabets": {v: int(model.alphabet_sizes[v]) for v in model.structure.node_ids()},
        "cpts": {v: np.asarray(model.cpts[v]).tolist() for v in model.structure.node_ids()},
    }
    return json.dumps(payload, indent=2)


def model_from_json(text: str) -> CausalModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"model file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidParameter("model file must be a JSON object")
    for fieldname in ("structure", "alphabets", "cpts"):
        if fieldname not in data:
            raise InvalidParameter(f"model file is missing the {fieldname!r} field")
    ref = data["structure"]
    if isinstance(ref, str):
        structure = structure_from_name(ref)
    else:
        structure = CausalStructure.from_json(json.dumps(ref))
    try:
        sizes = {str(k): int(v) for k, v in data["alphabets"].items()}
    except (TypeError, ValueError, AttributeError):
        raise InvalidParameter("the 'alphabets' field must map node ids to integers") from None
    cpts = {}
    for node, raw in data["cpts"].items():
        try:
            cpts[str(node)] = np.asarray(raw, dtype=float)
        except ValueError:
            raise InvalidParameter(f"cpts[{node!r}] is not a numeric array") from None
    try:
        return CausalModel(structure, sizes, cpts)
    except InvalidModel as exc:
        raise InvalidParameter(f"model file invalid: {exc}") from None


def tables_from_json(text: str) -> dict[tuple[int, int], np.ndarray]:
    """Parse the four setting-conditioned tables for the functional."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"tables file is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "tables" not in data:
        raise InvalidParameter("tables file must be an object with a 'tables' field")
    sizes = data.get("alphabets")
    if not (isinstance(sizes, list) and len(sizes) == 2):
        raise InvalidParameter("the 'alphabets' field must be [x_size, y_size]")
    nx, ny = int(sizes[0]), int(sizes[1])
    out = {}
    for key in ("00", "01", "10", "11"):
        if key not in data["tables"]:
            raise InvalidParameter(f"tables.{key} is missing")
        arr = np.asarray(data["tables"][key], dtype=float)
        if arr.shape != (nx, ny):
            raise InvalidParameter(f"tables.{key} must have shape ({nx}, {ny})")
        out[(int(key[0]), int(key[1]))] = arr
    return out
