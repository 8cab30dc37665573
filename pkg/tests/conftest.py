"""Shared oracles and generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from entrocone.causal import CausalStructure, Node
from entrocone.distributions import CausalModel


# -- brute-force d-separation oracle ------------------------------------------

def all_undirected_paths(structure: CausalStructure, start: str, goal: str):
    """All simple paths in the undirected skeleton, with edge orientations."""
    adjacency: dict[str, list[tuple[str, str]]] = {n.id: [] for n in structure.nodes}
    for parent, child in structure.edges:
        adjacency[parent].append((child, "out"))
        adjacency[child].append((parent, "in"))

    paths = []

    def walk(node, visited, trail):
        if node == goal:
            paths.append(list(trail))
            return
        for nxt, direction in adjacency[node]:
            if nxt not in visited:
                visited.add(nxt)
                trail.append((node, nxt, direction))
                walk(nxt, visited, trail)
                trail.pop()
                visited.remove(nxt)

    walk(start, {start}, [])
    return paths


def dsep_bruteforce(structure: CausalStructure, xs, ys, zs) -> bool:
    """Path-by-path blocking test (collider condition with descendants)."""
    zs = set(zs)
    descendants = {n.id: structure.descendants(n.id) for n in structure.nodes}

    def blocked(path) -> bool:
        # interior node k sits between edges path[k-1] and path[k]
        for k in range(1, len(path)):
            node = path[k - 1][1]
            into_prev = path[k - 1][2] == "out"   # previous edge points into node
            into_next = path[k][2] == "in"        # next edge points into node
            if into_prev and into_next:  # collider
                if node not in zs and not (descendants[node] & zs):
                    return True
            else:  # chain or fork
                if node in zs:
                    return True
        return False

    for x in xs:
        for y in ys:
            for path in all_undirected_paths(structure, x, y):
                if not path:
                    continue
                if not blocked(path):
                    return False
    return True


# -- random structures and models ----------------------------------------------

def random_dag(rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.4,
               observed_prob: float = 0.7) -> CausalStructure:
    names = [f"N{i}" for i in range(n_nodes)]
    nodes = tuple(Node(v, "observed" if rng.random() < observed_prob else "unobserved")
                  for v in names)
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < edge_prob:
                edges.append((names[i], names[j]))
    return CausalStructure(nodes, tuple(edges))


def random_model(rng: np.random.Generator, structure: CausalStructure,
                 max_alphabet: int = 3) -> CausalModel:
    sizes = {v: int(rng.integers(2, max_alphabet + 1)) for v in structure.node_ids()}
    parents = structure.parents_map()
    cpts = {}
    for v in structure.node_ids():
        shape = tuple(sizes[p] for p in parents[v])
        out = sizes[v]
        if shape:
            cpt = np.empty((*shape, out))
            for idx in np.ndindex(*shape):
                cpt[idx] = rng.dirichlet(np.ones(out))
        else:
            cpt = rng.dirichlet(np.ones(out))
        cpts[v] = cpt
    return CausalModel(structure, sizes, cpts)


def random_cone_hrep(rng: np.random.Generator, dim: int, n_rows: int):
    from entrocone.polyhedra import HRep
    rows = []
    while len(rows) < n_rows:
        row = tuple(int(v) for v in rng.integers(-3, 4, size=dim))
        if any(row):
            rows.append(row)
    return HRep(dim, (), tuple(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
