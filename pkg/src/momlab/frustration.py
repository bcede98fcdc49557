"""Anticommutation structure of measurement ensembles.

The frustration tensor records, for every ordered species pair and every
spatial displacement, whether the two placed operators anticommute.  The
frustration graph materializes that relation on a finite chain: vertices are
(species, position) pairs and edges join anticommuting placements.  Both
objects drive the analyses here: bipartiteness, component decomposition and
quasi-1D isomorphism, global symmetry search, averaged frustration, and a
purification simulator that never touches the operators themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .ensembles import MeasurementEnsemble
from .pauli import PauliString, gf2_kernel_masks, symplectic_product


@dataclass
class FrustrationTensor:
    """Anticommutation bits by species pair and displacement.

    ``gamma[a, b, r-1+ell]`` is 1 when species ``a`` placed at position
    ``ell`` anticommutes with species ``b`` placed at position 0 (so ``ell``
    is the displacement of the first index relative to the second), and
    satisfies gamma[a, b, ell] == gamma[b, a, -ell].
    """

    n_species: int
    r: int
    gamma: np.ndarray  # uint8, shape (A, A, 2r-1)

    def value(self, a: int, b: int, ell: int) -> int:
        if abs(ell) >= self.r:
            return 0
        return int(self.gamma[a, b, self.r - 1 + ell])

    def displacements(self) -> range:
        return range(-(self.r - 1), self.r)


def build_tensor(ens: MeasurementEnsemble) -> FrustrationTensor:
    A = ens.n_species
    r = ens.r
    gamma = np.zeros((A, A, 2 * r - 1), dtype=np.uint8)
    if r <= 32:
        xs = np.array([s.x for s in ens.species], dtype=np.uint64)
        zs = np.array([s.z for s in ens.species], dtype=np.uint64)
        for ell in range(r):
            xa = xs << np.uint64(ell)
            za = zs << np.uint64(ell)
            anti = np.bitwise_count((xa[:, None] & zs[None, :])
                                    ^ (za[:, None] & xs[None, :])) & np.uint64(1)
            gamma[:, :, r - 1 + ell] = anti.astype(np.uint8)
    else:
        win = 3 * r
        placed = [s.embed(win, r) for s in ens.species]
        for a, s in enumerate(ens.species):
            for ell in range(r):
                shifted = s.embed(win, r + ell)
                for b in range(A):
                    gamma[a, b, r - 1 + ell] = symplectic_product(shifted, placed[b])
    for ell in range(-(r - 1), 0):
        gamma[:, :, r - 1 + ell] = gamma[:, :, r - 1 - ell].T
    return FrustrationTensor(A, r, gamma)


@dataclass
class FrustrationGraph:
    """Vertices (species, position) on a length-L chain; edges = anticommutation."""

    n_species: int
    L: int
    boundary: str
    adjacency: dict = field(repr=False)
    vertices: list = field(repr=False)

    def neighbors(self, v):
        return self.adjacency[v]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def edges(self) -> list:
        out = []
        for v in self.vertices:
            for u in self.adjacency[v]:
                if v < u:
                    out.append((v, u))
        return out

    def to_edge_list_text(self) -> str:
        lines = [f"{a},{i} {b},{j}" for (a, i), (b, j) in sorted(self.edges())]
        return "\n".join(lines) + "\n"

    def induced(self, vertex_subset: Iterable) -> "FrustrationGraph":
        vs = sorted(set(vertex_subset))
        keep = set(vs)
        adj = {v: sorted(u for u in self.adjacency[v] if u in keep) for v in vs}
        return FrustrationGraph(self.n_species, self.L, self.boundary, adj, vs)


def build_graph(tensor: FrustrationTensor, L: int, boundary: str = "periodic") -> FrustrationGraph:
    A, r = tensor.n_species, tensor.r
    if L < r:
        raise ValueError(f"window L={L} below range r={r}")
    npos = L if boundary == "periodic" else L - r + 1
    vertices = [(a, i) for a in range(A) for i in range(npos)]
    adj = {v: [] for v in vertices}
    for a in range(A):
        for b in range(A):
            for ell in tensor.displacements():
                if not tensor.gamma[a, b, r - 1 + ell]:
                    continue
                for i in range(npos):
                    j = i - ell
                    if boundary == "periodic":
                        j %= L
                        if j >= npos:
                            continue
                    elif not 0 <= j < npos:
                        continue
                    if (a, i) != (b, j):
                        adj[(a, i)].append((b, j))
    for v in adj:
        adj[v] = sorted(set(adj[v]))
    return FrustrationGraph(A, L, boundary, adj, vertices)


def graph_for_ensemble(ens: MeasurementEnsemble, L: int | None = None) -> FrustrationGraph:
    """Finite-window graph; default window max(4r, 24) with the ensemble boundary."""
    tensor = build_tensor(ens)
    if L is None:
        L = max(4 * ens.r, 24)
    return build_graph(tensor, L, ens.boundary)


# -- bipartiteness -------------------------------------------------------------


@dataclass
class BipartitenessResult:
    bipartite: bool
    coloring: dict | None = None
    odd_cycle: list | None = None

    def to_json_dict(self) -> dict:
        if self.bipartite:
            return {"bipartite": True,
                    "coloring": {f"{a},{i}": int(c) for (a, i), c in self.coloring.items()}}
        return {"bipartite": False,
                "odd_cycle": [f"{a},{i}" for (a, i) in self.odd_cycle]}


def is_bipartite(graph: FrustrationGraph) -> BipartitenessResult:
    """Breadth-first 2-coloring; on failure returns an odd cycle witness."""
    color: dict = {}
    parent: dict = {}
    for start in graph.vertices:
        if start in color:
            continue
        color[start] = 0
        parent[start] = None
        queue = [start]
        while queue:
            v = queue.pop(0)
            for u in graph.neighbors(v):
                if u not in color:
                    color[u] = color[v] ^ 1
                    parent[u] = v
                    queue.append(u)
                elif color[u] == color[v]:
                    return BipartitenessResult(False, None, _odd_cycle(parent, v, u))
    return BipartitenessResult(True, color, None)


def _odd_cycle(parent, v, u):
    av = _ancestry(parent, v)
    au = _ancestry(parent, u)
    seen = set(av)
    meet = next(x for x in au if x in seen)
    path_v = av[: av.index(meet) + 1]  # v ... meet
    path_u = au[: au.index(meet)]      # u ... child of meet
    return path_v + path_u[::-1]       # closes with the edge u-v


def _ancestry(parent, v):
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return out


# -- components and quasi-1D isomorphism -----------------------------------------


def connected_components(graph: FrustrationGraph) -> list[FrustrationGraph]:
    seen = set()
    comps = []
    for start in graph.vertices:
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in graph.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        comps.append(graph.induced(comp))
    return comps


def relabel_compact(graph: FrustrationGraph) -> FrustrationGraph:
    """Rename vertices so each species' positions become 0..m-1 in order.

    This maps a sublattice component (every other site, say) back onto a
    dense quasi-1D grid so the shift/reflection search applies.
    """
    by_species: dict[int, list[int]] = {}
    for a, i in graph.vertices:
        by_species.setdefault(a, []).append(i)
    sp_map = {a: k for k, a in enumerate(sorted(by_species))}
    pos_map = {}
    m = None
    for a, positions in by_species.items():
        positions.sort()
        if m is None:
            m = len(positions)
        elif len(positions) != m:
            raise ValueError("component is not a uniform sublattice")
        for k, i in enumerate(positions):
            pos_map[(a, i)] = (sp_map[a], k)
    vs = sorted(pos_map[v] for v in graph.vertices)
    adj = {}
    for v in graph.vertices:
        adj[pos_map[v]] = sorted(pos_map[u] for u in graph.adjacency[v])
    return FrustrationGraph(len(by_species), m, graph.boundary, adj, vs)


def graph_isomorphic_1d(g1: FrustrationGraph, g2: FrustrationGraph) -> bool:
    """Isomorphism of quasi-1D frustration graphs.

    Fast path: species permutation composed with a spatial shift and an
    optional reflection.  Components on sublattices are compacted first.
    When the structured search fails the verdict falls back to a general
    isomorphism test, which covers relabelings that mix species.
    """
    if g1.boundary != "periodic" or g2.boundary != "periodic":
        return _nx_isomorphic(g1, g2)
    try:
        c1 = relabel_compact(g1)
        c2 = relabel_compact(g2)
    except ValueError:
        return _nx_isomorphic(g1, g2)
    if c1.n_species != c2.n_species or len(c1.vertices) != len(c2.vertices):
        return False
    m = max(i for _, i in c1.vertices) + 1
    if m != max(i for _, i in c2.vertices) + 1:
        return False
    e2 = {(v, u) for v in c2.vertices for u in c2.adjacency[v]}
    ecount1 = sum(len(c1.adjacency[v]) for v in c1.vertices)
    from itertools import permutations

    if ecount1 == len(e2):
        for perm in permutations(range(c1.n_species)):
            for refl in (1, -1):
                for shift in range(m):
                    ok = True
                    for (a, i) in c1.vertices:
                        for (b, j) in c1.adjacency[(a, i)]:
                            vm = (perm[a], (refl * i + shift) % m)
                            um = (perm[b], (refl * j + shift) % m)
                            if (vm, um) not in e2:
                                ok = False
                                break
                        if not ok:
                            break
                    if ok:
                        return True
    return _nx_isomorphic(c1, c2)


def _nx_isomorphic(g1: FrustrationGraph, g2: FrustrationGraph) -> bool:
    import networkx as nx

    n1 = nx.Graph()
    n1.add_nodes_from(g1.vertices)
    n1.add_edges_from(g1.edges())
    n2 = nx.Graph()
    n2.add_nodes_from(g2.vertices)
    n2.add_edges_from(g2.edges())
    return nx.is_isomorphic(n1, n2)


# -- global symmetries ------------------------------------------------------------


def find_symmetries(ens: MeasurementEnsemble, L: int,
                    boundary: str | None = None) -> list[PauliString]:
    """GF(2) basis of global Pauli strings commuting with every placement."""
    if boundary is None:
        boundary = ens.boundary
    npos = L if boundary == "periodic" else L - ens.r + 1
    if npos <= 0:
        raise ValueError("system too small for the ensemble range")
    rows = []
    periodic = boundary == "periodic"
    for s in ens.species:
        for i in range(npos):
            placed = s.embed(L, i, periodic=periodic)
            rows.append(placed.z | (placed.x << L))  # tests symplectic vs (x | z<<L)
    kernel = gf2_kernel_masks(rows, 2 * L)
    out = []
    full = (1 << L) - 1
    for v in kernel:
        x = v & full
        z = v >> L
        out.append(PauliString(L, x, z))
    return out


# -- averaged frustration -----------------------------------------------------------


def averaged_frustration(ens: MeasurementEnsemble, max_pairs: int = 10**6,
                         rng: np.random.Generator | None = None,
                         n_samples: int = 200_000):
    """Probability that two independent draws anticommute, per displacement.

    Exact enumeration over species pairs up to ``max_pairs``; Monte Carlo
    with a reported standard error beyond that.  Returns (values, stderr)
    arrays indexed like the tensor displacement axis.
    """
    import math

    A = ens.n_species
    r = ens.r
    if A * A <= max_pairs:
        tensor = build_tensor(ens)
        p = ens.probs
        vals = np.zeros(2 * r - 1)
        for k in range(2 * r - 1):
            ia, ib = np.nonzero(tensor.gamma[:, :, k])
            vals[k] = math.fsum((p[ia] * p[ib]).tolist())
        return vals, np.zeros_like(vals)
    if rng is None:
        rng = np.random.default_rng(0)
    win = 3 * r
    draws_a = np.searchsorted(np.cumsum(ens.probs), rng.random(n_samples))
    draws_b = np.searchsorted(np.cumsum(ens.probs), rng.random(n_samples))
    vals = np.zeros(2 * r - 1)
    errs = np.zeros(2 * r - 1)
    xs = np.array([s.x for s in ens.species], dtype=np.uint64)
    zs = np.array([s.z for s in ens.species], dtype=np.uint64)
    for k, ell in enumerate(range(-(r - 1), r)):
        if ell >= 0:
            xb = xs[draws_b] << np.uint64(ell)
            zb = zs[draws_b] << np.uint64(ell)
            xa, za = xs[draws_a], zs[draws_a]
        else:
            xa = xs[draws_a] << np.uint64(-ell)
            za = zs[draws_a] << np.uint64(-ell)
            xb, zb = xs[draws_b], zs[draws_b]
        bits = (np.bitwise_count((xa & zb) ^ (za & xb)) & 1).astype(np.float64)
        vals[k] = bits.mean()
        errs[k] = bits.std(ddof=1) / np.sqrt(n_samples)
    return vals, errs


def closed_form_factorizable(q, r: int, ell: int) -> float:
    """Averaged frustration of an identity-free factorizable ensemble.

    Valid for q = (0, q_X, q_Y, q_Z); returns 0 outside the overlap range.
    """
    q = np.asarray(q, dtype=float)
    if q.shape == (4,):
        if q[0] > 1e-15:
            raise ValueError("closed form requires zero identity weight")
        q = q[1:]
    if abs(ell) >= r:
        return 0.0
    dq2 = float(np.sum((q - 1.0 / 3.0) ** 2))
    return 0.5 - 0.5 * (2.0 * dq2 - 1.0 / 3.0) ** (r - abs(ell))


# -- graph-driven purification ---------------------------------------------------


def graph_purification(tensor: FrustrationTensor, L: int, T: float,
                       rng: np.random.Generator,
                       probs: np.ndarray | None = None,
                       boundary: str = "periodic",
                       record_times: np.ndarray | None = None):
    """Purification from the fully mixed state using only the tensor.

    Stabilizer generators are carried as GF(2) coefficient vectors over the
    placed-operator basis; the species operators and their translates must
    be algebraically independent (the caller asserts this; it typically
    holds for two-species ensembles).  Returns (times, k) sampled at
    ``record_times`` (defaults to every 1/4 time unit).
    """
    A, r = tensor.n_species, tensor.r
    if L < r:
        raise ValueError("system smaller than the ensemble range")
    if probs is None:
        probs = np.full(A, 1.0 / A)
    cum = np.cumsum(probs)
    periodic = boundary == "periodic"
    npos = L if periodic else L - r + 1
    if record_times is None:
        record_times = np.arange(0.0, T + 1e-9, 0.25)
    record_times = np.asarray(record_times, dtype=float)
    m_marks = np.round(record_times * L).astype(int)
    total = int(round(T * L))

    # anticommutation masks: for species a, spread[a][b] = bit pattern of
    # displacements ell with gamma=1, applied at a position offset
    vecs: list[int] = []  # current generators as coefficient masks
    ech: list[int] = []   # echelon of vecs, rebuilt lazily
    piv: list[int] = []
    dirty = False

    def vertex_bit(b: int, j: int) -> int:
        return 1 << (b * npos + j)

    times_out = []
    k_out = []
    mi = 0
    for m in range(total + 1):
        while mi < len(m_marks) and m_marks[mi] == m:
            times_out.append(record_times[mi])
            k_out.append(L - len(vecs))
            mi += 1
        if m == total:
            break
        a = int(np.searchsorted(cum, rng.random()))
        a = min(a, A - 1)
        pos = int(rng.integers(0, npos))
        w = 0
        for b in range(A):
            for ell in tensor.displacements():
                if not tensor.gamma[a, b, r - 1 + ell]:
                    continue
                j = pos - ell
                if periodic:
                    j %= L
                    if j >= npos:
                        continue
                elif not 0 <= j < npos:
                    continue
                w |= vertex_bit(b, j)
        anti = [i for i, v in enumerate(vecs) if (v & w).bit_count() & 1]
        unit = vertex_bit(a, pos)
        if anti:
            f = anti[0]
            for i in anti[1:]:
                vecs[i] ^= vecs[f]
            vecs[f] = unit
            dirty = True
            rng.integers(0, 2)  # outcome bit, kept for stream parity
            continue
        if dirty or len(ech) != len(vecs):
            ech = []
            piv = []
            for v in vecs:
                v = _reduce(v, ech, piv)
                if v:
                    _insert(v, ech, piv)
            dirty = False
        red = _reduce(unit, ech, piv)
        if red:
            vecs.append(unit)
            _insert(red, ech, piv)
            rng.integers(0, 2)
    return np.asarray(times_out), np.asarray(k_out, dtype=np.int64)


def _reduce(v: int, ech: list[int], piv: list[int]) -> int:
    for row, p in zip(ech, piv):
        if (v >> p) & 1:
            v ^= row
    return v


def _insert(v: int, ech: list[int], piv: list[int]) -> None:
    p = (v & -v).bit_length() - 1
    for i in range(len(ech)):
        if (ech[i] >> p) & 1:
            ech[i] ^= v
    ech.append(v)
    piv.append(p)
