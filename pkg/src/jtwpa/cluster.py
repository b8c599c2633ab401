"""Continuous-variable cluster states from engineered squeezed baths.

A weighted graph with adjacency ``A`` defines nullifiers
``y_v - sum_w A_vw x_w``.  When ``A`` is bicolorable and self-inverse
(``A @ A = I``) the jump operators ``cosh(r) c_v - i sinh(r) sum_w A_vw c_w^dag``
drive every mode into a finitely squeezed approximation of the cluster
state, with nullifier variance ``exp(-2 r)`` (vacuum = 1/2 convention).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .errors import GraphError
from .gaussian import (GaussianState, bath_jump_operators, covariance_flow,
                       gaussian_steady_state)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)


@dataclass(frozen=True)
class ClusterGraph:
    adjacency: np.ndarray
    coloring: Optional[tuple] = None

    def __post_init__(self):
        a = np.asarray(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError("adjacency must be square")
        if np.max(np.abs(a - a.T), initial=0.0) > 1e-14:
            raise GraphError("adjacency is not symmetric")
        if np.max(np.abs(np.diag(a)), initial=0.0) > 1e-14:
            raise GraphError("adjacency has self-loops (non-zero diagonal)")
        if np.max(np.abs(a), initial=0.0) > 1 + 1e-12:
            raise GraphError("edge weights must lie in [-1, 1]")
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self):
        return self.adjacency.shape[0]

    @classmethod
    def from_edges(cls, n, edges):
        a = np.zeros((n, n))
        for v, w, weight in edges:
            if v == w:
                raise GraphError(f"self-loop on vertex {v}")
            a[v, w] = a[w, v] = weight
        return cls(a)

    def edges(self, tol=1e-14):
        iu = np.argwhere(np.triu(np.abs(self.adjacency) > tol))
        return [(int(v), int(w), float(self.adjacency[v, w])) for v, w in iu]

    def to_dict(self):
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_dict(cls, data):
        return cls.from_edges(int(data["n"]), [(int(v), int(w), float(x)) for v, w, x in data["edges"]])

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class GraphReport:
    bicolorable: bool
    self_inverse: bool
    d_v: np.ndarray
    d_ww: np.ndarray
    coloring: Optional[tuple] = None

    @property
    def valid(self):
        return self.bicolorable and self.self_inverse


def two_coloring(g: ClusterGraph, tol=1e-14):
    """Colour per vertex (0/1), or ``None`` when the graph has an odd cycle."""
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n))
    graph.add_edges_from((v, w) for v, w, _ in g.edges(tol))
    if not nx.is_bipartite(graph):
        return None
    colors = nx.bipartite.color(graph)
    return tuple(int(colors[v]) for v in range(g.n))


def validate_graph(g: ClusterGraph, atol=1e-10) -> GraphReport:
    """Bicolorability and self-inverseness of ``g``.

    ``D_v = sum_w A_vw^2`` and ``D_ww' = sum_v A_vw A_vw'``.  The path-sum
    test and the direct ``A @ A = I`` test must agree.
    """
    a = g.adjacency
    d = a.T @ a
    d_v = np.diag(d).copy()
    d_ww = d - np.diag(d_v)
    by_paths = bool(np.all(np.abs(d_v - 1) <= atol) and np.all(np.abs(d_ww) <= atol))
    by_square = bool(np.allclose(a @ a, np.eye(g.n), rtol=0, atol=atol))
    if by_paths != by_square:
        raise GraphError("path-sum and matrix-square self-inverse tests disagree")
    coloring = two_coloring(g)
    return GraphReport(coloring is not None, by_square, d_v, d_ww, coloring)


@dataclass(frozen=True)
class MacronodeLayout:
    """Frequency comb layout of ``2 d`` squeezing sources.

    Frequencies are ``omega0 + m delta`` for ``m = 0..n_freqs-1``.  Each
    pump is ``(source, i)`` with ``Omega_i = omega0 + i delta / 2`` and pairs
    frequencies ``m + n = i`` inside that source.  Vertex ``m * 2d + s`` is
    frequency ``m`` of source ``s``; one macronode holds the ``2d`` modes
    sharing a frequency.
    """

    d: int
    n_freqs: int
    omega0: float
    delta: float
    pumps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.d < 1 or self.n_freqs < 2:
            raise GraphError("need d >= 1 and at least two frequencies")
        for s, i in self.pumps:
            if not 0 <= s < self.n_sources:
                raise GraphError(f"pump source {s} outside 0..{self.n_sources - 1}")
        object.__setattr__(self, "pumps", tuple((int(s), int(i)) for s, i in self.pumps))

    @property
    def n_sources(self):
        return 2 * self.d

    @property
    def n_modes(self):
        return self.n_sources * self.n_freqs

    def vertex(self, m, s):
        return m * self.n_sources + s

    def macronode_index(self, m):
        return (-1) ** m * m

    def pump_frequency(self, i):
        return self.omega0 + i * self.delta / 2

    def frequency(self, m):
        return self.omega0 + m * self.delta

    def pairs(self, i):
        """Frequency pairs ``m < n`` with ``m + n = i`` on the grid."""
        return [(m, i - m) for m in range(self.n_freqs) if m < i - m < self.n_freqs]

    def to_dict(self):
        return {"d": self.d, "n_freqs": self.n_freqs, "omega0": self.omega0,
                "delta": self.delta, "pumps": [list(p) for p in self.pumps]}


def build_pair_graph(layout: MacronodeLayout, m_magnitude=1.0) -> ClusterGraph:
    """Disjoint two-mode-squeezing pairs generated by the pumps.

    ``m_magnitude`` is a scalar (flat spectrum, unit weights) or a
    per-frequency array; edge weights are then the mean of ``|M|`` at the
    two frequencies divided by its maximum, so any dip below the flat value
    shows up as a non-self-inverse graph.
    """
    mags = np.broadcast_to(np.abs(np.asarray(m_magnitude, dtype=float)), (layout.n_freqs,))
    if not np.all(mags > 0):
        raise GraphError("squeezing magnitude must be positive")
    scale = mags / np.max(mags)
    a = np.zeros((layout.n_modes, layout.n_modes))
    for s, i in layout.pumps:
        pairs = layout.pairs(i)
        if not pairs:
            raise GraphError(f"pump index {i} of source {s} pairs no frequencies on the grid")
        for m, n in pairs:
            v, w = layout.vertex(m, s), layout.vertex(n, s)
            if a[v].any() or a[w].any():
                raise GraphError(f"mode of frequency {m} or {n} in source {s} is pumped twice")
            a[v, w] = a[w, v] = 0.5 * (scale[m] + scale[n])
    return ClusterGraph(a)


def hadamard_matrix(layout: MacronodeLayout):
    """Block-diagonal ``R = sum_M H^{(x) d}`` acting within each macronode."""
    block = np.array([[1.0]])
    for _ in range(layout.d):
        block = np.kron(block, HADAMARD)
    if block.shape[0] != layout.n_sources:
        raise GraphError(f"H^(x){layout.d} has size {block.shape[0]}, macronodes have {layout.n_sources} modes")
    return np.kron(np.eye(layout.n_freqs), block)


def hadamard_transform(g: ClusterGraph, layout: MacronodeLayout) -> ClusterGraph:
    """Graph after the macronode Hadamard interferometers, ``R A R^T``."""
    if g.n != layout.n_modes:
        raise GraphError(f"graph has {g.n} vertices, layout has {layout.n_modes} modes")
    r = hadamard_matrix(layout)
    a = r @ g.adjacency @ r.T
    a[np.abs(a) < 1e-15] = 0.0
    if np.max(np.abs(np.diag(a))) > 1e-12:
        raise GraphError("interferometer produces self-loops; pair modes across macronodes")
    np.fill_diagonal(a, 0.0)
    out = ClusterGraph(0.5 * (a + a.T))
    report = validate_graph(out)
    if validate_graph(g).self_inverse and not report.self_inverse:
        raise GraphError("transformed graph lost self-inverseness")
    return out


def squeezing_from_epsilon(eps):
    """Squeezing ``r`` with ``sinh(2r) = 1/eps`` (``|M| = 1/(2 eps)``)."""
    return 0.5 * math.asinh(1 / eps)


def lindblad_operators(g: ClusterGraph, *, r=None, epsilon=None):
    """Jump-operator coefficients ``(alpha, beta)``, ``L_v = alpha_v.c + beta_v.c^dag``.

    ``r`` selects the bath form ``cosh(r) c_v - i sinh(r) sum_w A_vw c_w^dag``
    (valid graphs only); ``epsilon`` selects the exact form
    ``y_v - sum_w A_vw x_w - i eps x_v`` for any graph.
    """
    if (r is None) == (epsilon is None):
        raise ValueError("give exactly one of r or epsilon")
    a = g.adjacency
    eye = np.eye(g.n)
    if r is not None:
        if r < 0:
            raise ValueError("r must be non-negative")
        if not validate_graph(g).valid:
            raise GraphError("cosh/sinh form requires a bicolorable self-inverse graph")
        return math.cosh(r) * eye + 0j, -1j * math.sinh(r) * a + 0j
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    s = 1 / math.sqrt(2)
    # x = (c + c^dag)/sqrt2, y = -i (c - c^dag)/sqrt2
    alpha = s * (-1j * eye - a - 1j * epsilon * eye)
    beta = s * (1j * eye - a - 1j * epsilon * eye)
    return alpha, beta


def cluster_steady_state(g: ClusterGraph, *, r=None, epsilon=None) -> GaussianState:
    return gaussian_steady_state(*lindblad_operators(g, r=r, epsilon=epsilon))


def ideal_z(g: ClusterGraph, r):
    """Complex graph matrix of the pure steady state for squeezing ``r``."""
    return math.tanh(2 * r) * g.adjacency + 1j * np.eye(g.n) / math.cosh(2 * r)


def nullifier_variances(g: ClusterGraph, state: GaussianState):
    """``Var(y_v - sum_w A_vw x_w)`` for every vertex."""
    if state.n_modes != g.n:
        raise ValueError("state and graph sizes differ")
    coeffs = np.hstack([-g.adjacency, np.eye(g.n)])
    return np.einsum("vi,ij,vj->v", coeffs, state.cov, coeffs)


def bath_from_interferometer(n_matrix, x_matrix, network, atol=1e-10):
    """Moments of the bath after a passive linear network ``b -> U b``.

    Returns ``(U^* N U^T, U X U^T)`` for ``N = <b^dag b>`` and ``X = <b b>``.
    """
    u = np.asarray(network, dtype=complex)
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol):
        raise GraphError("interferometer network is not unitary")
    n_matrix = np.asarray(n_matrix, dtype=complex)
    x_matrix = np.asarray(x_matrix, dtype=complex)
    return u.conj() @ n_matrix @ u.T, u @ x_matrix @ u.T


def source_moments(g: ClusterGraph, r):
    """Moments ``(N, X)`` of quantum-limited two-mode squeezing on graph ``g``."""
    n = math.sinh(r) ** 2
    m = math.sinh(r) * math.cosh(r)
    return n * np.eye(g.n) + 0j, 1j * m * g.adjacency + 0j


def bath_steady_state(n_matrix, x_matrix) -> GaussianState:
    return gaussian_steady_state(*bath_jump_operators(n_matrix, x_matrix))


@dataclass(frozen=True)
class ClusterReport:
    graph: ClusterGraph
    state: GaussianState
    nullifiers: np.ndarray
    report: GraphReport

    def to_dict(self):
        out = self.state.to_dict()
        out["nullifier_variances"] = [float(x) for x in self.nullifiers]
        return out


def run_layout(layout: MacronodeLayout, r, *, hadamard=True, via_bath=True) -> ClusterReport:
    """Pair graph, optional interferometer, and the resulting steady state."""
    pairs = build_pair_graph(layout)
    graph = hadamard_transform(pairs, layout) if hadamard else pairs
    report = validate_graph(graph)
    if via_bath:
        n_mat, x_mat = source_moments(pairs, r)
        if hadamard:
            n_mat, x_mat = bath_from_interferometer(n_mat, x_mat, hadamard_matrix(layout))
        state = bath_steady_state(n_mat, x_mat)
    else:
        state = cluster_steady_state(graph, r=r)
    return ClusterReport(graph, state, nullifier_variances(graph, state), report)


def flow_agreement(g: ClusterGraph, r, t_final=40.0, steps=8000):
    """Max deviation between the Lyapunov solution and RK4 flow from vacuum."""
    alpha, beta = lindblad_operators(g, r=r)
    ss = gaussian_steady_state(alpha, beta)
    flowed = covariance_flow(alpha, beta, 0.5 * np.eye(2 * g.n), t_final, steps)
    return float(np.max(np.abs(flowed - ss.cov)))


def random_self_inverse(n_pairs, rng, n_mix=None, perturb=0.0):
    """Random bicolorable self-inverse graph: signed pairs mixed by Hadamards.

    Starts from ``n_pairs`` disjoint edges between colour classes, applies
    random signed permutations and Hadamard rotations within each colour
    class, so ``A = [[0, B], [B^T, 0]]`` with orthogonal ``B``.
    """
    k = n_pairs
    b = np.diag(rng.choice([-1.0, 1.0], size=k))
    mixes = k if n_mix is None else n_mix
    for _ in range(mixes):
        if k < 2:
            break
        i, j = rng.choice(k, size=2, replace=False)
        rot = np.eye(k)
        rot[np.ix_([i, j], [i, j])] = HADAMARD
        b = rot @ b if rng.random() < 0.5 else b @ rot
    b = b[rng.permutation(k)][:, rng.permutation(k)]
    a = np.block([[np.zeros((k, k)), b], [b.T, np.zeros((k, k))]])
    if perturb:
        mask = np.abs(a) > 0
        noise = np.triu(rng.normal(scale=perturb, size=a.shape) * mask, 1)
        a = a + noise + noise.T
        a = np.clip(a, -1, 1)
    a[np.abs(a) < 1e-15] = 0.0
    return ClusterGraph(a)


def graph_from_layout_name(name: str) -> MacronodeLayout:
    """Shipped example layouts: ``ring8``, ``ring16``, ``d2_16``."""
    layouts = {
        "ring8": MacronodeLayout(1, 4, 0.0, 1.0, ((0, 1), (0, 5), (1, 3))),
        "ring16": MacronodeLayout(1, 8, 0.0, 1.0, ((0, 7), (1, 1), (1, 9))),
        "d2_16": MacronodeLayout(2, 4, 0.0, 1.0, ((0, 1), (0, 5), (1, 3), (2, 3), (3, 3))),
    }
    if name not in layouts:
        raise GraphError(f"unknown layout {name!r}; choose from {sorted(layouts)}")
    return layouts[name]


def summarize(values: Sequence[float]):
    v = np.asarray(values)
    return {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}
