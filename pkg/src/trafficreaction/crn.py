"""Segmented roads as mass-action chemical reaction networks.

Each segment i carries two species: vehicles N_i and free space slots S_i.
A vehicle moving from segment a to segment b is the bimolecular reaction

    N_a + S_b  ->  N_b + S_a

and ramps add the unimolecular reactions S_i -> N_i (on) and N_i -> S_i (off).
Concentrations n_i, s_i are densities per unit length; n_i + s_i = c_i is
conserved per segment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import networkx as nx
import numpy as np
from scipy.integrate import solve_ivp

from .core import DomainError


@dataclass(frozen=True)
class Reaction:
    source: int
    product: int
    rate: float
    kind: str = "transport"  # transport | on | off


@dataclass(frozen=True)
class ReactionNetwork:
    """Species, complexes (columns of Y) and mass-action reactions.

    ``Y[l, j]`` is the stoichiometric coefficient of species l in complex j.
    """

    species: tuple
    Y: np.ndarray
    reactions: tuple
    n_segments: int = 0
    topology: str = "line"

    def __post_init__(self):
        Y = np.array(self.Y, dtype=np.int64)
        if Y.ndim != 2 or Y.shape[0] != len(self.species):
            raise ValueError("Y must be species x complexes")
        if np.any(Y < 0):
            raise ValueError("stoichiometric coefficients must be nonnegative")
        Y.flags.writeable = False
        object.__setattr__(self, "Y", Y)
        for r in self.reactions:
            if not (0 <= r.source < Y.shape[1] and 0 <= r.product < Y.shape[1]):
                raise ValueError(f"reaction {r} references an unknown complex")
            if not r.rate > 0:
                raise ValueError(f"reaction {r} has a nonpositive rate")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_complexes(self) -> int:
        return self.Y.shape[1]

    @property
    def complexes(self) -> list[dict]:
        return [{self.species[l]: int(c) for l, c in enumerate(col) if c}
                for col in self.Y.T]

    def complex_label(self, j: int) -> str:
        parts = []
        for l, c in enumerate(self.Y[:, j]):
            if c:
                parts.append(self.species[l] if c == 1 else f"{c}{self.species[l]}")
        return "+".join(parts) or "0"

    @property
    def reaction_vectors(self) -> np.ndarray:
        """Rows Y[:, product] - Y[:, source], one per reaction."""
        if not self.reactions:
            return np.zeros((0, self.n_species), dtype=np.int64)
        src = np.array([r.source for r in self.reactions])
        prd = np.array([r.product for r in self.reactions])
        return (self.Y[:, prd] - self.Y[:, src]).T

    @property
    def rates(self) -> np.ndarray:
        return np.array([r.rate for r in self.reactions], dtype=float)


def build_network(segments: int, topology: str = "line", k=1.0,
                  k_on: Optional[Sequence[float] | dict] = None,
                  k_off: Optional[Sequence[float] | dict] = None) -> ReactionNetwork:
    """Compile a segmented road into a reaction network.

    Args:
        segments: number of road segments.
        topology: "line" (open chain 1 -> 2 -> ... -> N) or "ring" (N -> 1 closes it).
        k: transport rate per interface, scalar or one value per interface
            (N - 1 on a line, N on a ring; interface i joins segment i to i + 1).
        k_on, k_off: ramp rates, either one value per segment (zeros skip the
            reaction) or a mapping {segment (1-based): rate}.
    """
    if topology not in ("line", "ring"):
        raise ValueError(f"invalid topology {topology!r}")
    if int(segments) != segments or segments < 1 or (topology == "ring" and segments < 2):
        raise ValueError("need at least 1 segment on a line and 2 on a ring")
    n = int(segments)
    n_if = n - 1 if topology == "line" else n
    k = np.asarray(k, dtype=float)
    ks = np.broadcast_to(k, (n_if,)) if k.ndim == 0 else k
    if ks.shape != (n_if,):
        raise ValueError(f"expected {n_if} interface rates, got {ks.size}")
    if np.any(ks <= 0):
        raise ValueError("transport rates must be positive")

    species = tuple(f"N_{i}" for i in range(1, n + 1)) + tuple(f"S_{i}" for i in range(1, n + 1))
    cols: list[tuple] = []
    index: dict[tuple, int] = {}

    def complex_of(counts: dict[int, int]) -> int:
        key = tuple(sorted(counts.items()))
        if key not in index:
            index[key] = len(cols)
            cols.append(key)
        return index[key]

    reactions = []
    for i in range(n_if):
        a, b = i, (i + 1) % n
        src = complex_of({a: 1, n + b: 1})
        prd = complex_of({b: 1, n + a: 1})
        reactions.append(Reaction(src, prd, float(ks[i]), "transport"))

    for kind, rates in (("on", k_on), ("off", k_off)):
        for i, rate in _ramp_items(rates, n):
            if rate < 0:
                raise ValueError("ramp rates must be nonnegative")
            if rate == 0:
                continue
            s_i, n_i = complex_of({n + i: 1}), complex_of({i: 1})
            src, prd = (s_i, n_i) if kind == "on" else (n_i, s_i)
            reactions.append(Reaction(src, prd, float(rate), kind))

    Y = np.zeros((2 * n, len(cols)), dtype=np.int64)
    for j, key in enumerate(cols):
        for l, c in key:
            Y[l, j] = c
    return ReactionNetwork(species, Y, tuple(reactions), n, topology)


def _ramp_items(rates, n: int):
    if rates is None:
        return []
    if isinstance(rates, dict):
        out = []
        for seg, rate in sorted(rates.items()):
            if not 1 <= int(seg) <= n:
                raise ValueError(f"ramp segment {seg} outside 1..{n}")
            out.append((int(seg) - 1, float(rate)))
        return out
    arr = np.asarray(rates, dtype=float).reshape(-1)
    if arr.size != n:
        raise ValueError(f"expected {n} ramp rates, got {arr.size}")
    return list(enumerate(arr.tolist()))


def reaction_rates(net: ReactionNetwork, x) -> np.ndarray:
    """Mass-action rates k * prod_l x_l^{Y[l, source]}."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n_species,):
        raise ValueError(f"expected {net.n_species} concentrations")
    if np.any(x < 0):
        raise DomainError("concentrations must be nonnegative")
    if not net.reactions:
        return np.zeros(0)
    src = net.Y[:, [r.source for r in net.reactions]]
    return net.rates * np.prod(x[:, None] ** src, axis=0)


def mass_action_rhs(net: ReactionNetwork, x) -> np.ndarray:
    """dx/dt = sum over reactions of (Y[:, product] - Y[:, source]) * rate(x)."""
    rates = reaction_rates(net, x)
    if rates.size == 0:
        return np.zeros(net.n_species)
    return net.reaction_vectors.T @ rates


def ode_terms(net: ReactionNetwork) -> list[tuple[int, float, np.ndarray]]:
    """Monomials of the kinetic ODE as (species, signed coefficient, exponents)."""
    terms = []
    for r, vec in zip(net.reactions, net.reaction_vectors):
        expo = net.Y[:, r.source].copy()
        for l in np.nonzero(vec)[0]:
            terms.append((int(l), float(vec[l] * r.rate), expo))
    return terms


@dataclass(frozen=True)
class ReducedTRM:
    """The vehicle-only field after eliminating s_i = c_i - n_i.

    For a transport reaction a -> b with rate k the flow
    k * n_a * (c_b - n_b) leaves a and enters b; ramps give
    k_on (c_i - n_i) - k_off n_i.
    """

    capacities: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    k: np.ndarray
    on_idx: np.ndarray
    on_k: np.ndarray
    off_idx: np.ndarray
    off_k: np.ndarray

    def __call__(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        c = self.capacities
        if np.any(n < -1e-12) or np.any(n > c + 1e-12):
            raise DomainError("vehicle densities must lie in [0, c_i]")
        out = np.zeros_like(n)
        # rate k * n_a * s_b with the free space s_b = c_b - n_b substituted
        q = self.k * (n[self.src] * (c[self.dst] - n[self.dst]))
        np.add.at(out, self.dst, q)
        np.subtract.at(out, self.src, q)
        ramp = np.zeros_like(n)
        np.add.at(ramp, self.on_idx, self.on_k * (c[self.on_idx] - n[self.on_idx]))
        np.subtract.at(ramp, self.off_idx, self.off_k * n[self.off_idx])
        return out + ramp


def reduce_to_trm(net: ReactionNetwork, capacities) -> ReducedTRM:
    """Eliminate the space species of a road network built by ``build_network``."""
    n = net.n_segments
    if n == 0 or net.n_species != 2 * n:
        raise ValueError("reduction needs a network produced by build_network")
    c = np.broadcast_to(np.asarray(capacities, dtype=float), (n,)).copy()
    if np.any(c <= 0):
        raise ValueError("capacities must be positive")
    src, dst, ks = [], [], []
    ramps = {"on": ([], []), "off": ([], [])}
    for r in net.reactions:
        s_col, p_col = net.Y[:, r.source], net.Y[:, r.product]
        if r.kind == "transport":
            a = int(np.nonzero(s_col[:n])[0][0])
            b = int(np.nonzero(p_col[:n])[0][0])
            src.append(a)
            dst.append(b)
            ks.append(r.rate)
        else:
            seg = int(np.nonzero((s_col + p_col)[:n])[0][0])
            ramps[r.kind][0].append(seg)
            ramps[r.kind][1].append(r.rate)
    as_i = lambda v: np.array(v, dtype=np.int64)
    as_f = lambda v: np.array(v, dtype=float)
    return ReducedTRM(c, as_i(src), as_i(dst), as_f(ks), as_i(ramps["on"][0]), as_f(ramps["on"][1]),
                      as_i(ramps["off"][0]), as_f(ramps["off"][1]))


def _independent_rows(vectors) -> list[int]:
    """Indices of a maximal linearly independent subset, by exact elimination."""
    basis: list[tuple[int, list[Fraction]]] = []  # (pivot column, reduced row)
    keep = []
    for idx, vec in enumerate(vectors):
        row = [Fraction(int(v)) for v in vec]
        for pivot, b in basis:
            if row[pivot]:
                factor = row[pivot] / b[pivot]
                row = [x - factor * y for x, y in zip(row, b)]
        nz = next((j for j, x in enumerate(row) if x), None)
        if nz is not None:
            basis.append((nz, row))
            keep.append(idx)
    return keep


def stoichiometric_subspace(net: ReactionNetwork) -> np.ndarray:
    """A basis of span{Y[:, product] - Y[:, source]} made of reaction vectors.

    Returned as an integer array with one basis vector per row.
    """
    vecs = net.reaction_vectors
    keep = _independent_rows(vecs)
    return vecs[keep] if keep else np.zeros((0, net.n_species), dtype=np.int64)


@dataclass
class CompatibilityReport:
    passed: bool
    max_residual: float
    min_value: float
    violations: list


def compatibility_class_check(states, net: ReactionNetwork, tol: float = 1e-9) -> CompatibilityReport:
    """Check x(t) - x(0) stays in the stoichiometric subspace and x(t) >= 0.

    ``states`` is a (K, n_species) array of sampled concentrations.
    """
    X = np.atleast_2d(np.asarray(states, dtype=float))
    basis = stoichiometric_subspace(net).astype(float)
    D = X - X[0]
    if basis.shape[0]:
        q, _ = np.linalg.qr(basis.T)
        resid = D - (D @ q) @ q.T
    else:
        resid = D
    res = np.abs(resid).max(axis=1)
    violations = []
    for k in np.nonzero(res > tol)[0]:
        violations.append(f"sample {k}: off the compatibility class by {res[k]:.3g}")
    for k in np.nonzero(X.min(axis=1) < -tol)[0]:
        violations.append(f"sample {k}: negative concentration {X[k].min():.3g}")
    return CompatibilityReport(not violations, float(res.max()), float(X.min()), violations)


def simulate_mass_action(net: ReactionNetwork, x0, t_end: float, n_samples: int = 101,
                         rtol: float = 1e-10, atol: float = 1e-12):
    """Integrate the kinetic ODE; returns (times, states of shape (K, n_species))."""
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < 0):
        raise DomainError("initial concentrations must be nonnegative")
    t_eval = np.linspace(0.0, t_end, n_samples)

    def f(_, x):
        return mass_action_rhs(net, np.maximum(x, 0.0))

    sol = solve_ivp(f, (0.0, t_end), x0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.t, sol.y.T


# --- export ---------------------------------------------------------------


def export_reaction_graph(net: ReactionNetwork) -> nx.DiGraph:
    """Weighted directed graph: complexes as vertices, reactions as edges."""
    g = nx.DiGraph()
    for j in range(net.n_complexes):
        g.add_node(j, label=net.complex_label(j))
    for r in net.reactions:
        g.add_edge(r.source, r.product, weight=r.rate, kind=r.kind)
    return g


def to_dot(net: ReactionNetwork, header: str | None = None) -> str:
    lines = []
    if header:
        lines += [f"// {h}" for h in header.splitlines()]
    lines.append("digraph reaction_graph {")
    lines.append("  rankdir=LR;")
    for j in range(net.n_complexes):
        lines.append(f'  c{j} [label="{net.complex_label(j)}"];')
    for r in net.reactions:
        lines.append(f'  c{r.source} -> c{r.product} [label="{r.rate:.6g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json_dict(net: ReactionNetwork) -> dict:
    return {
        "species": list(net.species),
        "topology": net.topology,
        "segments": net.n_segments,
        "complexes": net.complexes,
        "reactions": [
            {"source": r.source, "product": r.product, "rate": r.rate, "kind": r.kind,
             "label": f"{net.complex_label(r.source)} -> {net.complex_label(r.product)}"}
            for r in net.reactions
        ],
        "Y": net.Y.tolist(),
    }


def to_json(net: ReactionNetwork, **extra) -> str:
    doc = to_json_dict(net)
    doc.update(extra)
    return json.dumps(doc, indent=2)
