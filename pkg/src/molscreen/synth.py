"""Synthetic benchmark data: random small molecules with a shared latent score.

Every task's label is an affine transform of one latent score that is linear
in four interpretable descriptors (atom count, ring-bond count, heteroatom
count, mean degree), plus optional Gaussian noise.  Tasks therefore share
structure, which is exactly the regime multi-task training and transfer are
supposed to exploit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import TaskDataset
from .engine import rng_stream
from .smiles import parse_smiles

_VALENCE = {6: 4, 7: 3, 8: 2}
_SYMBOL = {6: "C", 7: "N", 8: "O"}

# weights over (atom count, ring-bond count, heteroatom count, mean degree)
DESCRIPTOR_WEIGHTS = np.array([0.08, -0.15, 0.25, -0.4])


def descriptor_vector(smiles: str) -> np.ndarray:
    graph = parse_smiles(smiles)
    n_atoms = len(graph.atoms)
    ring_bonds = sum(1 for b in graph.bonds if b.in_ring)
    heteroatoms = sum(1 for a in graph.atoms if a.atomic_number != 6)
    mean_degree = 2.0 * len(graph.bonds) / n_atoms
    return np.array([n_atoms, ring_bonds, heteroatoms, mean_degree], dtype=np.float64)


def latent_score(smiles: str) -> float:
    return float(np.dot(DESCRIPTOR_WEIGHTS, descriptor_vector(smiles)))


def random_molecule(stream, min_atoms: int = 4, max_atoms: int = 14) -> str:
    """A random connected molecule over C/N/O: a random tree plus up to two
    extra valence-respecting edges (rings), all single bonds."""
    n = int(stream.integers(min_atoms, max_atoms + 1))
    elements = [int(z) for z in stream.choice([6, 7, 8], size=n, p=[0.7, 0.15, 0.15])]
    adjacent: list[set[int]] = [set() for _ in range(n)]

    def capacity(v: int) -> int:
        return _VALENCE[elements[v]] - len(adjacent[v])

    for v in range(1, n):
        candidates = [u for u in range(v) if capacity(u) > 0]
        u = int(candidates[stream.integers(len(candidates))])
        adjacent[u].add(v)
        adjacent[v].add(u)
    for _ in range(int(stream.integers(0, 3))):
        for _attempt in range(10):
            u, v = (int(x) for x in stream.integers(0, n, size=2))
            if u != v and v not in adjacent[u] and capacity(u) > 0 and capacity(v) > 0:
                adjacent[u].add(v)
                adjacent[v].add(u)
                break
    return _graph_to_smiles(elements, adjacent)


def _graph_to_smiles(elements: list[int], adjacent: list[set[int]]) -> str:
    n = len(elements)
    discovered = [-1] * n
    parent = [-1] * n
    children: list[list[int]] = [[] for _ in range(n)]
    ring_partners: list[list[int]] = [[] for _ in range(n)]
    counter = 0
    stack = [(0, iter(sorted(adjacent[0])))]
    discovered[0] = counter
    while stack:
        v, neighbors = stack[-1]
        advanced = False
        for w in neighbors:
            if discovered[w] < 0:
                discovered[w] = (counter := counter + 1)
                parent[w] = v
                children[v].append(w)
                stack.append((w, iter(sorted(adjacent[w]))))
                advanced = True
                break
            if w != parent[v] and discovered[w] < discovered[v]:
                # one ring-closure pair per non-tree edge, recorded at both ends
                ring_partners[v].append(w)
                ring_partners[w].append(v)
        if not advanced:
            stack.pop()

    open_digits: dict[frozenset[int], int] = {}
    free = list(range(99, 0, -1))  # allocate the smallest digit first

    def ring_marks(v: int) -> str:
        marks = []
        for w in sorted(ring_partners[v], key=lambda u: discovered[u]):
            edge = frozenset((v, w))
            if edge in open_digits:
                digit = open_digits.pop(edge)
                free.append(digit)
                free.sort(reverse=True)
            else:
                digit = free.pop()
                open_digits[edge] = digit
            marks.append(str(digit) if digit < 10 else f"%{digit}")
        return "".join(marks)

    def emit(v: int) -> str:
        out = _SYMBOL[elements[v]] + ring_marks(v)
        kids = children[v]
        for c in kids[:-1]:
            out += "(" + emit(c) + ")"
        if kids:
            out += emit(kids[-1])
        return out

    return emit(0)


@dataclass
class SynthMeta:
    """Ground truth behind a generated dataset."""

    seed: int
    n_tasks: int
    a_values: list[float]
    b_values: list[float]
    noise_sigma: float
    latent_scores: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "n_tasks": self.n_tasks,
                "a_values": self.a_values,
                "b_values": self.b_values,
                "noise_sigma": self.noise_sigma,
                "descriptor_weights": DESCRIPTOR_WEIGHTS.tolist(),
                "latent_scores": self.latent_scores.tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SynthMeta":
        raw = json.loads(text)
        return cls(
            seed=raw["seed"],
            n_tasks=raw["n_tasks"],
            a_values=raw["a_values"],
            b_values=raw["b_values"],
            noise_sigma=raw["noise_sigma"],
            latent_scores=np.asarray(raw["latent_scores"], dtype=np.float64),
        )


def synth_dataset(
    n_tasks: int,
    n_per_task: int,
    seed: int,
    noise_sigma: float = 0.1,
    a_values=None,
    b_values=None,
    min_atoms: int = 4,
    max_atoms: int = 14,
) -> tuple[TaskDataset, SynthMeta]:
    """Distinct random molecules, densely labeled for every task."""
    if n_tasks < 2:
        raise ValueError("need at least 2 tasks")
    mol_stream = rng_stream(seed, 0)
    coef_stream = rng_stream(seed, 1)
    noise_stream = rng_stream(seed, 2)
    smiles: list[str] = []
    seen = set()
    while len(smiles) < n_per_task:
        smi = random_molecule(mol_stream, min_atoms, max_atoms)
        if smi not in seen:
            seen.add(smi)
            smiles.append(smi)
    a = (
        list(a_values)
        if a_values is not None
        else coef_stream.uniform(0.5, 1.5, n_tasks).tolist()
    )
    b = (
        list(b_values)
        if b_values is not None
        else coef_stream.uniform(-1.0, 1.0, n_tasks).tolist()
    )
    if len(a) != n_tasks or len(b) != n_tasks:
        raise ValueError("one coefficient pair per task required")
    latent = np.array([latent_score(s) for s in smiles])
    # unit draws scaled afterwards: zero sigma gives exact zeros while
    # consuming the same stream state as any other sigma
    noise = noise_stream.normal(0.0, 1.0, (n_per_task, n_tasks)) * noise_sigma
    labels = latent[:, None] * np.asarray(a) + np.asarray(b) + noise
    ds = TaskDataset.from_smiles(
        smiles,
        labels,
        [f"task{t}" for t in range(n_tasks)],
        ["lower_is_better"] * n_tasks,
    )
    meta = SynthMeta(
        seed=seed,
        n_tasks=n_tasks,
        a_values=a,
        b_values=b,
        noise_sigma=noise_sigma,
        latent_scores=latent,
    )
    return ds, meta


def noiseless_labels(meta: SynthMeta, task: int) -> np.ndarray:
    """Expected (noise-free) labels for one task over the generated compounds."""
    return meta.a_values[task] * meta.latent_scores + meta.b_values[task]


def task_oracle(meta: SynthMeta, task: int):
    """Deterministic labeling function for one task (no noise)."""
    a = meta.a_values[task]
    b = meta.b_values[task]

    def oracle(smiles: str) -> float:
        return a * latent_score(smiles) + b

    return oracle
