"""Shared graph encoder with per-task regression heads.

The encoder embeds categorical atom features into node states, runs a stack
of message-passing layers (neighbor + edge-state + learnable self-loop sums
through a two-layer perceptron with batch norm), and mean-pools node states
into one embedding per molecule.  Each task owns a small two-layer head over
that shared embedding.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .engine import BatchNormState, Tape, Tensor, ops, rng_stream
from .featurize import (
    ATOM_FEATURE_WIDTHS,
    BOND_FEATURE_WIDTHS,
    DEFAULT_SCHEMA,
    FeatureSchema,
    FeaturizedGraph,
)

_EMBED_STD = 0.02


@dataclass
class GraphBatch:
    """Several featurized graphs packed into flat arrays.

    Directed edges appear once per bond direction and are pre-sorted by
    destination node so segment reductions take the fast path.
    """

    atom_indices: np.ndarray  # (n_nodes, 7)
    bond_indices: np.ndarray  # (n_bonds, 3)
    graph_ids: np.ndarray  # (n_nodes,) sorted
    node_counts: np.ndarray  # (n_graphs,)
    edge_src: np.ndarray  # (2 * n_bonds,)
    edge_dst: np.ndarray  # (2 * n_bonds,)
    edge_bond: np.ndarray  # (2 * n_bonds,)

    @property
    def n_nodes(self) -> int:
        return self.atom_indices.shape[0]

    @property
    def n_graphs(self) -> int:
        return self.node_counts.shape[0]

    @classmethod
    def from_graphs(cls, graphs: list[FeaturizedGraph]) -> "GraphBatch":
        if not graphs:
            raise ValueError("batch needs at least one graph")
        if any(g.n_atoms == 0 for g in graphs):
            raise ValueError("graphs must have at least one atom")
        atom_rows = []
        bond_rows = []
        graph_ids = []
        src, dst, bond_of_edge = [], [], []
        node_offset = bond_offset = 0
        counts = []
        for gid, g in enumerate(graphs):
            atom_rows.append(g.atom_indices)
            bond_rows.append(g.bond_indices)
            graph_ids.append(np.full(g.n_atoms, gid, dtype=np.int64))
            counts.append(g.n_atoms)
            if g.n_bonds:
                a = g.bond_endpoints[:, 0] + node_offset
                b = g.bond_endpoints[:, 1] + node_offset
                idx = np.arange(g.n_bonds, dtype=np.int64) + bond_offset
                src.append(np.concatenate([a, b]))
                dst.append(np.concatenate([b, a]))
                bond_of_edge.append(np.concatenate([idx, idx]))
            node_offset += g.n_atoms
            bond_offset += g.n_bonds
        edge_src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
        edge_dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
        edge_bond = (
            np.concatenate(bond_of_edge) if bond_of_edge else np.zeros(0, dtype=np.int64)
        )
        if edge_dst.size:
            order = np.argsort(edge_dst, kind="stable")
            edge_src, edge_dst, edge_bond = (
                edge_src[order],
                edge_dst[order],
                edge_bond[order],
            )
        return cls(
            atom_indices=np.concatenate(atom_rows),
            bond_indices=np.concatenate(bond_rows),
            graph_ids=np.concatenate(graph_ids),
            node_counts=np.asarray(counts, dtype=np.int64),
            edge_src=edge_src,
            edge_dst=edge_dst,
            edge_bond=edge_bond,
        )


@dataclass
class GinLayer:
    edge_tables: list[Tensor]  # one per bond feature
    self_loop: Tensor  # learnable self-loop edge state, shape (d,)
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor
    bn_gamma: Tensor
    bn_beta: Tensor
    bn_state: BatchNormState


@dataclass
class TaskHead:
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor


@dataclass
class ModelParams:
    embed_dim: int
    n_layers: int
    head_hidden: int
    dropout: float
    task_names: list[str]
    schema: FeatureSchema
    node_tables: list[Tensor]
    layers: list[GinLayer]
    heads: list[TaskHead]

    # -- parameter traversal (canonical order) ---------------------------

    def backbone_named_parameters(self):
        for i, t in enumerate(self.node_tables):
            yield f"node_table.{i}", t
        for k, layer in enumerate(self.layers):
            for j, t in enumerate(layer.edge_tables):
                yield f"layer.{k}.edge_table.{j}", t
            yield f"layer.{k}.self_loop", layer.self_loop
            yield f"layer.{k}.w1", layer.w1
            yield f"layer.{k}.b1", layer.b1
            yield f"layer.{k}.w2", layer.w2
            yield f"layer.{k}.b2", layer.b2
            yield f"layer.{k}.bn_gamma", layer.bn_gamma
            yield f"layer.{k}.bn_beta", layer.bn_beta

    def head_named_parameters(self, task_indices=None):
        if task_indices is None:
            task_indices = range(len(self.heads))
        for t in task_indices:
            head = self.heads[t]
            yield f"head.{t}.w1", head.w1
            yield f"head.{t}.b1", head.b1
            yield f"head.{t}.w2", head.w2
            yield f"head.{t}.b2", head.b2

    def named_parameters(self):
        yield from self.backbone_named_parameters()
        yield from self.head_named_parameters()

    def named_state_arrays(self):
        for k, layer in enumerate(self.layers):
            yield f"layer.{k}.bn_running_mean", layer.bn_state.running_mean
            yield f"layer.{k}.bn_running_var", layer.bn_state.running_var

    def backbone_hash(self) -> str:
        digest = hashlib.sha256()
        for name, p in self.backbone_named_parameters():
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(p.data).tobytes())
        for name, arr in self.named_state_arrays():
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()

    def copy(self) -> "ModelParams":
        def clone(t: Tensor) -> Tensor:
            return Tensor(t.data.copy(), requires_grad=t.requires_grad)

        return ModelParams(
            embed_dim=self.embed_dim,
            n_layers=self.n_layers,
            head_hidden=self.head_hidden,
            dropout=self.dropout,
            task_names=list(self.task_names),
            schema=self.schema,
            node_tables=[clone(t) for t in self.node_tables],
            layers=[
                GinLayer(
                    edge_tables=[clone(t) for t in layer.edge_tables],
                    self_loop=clone(layer.self_loop),
                    w1=clone(layer.w1),
                    b1=clone(layer.b1),
                    w2=clone(layer.w2),
                    b2=clone(layer.b2),
                    bn_gamma=clone(layer.bn_gamma),
                    bn_beta=clone(layer.bn_beta),
                    bn_state=layer.bn_state.copy(),
                )
                for layer in self.layers
            ],
            heads=[
                TaskHead(
                    w1=clone(h.w1), b1=clone(h.b1), w2=clone(h.w2), b2=clone(h.b2)
                )
                for h in self.heads
            ],
        )


def _embedding(stream, rows: int, dim: int) -> Tensor:
    return Tensor(stream.normal(0.0, _EMBED_STD, size=(rows, dim)), requires_grad=True)


def _linear(stream, fan_in: int, fan_out: int) -> tuple[Tensor, Tensor]:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    w = Tensor(stream.uniform(-limit, limit, size=(fan_in, fan_out)), requires_grad=True)
    b = Tensor(np.zeros(fan_out), requires_grad=True)
    return w, b


def init_params(
    task_names: list[str],
    embed_dim: int = 256,
    n_layers: int = 8,
    head_hidden: int = 256,
    dropout: float = 0.2,
    seed: int = 0,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> ModelParams:
    """Fresh parameters; every tensor draws from its own seed-derived stream,
    so adding layers or task heads never shifts the others' initial values."""
    d = embed_dim
    node_tables = [
        _embedding(rng_stream(seed, 0, 0, i), width, d)
        for i, width in enumerate(schema.atom_widths)
    ]
    layers = []
    for k in range(n_layers):
        edge_tables = [
            _embedding(rng_stream(seed, 0, 1, k, j), width, d)
            for j, width in enumerate(schema.bond_widths)
        ]
        self_loop = Tensor(
            rng_stream(seed, 0, 2, k).normal(0.0, _EMBED_STD, size=d),
            requires_grad=True,
        )
        w1, b1 = _linear(rng_stream(seed, 0, 3, k, 0), d, 2 * d)
        w2, b2 = _linear(rng_stream(seed, 0, 3, k, 1), 2 * d, d)
        layers.append(
            GinLayer(
                edge_tables=edge_tables,
                self_loop=self_loop,
                w1=w1,
                b1=b1,
                w2=w2,
                b2=b2,
                bn_gamma=Tensor(np.ones(d), requires_grad=True),
                bn_beta=Tensor(np.zeros(d), requires_grad=True),
                bn_state=BatchNormState.initial(d),
            )
        )
    heads = init_heads(task_names, d, head_hidden, seed)
    return ModelParams(
        embed_dim=d,
        n_layers=n_layers,
        head_hidden=head_hidden,
        dropout=dropout,
        task_names=list(task_names),
        schema=schema,
        node_tables=node_tables,
        layers=layers,
        heads=heads,
    )


def init_heads(
    task_names: list[str], embed_dim: int, head_hidden: int, seed: int
) -> list[TaskHead]:
    """Fresh task heads drawn from the same per-head streams init_params
    uses, so a head's initial values depend only on its index and the seed."""
    heads = []
    for t in range(len(task_names)):
        w1, b1 = _linear(rng_stream(seed, 0, 4, t, 0), embed_dim, head_hidden)
        w2, b2 = _linear(rng_stream(seed, 0, 4, t, 1), head_hidden, 1)
        heads.append(TaskHead(w1=w1, b1=b1, w2=w2, b2=b2))
    return heads


def embed_inputs(batch: GraphBatch, params: ModelParams, tape: Tape | None = None):
    """Initial node states and per-layer bond states as embedding-row sums."""
    h = ops.embedding_lookup(params.node_tables[0], batch.atom_indices[:, 0], tape=tape)
    for i in range(1, len(params.node_tables)):
        row = ops.embedding_lookup(
            params.node_tables[i], batch.atom_indices[:, i], tape=tape
        )
        h = ops.add(h, row, tape=tape)
    edge_states = []
    for layer in params.layers:
        state = None
        for j, table in enumerate(layer.edge_tables):
            row = ops.embedding_lookup(table, batch.bond_indices[:, j], tape=tape)
            state = row if state is None else ops.add(state, row, tape=tape)
        edge_states.append(state)
    return h, edge_states


def gin_forward(
    batch: GraphBatch,
    params: ModelParams,
    *,
    train: bool = False,
    rng_path: tuple[int, ...] | None = None,
    update_running: bool = True,
    tape: Tape | None = None,
) -> Tensor:
    """Per-graph embeddings, shape (n_graphs, embed_dim)."""
    if train and params.dropout > 0.0 and rng_path is None:
        raise ValueError("train-mode forward needs an rng_path for dropout")
    h, edge_states = embed_inputs(batch, params, tape=tape)
    n = batch.n_nodes
    for k, layer in enumerate(params.layers):
        if batch.edge_src.size:
            neighbor = ops.embedding_lookup(h, batch.edge_src, tape=tape)
            summed = ops.segment_sum(neighbor, batch.edge_dst, n, tape=tape)
            per_edge = ops.embedding_lookup(edge_states[k], batch.edge_bond, tape=tape)
            edge_sum = ops.segment_sum(per_edge, batch.edge_dst, n, tape=tape)
            s = ops.add(ops.add(h, summed, tape=tape), edge_sum, tape=tape)
        else:
            s = h
        s = ops.add(s, layer.self_loop, tape=tape)
        hidden = ops.relu(
            ops.add(ops.matmul(s, layer.w1, tape=tape), layer.b1, tape=tape), tape=tape
        )
        mixed = ops.add(ops.matmul(hidden, layer.w2, tape=tape), layer.b2, tape=tape)
        normed = ops.batch_norm(
            mixed,
            layer.bn_gamma,
            layer.bn_beta,
            layer.bn_state,
            train=train,
            update_running=update_running,
            tape=tape,
        )
        h = ops.relu(normed, tape=tape)
        if train and params.dropout > 0.0:
            stream = rng_stream(rng_path[0], *rng_path[1:], 1, 0, k)
            h = ops.dropout(h, params.dropout, stream, train=True, tape=tape)
    return ops.segment_mean(h, batch.graph_ids, batch.n_graphs, tape=tape)


def predict_heads(
    z: Tensor,
    params: ModelParams,
    task_indices,
    *,
    train: bool = False,
    rng_path: tuple[int, ...] | None = None,
    tape: Tape | None = None,
) -> list[Tensor]:
    """Per-task score columns, each of shape (n_graphs, 1)."""
    outs = []
    for t in task_indices:
        if not 0 <= t < len(params.heads):
            raise IndexError(f"unknown task index {t}")
        head = params.heads[t]
        hidden = ops.relu(
            ops.add(ops.matmul(z, head.w1, tape=tape), head.b1, tape=tape), tape=tape
        )
        if train and params.dropout > 0.0:
            stream = rng_stream(rng_path[0], *rng_path[1:], 1, 1, t)
            hidden = ops.dropout(hidden, params.dropout, stream, train=True, tape=tape)
        outs.append(ops.add(ops.matmul(hidden, head.w2, tape=tape), head.b2, tape=tape))
    return outs


def predict(
    batch: GraphBatch, params: ModelParams, task_indices=None
) -> np.ndarray:
    """Eval-mode scores, shape (n_graphs, len(task_indices))."""
    if task_indices is None:
        task_indices = list(range(len(params.heads)))
    z = gin_forward(batch, params, train=False)
    cols = predict_heads(z, params, task_indices, train=False)
    return np.concatenate([c.data for c in cols], axis=1)
