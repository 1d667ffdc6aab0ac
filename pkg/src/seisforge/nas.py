"""Cell-search machinery: softmax relaxation, genotype discretization, counting.

A cell is a DAG over ``n_inputs`` input vertices and ``n_nodes`` intermediate
nodes; every earlier vertex feeds every later node, and each edge carries a
continuous score per candidate operation.  Discretization keeps, per node,
the two incoming edges whose best non-"zero" operation has the largest
softmax weight, following the published search convention.  Parameter
counting assumes 3x3 convolutions with bias and no normalization layers; the
rules live in :func:`op_param_count` and :func:`param_count`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

# Candidate operations, in canonical order; the index is part of the contract.
OPS: tuple[str, ...] = (
    "conv3x3",
    "dilated_conv3x3",
    "max_pool3x3",
    "avg_pool3x3",
    "identity",
    "zero",
)
ZERO_OP = "zero"
CELL_KINDS = ("encoder", "decoder")


@dataclass(frozen=True)
class CellSpec:
    """Cell shape: intermediate node count, input count, encoder/decoder kind."""

    n_nodes: int
    kind: str = "encoder"
    n_inputs: int = 2

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("cell needs at least one intermediate node")
        if self.kind not in CELL_KINDS:
            raise ValueError(f"cell kind must be one of {CELL_KINDS}, got {self.kind!r}")
        if self.n_inputs != 2:
            raise ValueError("cells take exactly 2 predecessor-cell inputs")

    def edge_count(self) -> int:
        return sum(self.n_inputs + i for i in range(self.n_nodes))

    def node_predecessors(self, node: int) -> range:
        """Vertex indices feeding intermediate node ``node`` (0-based)."""
        return range(self.n_inputs + node)


@dataclass(frozen=True)
class Genotype:
    """Discrete cell: per node, exactly two (predecessor, op) edges."""

    kind: str
    nodes: tuple[tuple[tuple[int, str], tuple[int, str]], ...]

    def __post_init__(self):
        if self.kind not in CELL_KINDS:
            raise ValueError(f"cell kind must be one of {CELL_KINDS}, got {self.kind!r}")
        for k, edges in enumerate(self.nodes):
            if len(edges) != 2:
                raise ValueError(f"node {k + 1} must retain exactly 2 edges")
            for pred, op in edges:
                if op not in OPS or op == ZERO_OP:
                    raise ValueError(f"node {k + 1} has invalid op {op!r}")
                if not (0 <= pred < 2 + k):
                    raise ValueError(f"node {k + 1} references invalid predecessor {pred}")


@dataclass(frozen=True)
class BackboneConfig:
    """Unet-shaped backbone: ``depth`` levels with channel doubling per level.

    Fixed (non-searched) parameters -- the input stem, output head and the
    up/down resampling convolutions -- are counted unless ``include_fixed``
    is off.
    """

    depth: int = 4
    base_channels: int = 16
    nodes_per_cell: int = 2
    in_channels: int = 1
    out_channels: int = 1
    include_fixed: bool = True

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.base_channels < 1:
            raise ValueError("base_channels must be >= 1")
        if self.nodes_per_cell < 1:
            raise ValueError("nodes_per_cell must be >= 1")


def relax(alpha: np.ndarray) -> np.ndarray:
    """Row-wise softmax of the edge/op logits; rows land on the simplex."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 2:
        raise ValueError("alpha must be a 2D (edges x ops) matrix")
    if not np.all(np.isfinite(alpha)):
        raise ValueError("alpha contains non-finite logits")
    shifted = alpha - alpha.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def discretize(alpha: np.ndarray, cell: CellSpec) -> Genotype:
    """Pick each edge's most likely non-zero op, then keep 2 edges per node.

    Edge strength is the softmax weight of its best non-"zero" candidate;
    per node the two strongest incoming edges are retained.  Ties on ops and
    on edges are broken toward the lower index.
    """
    weights = relax(alpha)
    if weights.shape != (cell.edge_count(), len(OPS)):
        raise ValueError(
            f"alpha shape {weights.shape} does not match cell "
            f"({cell.edge_count()} edges x {len(OPS)} ops)"
        )
    zero_idx = OPS.index(ZERO_OP)
    nodes = []
    offset = 0
    for node in range(cell.n_nodes):
        preds = cell.node_predecessors(node)
        scored = []
        for local, pred in enumerate(preds):
            row = weights[offset + local]
            best_op = max(
                (k for k in range(len(OPS)) if k != zero_idx),
                key=lambda k: (row[k], -k),
            )
            scored.append((row[best_op], -local, pred, OPS[best_op]))
        scored.sort(reverse=True)
        kept = sorted((pred, op) for _, _, pred, op in scored[:2])
        nodes.append(tuple(kept))
        offset += len(preds)
    return Genotype(cell.kind, tuple(nodes))


def op_param_count(op: str, channels: int) -> int:
    """Learnable parameters of one op at channel width C.

    conv3x3 and dilated_conv3x3 are C->C 3x3 convolutions with bias
    (9 C^2 + C); pooling, identity and zero carry no parameters.
    """
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    if channels < 1:
        raise ValueError("channels must be >= 1")
    if op in ("conv3x3", "dilated_conv3x3"):
        return 9 * channels * channels + channels
    return 0


def cell_param_count(genotype: Genotype, channels: int) -> int:
    """Parameters of one cell instance at channel width C."""
    return sum(
        op_param_count(op, channels)
        for edges in genotype.nodes
        for _, op in edges
    )


def _conv3x3_params(c_in: int, c_out: int) -> int:
    return 9 * c_in * c_out + c_out


def param_count(
    genotype: Genotype,
    backbone: BackboneConfig,
    decoder: Genotype | None = None,
) -> int:
    """Total parameter count of a backbone built from shared cell genotypes.

    One encoder cell per level (the deepest doubles as the bottleneck) and one
    decoder cell per level above the bottleneck, all sharing their respective
    genotype.  Fixed parts, counted when ``include_fixed``: a 3x3 stem
    (in_channels -> base), 3x3 stride-2 down convs, 3x3 up convs, and a 1x1
    head (base -> out_channels).
    """
    enc = genotype
    dec = decoder if decoder is not None else genotype
    for g in (enc, dec):
        if len(g.nodes) != backbone.nodes_per_cell:
            raise ValueError(
                f"genotype has {len(g.nodes)} nodes, backbone expects "
                f"{backbone.nodes_per_cell}"
            )
    chans = [backbone.base_channels * 2 ** level for level in range(backbone.depth)]
    total = sum(cell_param_count(enc, c) for c in chans)
    total += sum(cell_param_count(dec, c) for c in chans[:-1])
    if backbone.include_fixed:
        total += _conv3x3_params(backbone.in_channels, chans[0])  # stem
        for lo, hi in zip(chans[:-1], chans[1:]):
            total += _conv3x3_params(lo, hi)  # downsample
            total += _conv3x3_params(hi, lo)  # upsample
        total += chans[0] * backbone.out_channels + backbone.out_channels  # 1x1 head
    return total


def search_space_size(cell: CellSpec, n_candidates: int = len(OPS)) -> int:
    """Distinct genotypes for one cell.

    Per node: choose 2 of its predecessors and any non-zero op on each edge,
    so prod_i C(n_inputs + i - 1, 2) * (n_candidates - 1)^2 over i = 1..n_nodes.
    """
    if n_candidates < 2:
        raise ValueError("need at least one real op besides zero")
    total = 1
    for node in range(cell.n_nodes):
        preds = cell.n_inputs + node
        total *= math.comb(preds, 2) * (n_candidates - 1) ** 2
    return total


_NODE_RE = re.compile(r"node (\d+): \((\d+), ([a-z0-9_]+)\) \((\d+), ([a-z0-9_]+)\)")


def serialize_genotype(genotype: Genotype) -> str:
    """Canonical text form: a cell-kind header, then one line per node."""
    lines = [f"cell: {genotype.kind}"]
    for k, edges in enumerate(genotype.nodes):
        parts = " ".join(f"({pred}, {op})" for pred, op in edges)
        lines.append(f"node {k + 1}: {parts}")
    return "\n".join(lines) + "\n"


def parse_genotype(text: str) -> Genotype:
    """Inverse of :func:`serialize_genotype`; rejects malformed lines and ops."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("cell: "):
        raise ValueError("missing 'cell:' header line")
    kind = lines[0][len("cell: "):].strip()
    if kind not in CELL_KINDS:
        raise ValueError(f"unknown cell kind {kind!r}")
    nodes = []
    for expected, line in enumerate(lines[1:], start=1):
        m = _NODE_RE.fullmatch(line.strip())
        if not m:
            raise ValueError(f"malformed node line: {line!r}")
        if int(m.group(1)) != expected:
            raise ValueError(f"expected node {expected}, found node {m.group(1)}")
        edges = []
        for pred, op in ((m.group(2), m.group(3)), (m.group(4), m.group(5))):
            if op not in OPS:
                raise ValueError(f"unknown op name {op!r}")
            edges.append((int(pred), op))
        nodes.append(tuple(edges))
    if not nodes:
        raise ValueError("genotype has no nodes")
    return Genotype(kind, tuple(nodes))
