"""Directed graphs, degree normalization, synthetic data, and splits.

Everything here is immutable after construction (arrays are marked
read-only), so graphs and datasets can be shared freely across concurrent
training runs.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .numerics import CsrMatrix

DENSE_THRESHOLD = 4096


def _frozen(arr):
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DirectedGraph:
    """A directed graph with a binary CSR adjacency (row = source node)."""

    num_nodes: int
    edges: np.ndarray  # (E, 2) int64, unique, sorted by (src, dst)
    adjacency: CsrMatrix

    @classmethod
    def from_edges(cls, num_nodes, edges):
        if num_nodes <= 0:
            raise DataError("num_nodes must be positive")
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= num_nodes):
            bad = arr[(arr < 0).any(axis=1) | (arr >= num_nodes).any(axis=1)][0]
            raise DataError(
                f"edge ({bad[0]}, {bad[1]}) references a node outside "
                f"[0, {num_nodes})"
            )
        arr = np.unique(arr, axis=0) if arr.size else arr.reshape(0, 2)
        adj = CsrMatrix.from_coo(
            (num_nodes, num_nodes), arr[:, 0], arr[:, 1],
            np.ones(arr.shape[0]),
        )
        return cls(num_nodes=num_nodes, edges=_frozen(arr), adjacency=adj)

    @property
    def num_edges(self):
        return int(self.edges.shape[0])

    def reversed(self):
        """Same nodes, every edge flipped."""
        return DirectedGraph.from_edges(self.num_nodes, self.edges[:, ::-1])

    def symmetrized(self):
        """Union of the edge set with its reverse (max(A, A^T))."""
        both = np.vstack([self.edges, self.edges[:, ::-1]])
        return DirectedGraph.from_edges(self.num_nodes, both)


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Degree-normalized adjacency with self-loops.

    matrix[i][j] = (A+I)[i][j] / sqrt(row_degrees[i] * col_degrees[j]) where
    the degrees are row and column sums of A+I. Self-loops make every degree
    at least 1, so all entries are finite and the diagonal is positive.
    Stored dense up to ``DENSE_THRESHOLD`` nodes, CSR above.
    """

    matrix: object  # np.ndarray or CsrMatrix
    row_degrees: np.ndarray
    col_degrees: np.ndarray

    @property
    def is_dense(self):
        return isinstance(self.matrix, np.ndarray)

    def to_dense(self):
        return self.matrix if self.is_dense else self.matrix.to_dense()


def normalize_adjacency(graph, dense_threshold=DENSE_THRESHOLD):
    """Build the normalized adjacency of ``graph``.

    Input self-edges merge with the added identity, so every entry of A+I
    stays 0 or 1.
    """
    n = graph.num_nodes
    loops = np.arange(n, dtype=np.int64)
    with_loops = np.vstack([graph.edges, np.column_stack([loops, loops])])
    with_loops = np.unique(with_loops, axis=0)
    src, dst = with_loops[:, 0], with_loops[:, 1]
    row_deg = np.bincount(src, minlength=n).astype(np.float64)
    col_deg = np.bincount(dst, minlength=n).astype(np.float64)
    vals = 1.0 / np.sqrt(row_deg[src] * col_deg[dst])
    if n <= dense_threshold:
        mat = np.zeros((n, n))
        mat[src, dst] = vals
        mat = _frozen(mat)
    else:
        mat = CsrMatrix.from_coo((n, n), src, dst, vals)
    return NormalizedAdjacency(
        matrix=mat, row_degrees=_frozen(row_deg), col_degrees=_frozen(col_deg)
    )


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test node-id sets."""

    train_ids: np.ndarray
    val_ids: np.ndarray
    test_ids: np.ndarray

    def __post_init__(self):
        for name in ("train_ids", "val_ids", "test_ids"):
            ids = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, _frozen(np.sort(ids)))
        if self.train_ids.size == 0:
            raise DataError("train split must be nonempty")
        sets = [set(self.train_ids), set(self.val_ids), set(self.test_ids)]
        if len(sets[0] | sets[1] | sets[2]) != sum(len(s) for s in sets):
            raise DataError("split sets overlap")

    def mask(self, name, num_nodes):
        ids = getattr(self, f"{name}_ids")
        out = np.zeros(num_nodes, dtype=bool)
        out[ids] = True
        return out


@dataclass(frozen=True)
class Dataset:
    graph: DirectedGraph
    features: np.ndarray  # (N, d_in)
    labels: np.ndarray  # (N,) ints in [0, num_classes)
    num_classes: int
    split: DatasetSplit

    def __post_init__(self):
        n = self.graph.num_nodes
        if self.features.shape[0] != n:
            raise DataError(
                f"feature rows ({self.features.shape[0]}) != num_nodes ({n})"
            )
        if self.labels.shape != (n,):
            raise DataError(f"labels must have shape ({n},)")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise DataError(
                f"labels must lie in [0, {self.num_classes})"
            )
        object.__setattr__(self, "features",
                           _frozen(np.ascontiguousarray(self.features, dtype=np.float64)))
        object.__setattr__(self, "labels",
                           _frozen(np.ascontiguousarray(self.labels, dtype=np.int64)))

    def with_graph(self, graph):
        """Same features/labels/split on a different graph (ablations)."""
        return Dataset(graph=graph, features=np.array(self.features),
                       labels=np.array(self.labels),
                       num_classes=self.num_classes, split=self.split)

    def with_features(self, features):
        return Dataset(graph=self.graph, features=features,
                       labels=np.array(self.labels),
                       num_classes=self.num_classes, split=self.split)


def load_edge_list(path, num_nodes):
    """Read "src<TAB>dst" lines; '#' comments and blank lines allowed."""
    if num_nodes <= 0:
        raise DataError("num_nodes must be positive")
    edges = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise DataError(
                        f"{path}:{lineno}: expected 'src<TAB>dst', got {line!r}"
                    )
                try:
                    src, dst = int(parts[0]), int(parts[1])
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-integer node id in {line!r}"
                    ) from None
                if not (0 <= src < num_nodes and 0 <= dst < num_nodes):
                    raise DataError(
                        f"{path}:{lineno}: node id outside [0, {num_nodes})"
                    )
                edges.append((src, dst))
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from None
    return DirectedGraph.from_edges(num_nodes, edges)


def load_features(path, num_nodes):
    """Read a headerless CSV of floats, one row per node."""
    rows = []
    width = None
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                cells = line.split(",")
                if width is None:
                    width = len(cells)
                elif len(cells) != width:
                    raise DataError(
                        f"{path}:{lineno}: expected {width} columns, got {len(cells)}"
                    )
                try:
                    rows.append([float(c) for c in cells])
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric value in {line!r}"
                    ) from None
    except OSError as exc:
        raise DataError(f"cannot read features {path}: {exc}") from None
    if len(rows) != num_nodes:
        raise DataError(
            f"{path}: {len(rows)} feature rows but num_nodes={num_nodes}"
        )
    return np.asarray(rows, dtype=np.float64)


def load_labels(path, num_nodes):
    """Read one integer label per line; returns (labels, num_classes)."""
    labels = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    val = int(line)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-integer label {line!r}"
                    ) from None
                if val < 0:
                    raise DataError(f"{path}:{lineno}: negative label {val}")
                labels.append(val)
    except OSError as exc:
        raise DataError(f"cannot read labels {path}: {exc}") from None
    if len(labels) != num_nodes:
        raise DataError(f"{path}: {len(labels)} labels but num_nodes={num_nodes}")
    arr = np.asarray(labels, dtype=np.int64)
    return arr, int(arr.max()) + 1


def load_splits(path, num_nodes):
    """Read a {"train": [...], "val": [...], "test": [...]} JSON document."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read splits {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict) or set(obj) != {"train", "val", "test"}:
        raise DataError(f"{path}: expected exactly the keys train/val/test")
    ids = {}
    for key in ("train", "val", "test"):
        vals = obj[key]
        if not all(isinstance(v, int) and 0 <= v < num_nodes for v in vals):
            raise DataError(f"{path}: '{key}' ids must be ints in [0, {num_nodes})")
        ids[key] = np.asarray(sorted(vals), dtype=np.int64)
    return DatasetSplit(train_ids=ids["train"], val_ids=ids["val"],
                        test_ids=ids["test"])


def save_splits(path, split):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "train": [int(i) for i in split.train_ids],
                "val": [int(i) for i in split.val_ids],
                "test": [int(i) for i in split.test_ids],
            },
            fh,
            indent=1,
        )
        fh.write("\n")


def save_edge_list(path, graph):
    with open(path, "w", encoding="utf-8") as fh:
        for src, dst in graph.edges:
            fh.write(f"{src}\t{dst}\n")


def save_features(path, features):
    with open(path, "w", encoding="utf-8") as fh:
        for row in features:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def save_labels(path, labels):
    with open(path, "w", encoding="utf-8") as fh:
        for lab in labels:
            fh.write(f"{int(lab)}\n")


def make_splits(labels, per_class_train, val_size, seed):
    """Sample per-class train nodes, then validation, rest test.

    Sampling is without replacement and deterministic for a fixed seed.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if per_class_train <= 0:
        raise DataError("per_class_train must be positive (train must be nonempty)")
    if val_size < 0:
        raise DataError("val_size must be nonnegative")
    rng = np.random.default_rng(seed)
    train = []
    for cls in range(int(labels.max()) + 1):
        members = np.flatnonzero(labels == cls)
        if members.size < per_class_train:
            raise DataError(
                f"class {cls} has {members.size} nodes, fewer than "
                f"per_class_train={per_class_train}"
            )
        train.append(rng.permutation(members)[:per_class_train])
    train = np.sort(np.concatenate(train))
    rest = np.setdiff1d(np.arange(labels.size), train)
    if val_size > rest.size:
        raise DataError(
            f"val_size={val_size} exceeds the {rest.size} non-train nodes"
        )
    rest = rng.permutation(rest)
    return DatasetSplit(
        train_ids=train,
        val_ids=np.sort(rest[:val_size]),
        test_ids=np.sort(rest[val_size:]),
    )


def generate_directed_sbm(num_nodes, num_classes, p_forward, p_backward,
                          p_cross, feature_dim, feature_noise, seed,
                          feature_signal=1.0, per_class_train=20,
                          val_size=None, split_seed=None):
    """Directional ring-of-classes block model.

    Nodes are split evenly into classes; an ordered pair whose class
    difference is +1 (mod C) draws an edge with ``p_forward``, -1 with
    ``p_backward``, anything else (including within-class) with ``p_cross``.
    With two classes the ring degenerates, so pairs are oriented low class
    to high class for "forward". Features are a per-class mean vector scaled
    by ``feature_signal`` plus Gaussian noise scaled by ``feature_noise``;
    a zero signal gives pure-noise features. Deterministic for a fixed seed.

    ``val_size=None`` picks min(500, half the non-train nodes).
    """
    for name, p in (("p_forward", p_forward), ("p_backward", p_backward),
                    ("p_cross", p_cross)):
        if not 0.0 <= p <= 1.0:
            raise DataError(f"{name}={p} is not a probability")
    if num_classes < 2:
        raise DataError("num_classes must be at least 2")
    if num_nodes < num_classes:
        raise DataError("need at least one node per class")

    rng = np.random.default_rng(seed)
    sizes = np.full(num_classes, num_nodes // num_classes)
    sizes[: num_nodes % num_classes] += 1
    labels = np.repeat(np.arange(num_classes), sizes)

    prob = np.full((num_nodes, num_nodes), p_cross)
    li, lj = labels[:, None], labels[None, :]
    if num_classes == 2:
        prob[(li == 0) & (lj == 1)] = p_forward
        prob[(li == 1) & (lj == 0)] = p_backward
    else:
        diff = (lj - li) % num_classes
        prob[diff == 1] = p_forward
        prob[diff == num_classes - 1] = p_backward
    prob[li == lj] = p_cross
    np.fill_diagonal(prob, 0.0)  # no self-edges; normalization adds loops

    src, dst = np.nonzero(rng.random((num_nodes, num_nodes)) < prob)
    graph = DirectedGraph.from_edges(num_nodes, np.column_stack([src, dst]))

    means = rng.standard_normal((num_classes, feature_dim)) * feature_signal
    feats = means[labels] + rng.standard_normal((num_nodes, feature_dim)) * feature_noise

    n_train = per_class_train * num_classes
    if val_size is None:
        val_size = min(500, max(0, (num_nodes - n_train) // 2))
    split = make_splits(labels, per_class_train, val_size,
                        seed if split_seed is None else split_seed)
    return Dataset(graph=graph, features=feats, labels=labels,
                   num_classes=num_classes, split=split)
