"""Binary classification tree: Gini splits, cost-complexity pruning.

Impurity decreases are computed as exact fractions, so ties between splits
are real ties and are broken deterministically: lowest feature index, then
lowest threshold. A pure node is never split; an impure one is split when the
best decrease reaches ``min_impurity_decrease`` (a zero-gain split is taken
at the default of 0, which is what lets XOR-like interactions be learned).
Leaves predict the majority class, negative on a tie.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyDataset, EmptyNode, SchemaMismatch
from .rfm_codec import N_BUCKETS, QuantileBoundaries, bucketize, percentile_breakpoints


@dataclass(frozen=True)
class Sample:
    features: Mapping[str, float]
    label: bool


@dataclass(frozen=True)
class CartConfig:
    max_depth: int = 5
    min_samples_leaf: int = 1
    min_impurity_decrease: float = 0.0
    pruning_alpha: float = 0.0

    def __post_init__(self):
        if self.max_depth < 1 or self.min_samples_leaf < 1:
            raise ValueError("max_depth and min_samples_leaf must be >= 1")
        if self.min_impurity_decrease < 0 or self.pruning_alpha < 0:
            raise ValueError("min_impurity_decrease and pruning_alpha must be >= 0")


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    impurity_decrease: float
    feature_name: str = ""
    exact_decrease: Fraction = field(default=Fraction(0), compare=False, repr=False)


@dataclass
class TreeNode:
    counts: tuple[int, int]  # (negatives, positives)
    feature: str | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None  # value <= threshold
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n(self) -> int:
        return self.counts[0] + self.counts[1]

    @property
    def prediction(self) -> bool:
        return self.counts[1] > self.counts[0]

    @property
    def probability(self) -> float:
        return self.counts[1] / self.n if self.n else 0.0

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            yield from self.left.leaves()
            yield from self.right.leaves()

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"counts": list(self.counts), "probability": self.probability}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "counts": list(self.counts),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TreeNode":
        counts = tuple(d["counts"])
        if "feature" not in d:
            return cls(counts)
        return cls(counts, d["feature"], d["threshold"], cls.from_dict(d["left"]), cls.from_dict(d["right"]))


@dataclass
class DecisionTree:
    root: TreeNode
    feature_names: tuple[str, ...]

    def leaf_count(self) -> int:
        return sum(1 for _ in self.root.leaves())

    def to_json(self) -> str:
        return json.dumps({"feature_names": list(self.feature_names), "root": self.root.to_dict()}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        d = json.loads(text)
        return cls(TreeNode.from_dict(d["root"]), tuple(d["feature_names"]))


def gini_impurity(class_counts: Sequence[int]) -> float:
    return float(_gini(class_counts))


def _gini(class_counts: Sequence[int]) -> Fraction:
    total = sum(class_counts)
    if total == 0:
        raise EmptyNode("EmptyNode: no samples")
    return 1 - Fraction(sum(c * c for c in class_counts), total * total)


def _weighted_child_term(neg: int, pos: int) -> Fraction:
    # n_c * gini(child), before dividing by the parent size
    n = neg + pos
    return Fraction(n * n - neg * neg - pos * pos, n)


def _as_arrays(samples: Sequence[Sample]):
    if not samples:
        raise EmptyDataset("EmptyDataset: no samples")
    names = tuple(samples[0].features)
    for s in samples:
        if tuple(s.features) != names:
            raise SchemaMismatch("samples do not share one feature schema")
    X = np.array([[s.features[n] for n in names] for s in samples], dtype=np.float64).reshape(len(samples), len(names))
    y = np.array([bool(s.label) for s in samples], dtype=bool)
    return names, X, y


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[int, float, Fraction] | None:
    n = len(y)
    total_pos = int(y.sum())
    parent = _gini((n - total_pos, total_pos))
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        values = X[order, j]
        cum_pos = np.cumsum(y[order])
        for i in range(n - 1):
            if values[i] == values[i + 1]:
                continue
            n_left = i + 1
            if n_left < min_leaf or n - n_left < min_leaf:
                continue
            pos_left = int(cum_pos[i])
            pos_right = total_pos - pos_left
            child = _weighted_child_term(n_left - pos_left, pos_left) + _weighted_child_term(n - n_left - pos_right, pos_right)
            decrease = parent - child / n
            if best is None or decrease > best[2]:
                best = (j, (float(values[i]) + float(values[i + 1])) / 2.0, decrease)
    return best


def best_binary_split(samples: Sequence[Sample], config: CartConfig = CartConfig()) -> SplitCandidate | None:
    names, X, y = _as_arrays(samples)
    pos = int(y.sum())
    found = _best_split(X, y, config.min_samples_leaf) if 0 < pos < len(y) else None
    if found is None or found[2] < config.min_impurity_decrease:
        return None
    j, threshold, decrease = found
    return SplitCandidate(j, threshold, float(decrease), names[j], decrease)


def _grow(X, y, names, config: CartConfig, depth: int) -> TreeNode:
    pos = int(y.sum())
    node = TreeNode((len(y) - pos, pos))
    if depth >= config.max_depth or pos in (0, len(y)) or len(y) < 2 * config.min_samples_leaf:
        return node
    found = _best_split(X, y, config.min_samples_leaf)
    if found is None or found[2] < config.min_impurity_decrease:
        return node
    j, threshold, _ = found
    go_left = X[:, j] <= threshold
    node.feature, node.threshold = names[j], threshold
    node.left = _grow(X[go_left], y[go_left], names, config, depth + 1)
    node.right = _grow(X[~go_left], y[~go_left], names, config, depth + 1)
    return node


def grow_tree(samples: Sequence[Sample], config: CartConfig = CartConfig()) -> DecisionTree:
    names, X, y = _as_arrays(samples)
    return DecisionTree(_grow(X, y, names, config, 0), names)


def _copy(node: TreeNode) -> TreeNode:
    if node.is_leaf:
        return TreeNode(node.counts)
    return TreeNode(node.counts, node.feature, node.threshold, _copy(node.left), _copy(node.right))


def _errors(node: TreeNode) -> int:
    return min(node.counts) if node.counts[0] != node.counts[1] else node.counts[1]


def _subtree_stats(node: TreeNode) -> tuple[int, int]:
    """(misclassified training samples, leaves) of the subtree."""
    if node.is_leaf:
        return _errors(node), 1
    le, ll = _subtree_stats(node.left)
    re, rl = _subtree_stats(node.right)
    return le + re, ll + rl


def prune(tree: DecisionTree, pruning_alpha: float) -> DecisionTree:
    """Weakest-link cost-complexity pruning on training misclassification.

    Repeatedly collapses the internal nodes with the smallest
    ``g(t) = (R(t) - R(T_t)) / (|leaves(T_t)| - 1)`` while that value is
    strictly below ``pruning_alpha``. R is the misclassification rate over
    the root's sample count.
    """
    root = _copy(tree.root)
    total = root.n
    while not root.is_leaf:
        links = []
        stack = [root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            sub_err, leaves = _subtree_stats(node)
            links.append((Fraction(_errors(node) - sub_err, total * (leaves - 1)), node))
            stack.extend((node.left, node.right))
        weakest = min(g for g, _ in links)
        if not weakest < pruning_alpha:
            break
        for g, node in links:
            if g == weakest:
                node.feature = node.threshold = node.left = node.right = None
    return DecisionTree(root, tree.feature_names)


def predict(tree: DecisionTree, sample: Sample | Mapping[str, float]) -> tuple[bool, float]:
    features = sample.features if isinstance(sample, Sample) else sample
    if set(features) != set(tree.feature_names):
        raise SchemaMismatch(f"sample features {sorted(set(features) ^ set(tree.feature_names))} do not match the tree")
    node = tree.root
    while not node.is_leaf:
        node = node.left if features[node.feature] <= node.threshold else node.right
    return node.prediction, node.probability


def accuracy(tree: DecisionTree, samples: Sequence[Sample]) -> float:
    if not samples:
        return 0.0
    return sum(predict(tree, s)[0] == s.label for s in samples) / len(samples)


def predictor_boundaries(records, fields: Sequence[str]) -> dict[str, tuple[float, ...]]:
    return {f: percentile_breakpoints([getattr(r, f) for r in records]) for f in fields}


def binarize_predictors(records, boundaries, labels: Sequence[bool] | None = None) -> list[Sample]:
    """One-hot quintile indicators per continuous field, plus ``gender`` as 1/0.

    ``boundaries`` is either a ``QuantileBoundaries`` (recency, frequency,
    monetary) or a mapping from field name to its four breakpoints.
    """
    if isinstance(boundaries, QuantileBoundaries):
        boundaries = {"recency": boundaries.r, "frequency": boundaries.f, "monetary": boundaries.m}
    out = []
    for i, r in enumerate(records):
        features: dict[str, float] = {"gender": 1 if r.gender.value == "male" else 0}
        for name, bps in boundaries.items():
            section = bucketize(getattr(r, name), bps)
            for s in range(1, N_BUCKETS + 1):
                features[f"{name}_s{s}"] = 1 if s == section else 0
        out.append(Sample(features, bool(labels[i]) if labels is not None else False))
    return out
