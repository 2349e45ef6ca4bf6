"""Array-backed CART trees used by the tree, bagging, forest and boosting families.

Splits are binary: thresholds for continuous columns ("value <= t" goes left),
equality for categorical columns ("code == c" goes left). Node selection is
weighted Gini; zero-gain splits are allowed while a node is impure so that
distinct rows can always be separated. Everything is index-based and grown
with an explicit stack, so depth is bounded only by the sample count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LEAF = -1


@dataclass
class TreeArrays:
    feature: np.ndarray      # int, _LEAF marks leaves
    threshold: np.ndarray    # float; category code for categorical splits
    is_equality: np.ndarray  # bool, True for categorical equality splits
    left: np.ndarray
    right: np.ndarray
    prob: np.ndarray         # class-1 probability at every node


def _node_best_split(X, w, y1w, idx, features, is_cat):
    """Best (weighted-child-gini, feature, is_equality, threshold) over the
    candidate features for one node, or None if no feature separates it."""
    w_node = w[idx]
    y_node = y1w[idx]
    total_w = w_node.sum()
    total_1 = y_node.sum()
    best = None
    for f in features:
        col = X[idx, f]
        if is_cat[f]:
            codes = col.astype(np.int64)
            k = codes.max() + 1
            wc = np.bincount(codes, weights=w_node, minlength=k)
            w1c = np.bincount(codes, weights=y_node, minlength=k)
            valid = (wc > 0) & (wc < total_w)
            if not valid.any():
                continue
            w_l, w1_l = wc[valid], w1c[valid]
            w_r, w1_r = total_w - w_l, total_1 - w1_l
            score = _child_gini(w_l, w1_l) + _child_gini(w_r, w1_r)
            i = int(np.argmin(score))
            cand = (float(score[i]), f, True, float(np.flatnonzero(valid)[i]))
        else:
            order = np.argsort(col, kind="stable")
            sv = col[order]
            cw = np.cumsum(w_node[order])
            c1 = np.cumsum(y_node[order])
            cut = np.flatnonzero(sv[:-1] < sv[1:])
            if cut.size == 0:
                continue
            w_l, w1_l = cw[cut], c1[cut]
            w_r, w1_r = total_w - w_l, total_1 - w1_l
            score = _child_gini(w_l, w1_l) + _child_gini(w_r, w1_r)
            i = int(np.argmin(score))
            thr = (sv[cut[i]] + sv[cut[i] + 1]) / 2.0
            cand = (float(score[i]), f, False, float(thr))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def _child_gini(w_total, w_ones):
    """Weighted Gini mass of children: w * (1 - p1^2 - p0^2), vectorized."""
    w_zeros = w_total - w_ones
    return w_total - (w_ones * w_ones + w_zeros * w_zeros) / w_total


def grow_tree(X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None,
              is_cat: np.ndarray, max_depth: int | None, min_samples_split: int,
              max_features: int | None, rng: np.random.Generator | None) -> TreeArrays:
    """Fit a binary classification tree on a float matrix.

    `is_cat` flags categorical columns (cells are category codes). When
    `max_features` is set, each node scans a fresh random subset of columns
    drawn from `rng`; otherwise all columns, in order, with first-wins ties.
    """
    n, d = X.shape
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    y1w = w * (y == 1)

    feature, threshold, is_eq, left, right, prob = [], [], [], [], [], []

    def new_node(idx):
        w_node = w[idx].sum()
        p1 = y1w[idx].sum() / w_node if w_node > 0 else 0.5
        feature.append(_LEAF)
        threshold.append(0.0)
        is_eq.append(False)
        left.append(_LEAF)
        right.append(_LEAF)
        prob.append(p1)
        return len(feature) - 1

    root_idx = np.arange(n)
    stack = [(new_node(root_idx), root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        p1 = prob[node]
        if (p1 <= 0.0 or p1 >= 1.0 or idx.size < min_samples_split
                or (max_depth is not None and depth >= max_depth)):
            continue
        if max_features is not None and max_features < d:
            feats = rng.permutation(d)[:max_features]
        else:
            feats = range(d)
        found = _node_best_split(X, w, y1w, idx, feats, is_cat)
        if found is None:
            continue
        _, f, eq, thr = found
        col = X[idx, f]
        mask = (col == thr) if eq else (col <= thr)
        feature[node] = f
        threshold[node] = thr
        is_eq[node] = eq
        l_id = new_node(idx[mask])
        r_id = new_node(idx[~mask])
        left[node] = l_id
        right[node] = r_id
        stack.append((l_id, idx[mask], depth + 1))
        stack.append((r_id, idx[~mask], depth + 1))

    return TreeArrays(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        is_equality=np.array(is_eq, dtype=bool),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        prob=np.array(prob, dtype=np.float64),
    )


def tree_proba(tree: TreeArrays, X: np.ndarray) -> np.ndarray:
    """Class-1 probability for every row, routed in bulk."""
    out = np.empty(X.shape[0])
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        f = tree.feature[node]
        if f == _LEAF:
            out[idx] = tree.prob[node]
            continue
        col = X[idx, f]
        mask = (col == tree.threshold[node]) if tree.is_equality[node] else \
            (col <= tree.threshold[node])
        stack.append((tree.left[node], idx[mask]))
        stack.append((tree.right[node], idx[~mask]))
    return out


def tree_to_jsonable(tree: TreeArrays) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "is_equality": tree.is_equality.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "prob": tree.prob.tolist(),
    }


def tree_from_jsonable(blob: dict) -> TreeArrays:
    return TreeArrays(
        feature=np.array(blob["feature"], dtype=np.int64),
        threshold=np.array(blob["threshold"], dtype=np.float64),
        is_equality=np.array(blob["is_equality"], dtype=bool),
        left=np.array(blob["left"], dtype=np.int64),
        right=np.array(blob["right"], dtype=np.int64),
        prob=np.array(blob["prob"], dtype=np.float64),
    )
