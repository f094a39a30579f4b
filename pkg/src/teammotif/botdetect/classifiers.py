"""Bot/human classifiers: L2 logistic regression fitted by gradient descent
and gradient-boosted regression trees on logistic loss, both deterministic.

Boosting fits each tree to the current residuals with exact greedy
squared-error splits, then sets leaf values by a damped Newton step.  A
per-round backstop halves the step until training loss is non-increasing,
which makes the monotone-loss property a hard guarantee.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import AccountFeatures, Label, encode_features

MODEL_FORMAT_VERSION = 1

#: Leaf log-odds step clip; keeps pure-leaf Newton steps finite.
_MAX_LEAF = 10.0


class ClassifierKind(Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    GRADIENT_BOOSTING = "gradient_boosting"


class DegenerateLabelsError(ValueError):
    """Training data contains only one class."""


class NonFiniteFeatureError(ValueError):
    """A feature value is NaN or infinite."""


class UnfittedModelError(RuntimeError):
    """Prediction requested before the model was fitted."""


GRADIENT_BOOSTING_DEFAULTS = {
    "n_rounds": 100,
    "max_depth": 3,
    "learning_rate": 0.1,
    "min_samples_leaf": 1,
}

LOGISTIC_REGRESSION_DEFAULTS = {
    "l2": 1.0,
    "learning_rate": 1.0,
    "max_iter": 2000,
    "tol": 1e-6,
}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_loss(y: np.ndarray, z: np.ndarray) -> float:
    # mean logistic loss on raw scores, computed stably via logaddexp
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def _check_matrix(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if not np.isfinite(X).all():
        raise NonFiniteFeatureError("feature matrix contains NaN or infinite values")
    return X


# ---------------------------------------------------------------------------
# regression trees for boosting

def _fit_tree(X: np.ndarray, g: np.ndarray, h: np.ndarray, max_depth: int, min_leaf: int) -> dict:
    """Depth-limited regression tree on residuals g; leaves take a clipped
    Newton step sum(g)/sum(h).  Nodes are plain dicts, JSON-ready."""

    def leaf(idx: np.ndarray) -> dict:
        value = g[idx].sum() / (h[idx].sum() + 1e-16)
        return {"value": float(np.clip(value, -_MAX_LEAF, _MAX_LEAF))}

    def best_split(idx: np.ndarray) -> tuple[float, int, float] | None:
        residuals = g[idx]
        best: tuple[float, int, float] | None = None
        for feature in range(X.shape[1]):
            values = X[idx, feature]
            order = np.argsort(values, kind="stable")
            xs = values[order]
            rs = residuals[order]
            boundary = xs[:-1] != xs[1:]
            if min_leaf > 1:
                n = len(idx)
                positions = np.arange(1, n)
                boundary &= (positions >= min_leaf) & (n - positions >= min_leaf)
            if not boundary.any():
                continue
            csum = np.cumsum(rs)
            csq = np.cumsum(rs * rs)
            n_left = np.arange(1, len(rs), dtype=np.float64)
            n_right = len(rs) - n_left
            sse_left = csq[:-1] - csum[:-1] ** 2 / n_left
            sse_right = (csq[-1] - csq[:-1]) - (csum[-1] - csum[:-1]) ** 2 / n_right
            total = np.where(boundary, sse_left + sse_right, np.inf)
            cut = int(np.argmin(total))
            score = float(total[cut])
            if best is None or score < best[0]:
                best = (score, feature, float((xs[cut] + xs[cut + 1]) / 2.0))
        return best

    def build(idx: np.ndarray, depth: int) -> dict:
        if depth >= max_depth or len(idx) < 2 * min_leaf or np.ptp(g[idx]) == 0.0:
            return leaf(idx)
        split = best_split(idx)
        if split is None:
            return leaf(idx)
        _, feature, threshold = split
        mask = X[idx, feature] <= threshold
        return {
            "feature": feature,
            "threshold": threshold,
            "left": build(idx[mask], depth + 1),
            "right": build(idx[~mask], depth + 1),
        }

    return build(np.arange(len(g)), 0)


def _tree_predict(node: dict, X: np.ndarray, out: np.ndarray, idx: np.ndarray) -> None:
    if "value" in node:
        out[idx] = node["value"]
        return
    mask = X[idx, node["feature"]] <= node["threshold"]
    _tree_predict(node["left"], X, out, idx[mask])
    _tree_predict(node["right"], X, out, idx[~mask])


def tree_scores(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.zeros(len(X), dtype=np.float64)
    _tree_predict(node, X, out, np.arange(len(X)))
    return out


class _GradientBoosting:
    def __init__(self, n_rounds: int, max_depth: int, learning_rate: float, min_samples_leaf: int):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.base_score: float = 0.0
        self.trees: list[dict] = []
        self.tree_weights: list[float] = []
        self.train_losses: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        prior = float(np.clip(y.mean(), 1e-12, 1 - 1e-12))
        self.base_score = float(np.log(prior / (1.0 - prior)))
        scores = np.full(len(y), self.base_score)
        loss = _log_loss(y, scores)
        self.train_losses = [loss]
        for _ in range(self.n_rounds):
            p = _sigmoid(scores)
            g = y - p
            h = p * (1.0 - p)
            tree = _fit_tree(X, g, h, self.max_depth, self.min_samples_leaf)
            step = self.learning_rate * tree_scores(tree, X)
            weight = self.learning_rate
            new_loss = _log_loss(y, scores + step)
            while new_loss > loss and weight > 1e-12:
                step *= 0.5
                weight *= 0.5
                new_loss = _log_loss(y, scores + step)
            if new_loss > loss:
                step[:] = 0.0
                weight = 0.0
                new_loss = loss
            scores += step
            loss = new_loss
            self.trees.append(tree)
            self.tree_weights.append(weight)
            self.train_losses.append(loss)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        scores = np.full(len(X), self.base_score)
        for tree, weight in zip(self.trees, self.tree_weights):
            if weight:
                scores += weight * tree_scores(tree, X)
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_scores(X))

    def to_state(self) -> dict:
        return {
            "base_score": self.base_score,
            "trees": self.trees,
            "tree_weights": self.tree_weights,
            "train_losses": self.train_losses,
        }

    @classmethod
    def from_state(cls, params: dict, state: dict) -> "_GradientBoosting":
        model = cls(**params)
        model.base_score = state["base_score"]
        model.trees = state["trees"]
        model.tree_weights = state["tree_weights"]
        model.train_losses = state.get("train_losses", [])
        return model


class _LogisticRegression:
    def __init__(self, l2: float, learning_rate: float, max_iter: int, tol: float):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol
        self.weights: np.ndarray | None = None
        self.intercept: float = 0.0
        self.center: np.ndarray | None = None
        self.scale: np.ndarray | None = None

    def _objective(self, Xs: np.ndarray, y: np.ndarray, w: np.ndarray, b: float) -> float:
        z = Xs @ w + b
        return _log_loss(y, z) + 0.5 * self.l2 * float(w @ w) / len(y)

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        self.center = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale = scale
        Xs = (X - self.center) / scale
        n = len(y)
        w = np.zeros(X.shape[1])
        b = 0.0
        objective = self._objective(Xs, y, w, b)
        for _ in range(self.max_iter):
            p = _sigmoid(Xs @ w + b)
            grad_w = Xs.T @ (p - y) / n + self.l2 * w / n
            grad_b = float(np.mean(p - y))
            grad_norm = max(float(np.abs(grad_w).max()), abs(grad_b))
            if grad_norm < self.tol:
                break
            step = self.learning_rate
            grad_sq = float(grad_w @ grad_w) + grad_b * grad_b
            while step > 1e-12:
                candidate = self._objective(Xs, y, w - step * grad_w, b - step * grad_b)
                if candidate <= objective - 1e-4 * step * grad_sq:
                    break
                step *= 0.5
            w -= step * grad_w
            b -= step * grad_b
            objective = self._objective(Xs, y, w, b)
        self.weights = w
        self.intercept = b

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        Xs = (X - self.center) / self.scale
        return Xs @ self.weights + self.intercept

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_scores(X))

    def to_state(self) -> dict:
        return {
            "weights": list(map(float, self.weights)),
            "intercept": self.intercept,
            "center": list(map(float, self.center)),
            "scale": list(map(float, self.scale)),
        }

    @classmethod
    def from_state(cls, params: dict, state: dict) -> "_LogisticRegression":
        model = cls(**params)
        model.weights = np.asarray(state["weights"], dtype=np.float64)
        model.intercept = float(state["intercept"])
        model.center = np.asarray(state["center"], dtype=np.float64)
        model.scale = np.asarray(state["scale"], dtype=np.float64)
        return model


@dataclass
class Classifier:
    """A fitted model plus the metadata needed to persist and reuse it."""

    kind: ClassifierKind
    params: dict
    seed: int = 0
    threshold: float = 0.5
    _model: object | None = field(default=None, repr=False)

    @property
    def fitted(self) -> bool:
        return self._model is not None

    def predict_proba_matrix(self, X: np.ndarray) -> np.ndarray:
        if self._model is None:
            raise UnfittedModelError("classifier has not been trained")
        return self._model.predict_proba(_check_matrix(X))

    @property
    def train_losses(self) -> list[float]:
        if self._model is None:
            raise UnfittedModelError("classifier has not been trained")
        return getattr(self._model, "train_losses", [])


def resolve_params(kind: ClassifierKind, params: dict | None) -> dict:
    defaults = (
        GRADIENT_BOOSTING_DEFAULTS if kind is ClassifierKind.GRADIENT_BOOSTING else LOGISTIC_REGRESSION_DEFAULTS
    )
    merged = dict(defaults)
    if params:
        unknown = set(params) - set(defaults)
        if unknown:
            raise ValueError(f"unknown {kind.value} parameters: {sorted(unknown)}")
        merged.update(params)
    return merged


def train(
    kind: ClassifierKind,
    features: Sequence[AccountFeatures] | np.ndarray,
    labels: Sequence[Label],
    params: dict | None = None,
    seed: int = 0,
    threshold: float = 0.5,
) -> Classifier:
    """Fit a classifier on account features; Bot is the positive class.

    Both kinds are deterministic; ``seed`` is recorded for provenance.
    """
    X = features if isinstance(features, np.ndarray) else encode_features(features)
    X = _check_matrix(X)
    if len(X) != len(labels):
        raise ValueError(f"{len(X)} feature rows but {len(labels)} labels")
    if len(X) < 2:
        raise ValueError("need at least 2 training samples")
    y = np.array([1.0 if label is Label.BOT else 0.0 for label in labels])
    if y.min() == y.max():
        raise DegenerateLabelsError("training labels contain a single class")

    merged = resolve_params(kind, params)
    if kind is ClassifierKind.GRADIENT_BOOSTING:
        model: object = _GradientBoosting(**merged)
    else:
        model = _LogisticRegression(**merged)
    model.fit(X, y)
    return Classifier(kind=kind, params=merged, seed=seed, threshold=threshold, _model=model)


def predict(model: Classifier, features: AccountFeatures | np.ndarray) -> tuple[float, Label]:
    """Probability that the account is a bot plus the thresholded label
    (Bot when probability >= threshold)."""
    row = features if isinstance(features, np.ndarray) else encode_features([features])[0]
    probability = float(model.predict_proba_matrix(np.atleast_2d(row))[0])
    label = Label.BOT if probability >= model.threshold else Label.HUMAN
    return probability, label


def predict_batch(model: Classifier, features: Sequence[AccountFeatures]) -> list[tuple[float, Label]]:
    X = encode_features(features)
    probabilities = model.predict_proba_matrix(X)
    return [
        (float(p), Label.BOT if p >= model.threshold else Label.HUMAN) for p in probabilities
    ]


def save_model(model: Classifier, path) -> None:
    """Persist a fitted classifier as a versioned JSON document."""
    if model._model is None:
        raise UnfittedModelError("cannot persist an unfitted classifier")
    document = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind.value,
        "params": model.params,
        "seed": model.seed,
        "threshold": model.threshold,
        "state": model._model.to_state(),
    }
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def load_model(path) -> Classifier:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    version = document.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    kind = ClassifierKind(document["kind"])
    params = document["params"]
    if kind is ClassifierKind.GRADIENT_BOOSTING:
        model: object = _GradientBoosting.from_state(params, document["state"])
    else:
        model = _LogisticRegression.from_state(params, document["state"])
    return Classifier(
        kind=kind,
        params=params,
        seed=document.get("seed", 0),
        threshold=document.get("threshold", 0.5),
        _model=model,
    )
