"""
Linear readouts for conductance and raw-amplitude features.

Evenly spaced subsampling of traces into feature vectors, a stratified
train/test split, three from-scratch linear classifiers (multinomial logistic
regression, shrinkage LDA, one-vs-rest linear SVM) and evaluation metrics.
Every trainer standardizes features with train-split statistics and starts
from a deterministic initial point, so identical data gives identical weights.
"""

import time
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.linalg import pinvh
from scipy.special import logsumexp
from sklearn.metrics import confusion_matrix
from sklearn.preprocessing import StandardScaler

from nanores.config.settings import ClassifierSettings
from nanores.errors import (
    DegenerateLabels,
    InsufficientData,
    InvalidArgument,
    NumericalError,
    ShapeError,
)
from nanores.models.classifier import ClassifierModel, EvalReport, FeatureMatrix

logger = structlog.get_logger()


# subsampling

def subsample_indices(n: int, k: int) -> np.ndarray:
    """Indices floor(i * n / k) for i = 0..k-1."""
    if k < 1 or k > n:
        raise InvalidArgument("Subset size must lie in 1..N", k=k, n=n)
    return (np.arange(k, dtype=np.int64) * n) // k


def subsample(trace: Sequence[float], k: int) -> np.ndarray:
    """Pick ``k`` evenly spaced timesteps; no averaging."""
    values = np.asarray(trace, dtype=np.float64)
    return values[subsample_indices(len(values), k)]


def subsample_matrix(
    rows: np.ndarray, labels: Sequence[int], k: int, source: str = "raw"
) -> FeatureMatrix:
    """Subsample every row of an (N, T) trace matrix with the same index rule."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    idx = subsample_indices(rows.shape[1], k)
    return FeatureMatrix(rows=rows[:, idx], labels=np.asarray(labels), subset_size=k, source=source)


# splitting

def split_indices(
    labels: Sequence[int], test_fraction: float = 0.1, seed: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stratified split of row indices.

    Each class (in ascending order) is permuted by one seeded generator and
    round(test_fraction * count) of its rows, at least 1 and at most count-1,
    go to the test side. Index-based so raw and hybrid features of the same
    clips share memberships.
    """
    if not 0.0 < test_fraction < 1.0:
        raise InvalidArgument("test_fraction must lie in (0, 1)", test_fraction=test_fraction)
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < 2:
            raise InsufficientData(
                "Every class needs at least two samples", label=int(c), count=len(members)
            )
        members = rng.permutation(members)
        n_test = int(np.floor(test_fraction * len(members) + 0.5))
        n_test = min(max(n_test, 1), len(members) - 1)
        test.append(members[:n_test])
        train.append(members[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(
    features: FeatureMatrix, test_fraction: float = 0.1, seed: int = 0
) -> Tuple[FeatureMatrix, FeatureMatrix]:
    train_idx, test_idx = split_indices(features.labels, test_fraction, seed)
    return features.take(train_idx), features.take(test_idx)


# training

def _prepare(train: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray, list, StandardScaler]:
    if not np.all(np.isfinite(train.rows)):
        raise NumericalError("Non-finite feature values", source=train.source)
    classes = train.classes
    if len(classes) < 2:
        raise DegenerateLabels("Training needs at least two classes", classes=classes)
    scaler = StandardScaler().fit(train.rows)
    X = scaler.transform(train.rows)
    y = np.searchsorted(classes, train.labels)
    return X, y, classes, scaler


def logistic_loss_and_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Mean multinomial cross-entropy plus (l2 / 2) ||W||^2, with its gradient.

    ``Y`` is the one-hot target matrix (samples x classes).
    """
    n = X.shape[0]
    Z = X @ W.T + b
    log_p = Z - logsumexp(Z, axis=1, keepdims=True)
    loss = -float(np.sum(Y * log_p)) / n + 0.5 * l2 * float(np.sum(W * W))
    G = (np.exp(log_p) - Y) / n
    return loss, G.T @ X + l2 * W, G.sum(axis=0)


def train_logistic(train: FeatureMatrix, hyper: Optional[ClassifierSettings] = None) -> ClassifierModel:
    """
    Multinomial logistic regression by full-batch gradient descent.

    The step is 1/L with L the smoothness bound of the loss; stops when the
    gradient max-norm reaches ``tol`` or after ``max_iter`` iterations. The
    loop carries the bias as the last weight column and updates in place.
    """
    hyper = hyper or ClassifierSettings()
    X, y, classes, scaler = _prepare(train)
    n, d = X.shape
    Y = np.eye(len(classes))[y]

    X_aug = np.hstack([X, np.ones((n, 1))])
    smoothness = 0.5 * np.linalg.norm(X_aug, 2) ** 2 / n + hyper.l2
    lr = 1.0 / smoothness

    X_over_n = X_aug / n
    # the bias column is not penalized
    penalty = np.full(d + 1, hyper.l2)
    penalty[-1] = 0.0
    W_aug = np.zeros((len(classes), d + 1))
    iterations = 0
    for iterations in range(1, hyper.max_iter + 1):
        P = X_aug @ W_aug.T
        P -= P.max(axis=1, keepdims=True)
        np.exp(P, out=P)
        P /= P.sum(axis=1, keepdims=True)
        P -= Y
        grad = P.T @ X_over_n
        grad += penalty * W_aug
        if np.abs(grad).max() <= hyper.tol:
            break
        grad *= lr
        W_aug -= grad

    return ClassifierModel(
        kind="LR",
        weights=W_aug[:, :d].copy(),
        biases=W_aug[:, d].copy(),
        classes=classes,
        mean=scaler.mean_.copy(),
        scale=scaler.scale_.copy(),
        iterations=iterations,
    )


def train_lda(train: FeatureMatrix, hyper: Optional[ClassifierSettings] = None) -> ClassifierModel:
    """
    Linear discriminant analysis with diagonal shrinkage of the pooled covariance.

    Scores are x' S^-1 mu_c - mu_c' S^-1 mu_c / 2 + log pi_c with
    S = (1 - gamma) Sigma + gamma diag(Sigma).
    """
    hyper = hyper or ClassifierSettings()
    X, y, classes, scaler = _prepare(train)
    n, d = X.shape
    k = len(classes)

    means = np.vstack([X[y == c].mean(axis=0) for c in range(k)])
    priors = np.bincount(y, minlength=k) / n
    centred = X - means[y]
    dof = n - k if n > k else n
    sigma = centred.T @ centred / dof
    gamma = hyper.shrinkage
    shrunk = (1.0 - gamma) * sigma + gamma * np.diag(np.diag(sigma))

    precision = pinvh(shrunk)
    W = means @ precision
    b = -0.5 * np.einsum("ij,ij->i", W, means) + np.log(priors)
    return ClassifierModel(
        kind="LDA",
        weights=W,
        biases=b,
        classes=classes,
        mean=scaler.mean_.copy(),
        scale=scaler.scale_.copy(),
    )


def hinge_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample hinge max(0, 1 - y (w.x + b)) for labels in {-1, +1}."""
    return np.maximum(0.0, 1.0 - y * (X @ w + b))


def _fit_binary_svm(
    X: np.ndarray, y: np.ndarray, c: float, max_iter: int, tol: float
) -> Tuple[np.ndarray, float, int]:
    """Primal sub-gradient descent on 0.5 ||w||^2 + C sum(hinge); returns the best iterate."""
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    eta0 = 1.0 / (1.0 + c * n)
    best_obj, best_w, best_b = np.inf, w.copy(), b
    previous = None
    epoch = 0
    for epoch in range(1, max_iter + 1):
        margins = y * (X @ w + b)
        violated = margins < 1.0
        objective = 0.5 * float(w @ w) + c * float(np.sum(1.0 - margins[violated]))
        if objective < best_obj:
            best_obj, best_w, best_b = objective, w.copy(), b
        if previous is not None and abs(previous - objective) < tol:
            break
        previous = objective

        grad_w = w - c * (y[violated] @ X[violated])
        grad_b = -c * float(np.sum(y[violated]))
        eta = eta0 / np.sqrt(epoch)
        w = w - eta * grad_w
        b = b - eta * grad_b
    return best_w, best_b, epoch


def train_svm(train: FeatureMatrix, hyper: Optional[ClassifierSettings] = None) -> ClassifierModel:
    """
    Linear SVM, one-vs-rest for more than two classes.

    A binary problem trains a single separator for the larger class id and
    stores it as rows (-w, w), so swapping the labels negates the decision.
    """
    hyper = hyper or ClassifierSettings()
    X, y, classes, scaler = _prepare(train)

    if len(classes) == 2:
        signs = np.where(y == 1, 1.0, -1.0)
        w, b, iterations = _fit_binary_svm(X, signs, hyper.c, hyper.max_iter, hyper.tol)
        W = np.vstack([-w, w])
        biases = np.array([-b, b])
    else:
        rows, offsets, iterations = [], [], 0
        for c in range(len(classes)):
            signs = np.where(y == c, 1.0, -1.0)
            w, b, epochs = _fit_binary_svm(X, signs, hyper.c, hyper.max_iter, hyper.tol)
            rows.append(w)
            offsets.append(b)
            iterations = max(iterations, epochs)
        W = np.vstack(rows)
        biases = np.array(offsets)

    return ClassifierModel(
        kind="SVM",
        weights=W,
        biases=biases,
        classes=classes,
        mean=scaler.mean_.copy(),
        scale=scaler.scale_.copy(),
        iterations=iterations,
    )


TRAINERS: Dict[str, Callable[[FeatureMatrix, Optional[ClassifierSettings]], ClassifierModel]] = {
    "LR": train_logistic,
    "LDA": train_lda,
    "SVM": train_svm,
}


def train_model(
    train: FeatureMatrix, kind: str = "LR", hyper: Optional[ClassifierSettings] = None
) -> ClassifierModel:
    """Train one classifier and record its wall-clock training time."""
    if kind not in TRAINERS:
        raise InvalidArgument("Unknown classifier kind", kind=kind)
    start = time.perf_counter()
    model = TRAINERS[kind](train, hyper)
    model.train_time = time.perf_counter() - start
    logger.debug(
        "Classifier trained",
        kind=kind,
        source=train.source,
        samples=len(train),
        features=train.n_features,
        iterations=model.iterations,
        train_time=model.train_time,
    )
    return model


# evaluation

def evaluate(model: ClassifierModel, test: FeatureMatrix) -> EvalReport:
    """Accuracy, confusion matrix and per-class precision/recall on ``test``."""
    if test.n_features != model.n_features:
        raise ShapeError(
            "Feature length differs from the model",
            features=test.n_features,
            expected=model.n_features,
        )
    classes = sorted(set(model.classes) | set(test.classes))
    predicted = model.predict(test.rows)
    confusion = confusion_matrix(test.labels, predicted, labels=classes)
    return EvalReport.from_confusion(
        classes, confusion, train_time=model.train_time, subset_size=test.subset_size
    )

