"""Tree-initialized networks with tunable boundary smoothness.

A fitted decision tree compiles into a four-layer network: the first
hidden layer holds one unit per split node, the second one unit per leaf,
and the output layer maps leaves to class probabilities.  Both hidden
layers use ``tanh(gamma * z)`` activations; large gamma values make the
network reproduce the tree's crisp decisions, small values let training
bend the boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import network
from .errors import ConfigError, DataError
from .network import DenseLayer, TrainConfig, TrainHistory
from .tree import DecisionTree, enumerate_structure, tree_sha256

# gamma2 = gamma1 ** (1 / GAMMA_LINK_EXPONENT): the leaf layer stays
# slightly smoother than the split layer but in the same order of
# magnitude, so training can adjust split units without unconstrained
# rewiring of the leaf paths.
GAMMA_LINK_EXPONENT = 1.1

PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")


def gamma2_of(gamma1: float) -> float:
    """Leaf-layer smoothness derived from the split-layer value."""
    if not (np.isfinite(gamma1) and gamma1 > 0):
        raise ConfigError("gamma1 must be a positive finite number")
    return float(gamma1) ** (1.0 / GAMMA_LINK_EXPONENT)


@dataclass
class NdtModel:
    """Four-layer tree network: split, leaf, and output parameter blocks.

    ``layers`` always holds [split (tanh, gain=gamma1), leaf (tanh,
    gain=gamma2), output (identity)].  The gammas are fixed constants of
    the model, never trained.
    """

    layers: list[DenseLayer]
    gamma1: float
    gamma2: float
    provenance: dict | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if len(self.layers) != 3:
            raise ConfigError("a tree network has exactly three weight layers")
        split, leaf, out = self.layers
        if not (np.isfinite(self.gamma1) and self.gamma1 > 0
                and np.isfinite(self.gamma2) and self.gamma2 > 0):
            raise ConfigError("gammas must be positive finite numbers")
        ok = (split.activation == "tanh" and split.gain == self.gamma1
              and leaf.activation == "tanh" and leaf.gain == self.gamma2
              and out.activation == "identity")
        if not ok:
            raise ConfigError("layer activations/gains do not form a tree network")
        n_splits = split.weights.shape[0]
        if leaf.weights.shape != (n_splits + 1, n_splits):
            raise ConfigError("leaf layer must have one more unit than splits")
        if out.weights.shape[1] != n_splits + 1:
            raise ConfigError("output layer width must match the leaf count")

    @classmethod
    def from_arrays(cls, W1, b1, W2, b2, W3, b3, gamma1, gamma2,
                    provenance=None) -> "NdtModel":
        return cls([DenseLayer(W1, b1, "tanh", float(gamma1)),
                    DenseLayer(W2, b2, "tanh", float(gamma2)),
                    DenseLayer(W3, b3, "identity", 1.0)],
                   float(gamma1), float(gamma2), provenance)

    # Named views of the parameter blocks.
    @property
    def W1(self) -> np.ndarray:
        return self.layers[0].weights

    @property
    def b1(self) -> np.ndarray:
        return self.layers[0].bias

    @property
    def W2(self) -> np.ndarray:
        return self.layers[1].weights

    @property
    def b2(self) -> np.ndarray:
        return self.layers[1].bias

    @property
    def W3(self) -> np.ndarray:
        return self.layers[2].weights

    @property
    def b3(self) -> np.ndarray:
        return self.layers[2].bias

    @property
    def n_features(self) -> int:
        return int(self.W1.shape[1])

    @property
    def n_leaves(self) -> int:
        return int(self.W2.shape[0])

    @property
    def class_count(self) -> int:
        return int(self.W3.shape[0])

    def clone(self) -> "NdtModel":
        return NdtModel([layer.clone() for layer in self.layers],
                        self.gamma1, self.gamma2,
                        dict(self.provenance) if self.provenance else None)


def compile_from_tree(tree: DecisionTree, gamma1: float,
                      gamma2: float | None = None) -> NdtModel:
    """Build the network whose crisp limit reproduces the tree.

    With K leaves and preorder structure index (paths P, lengths L):

    * split layer (K-1 x d): row k is the indicator of split k's feature,
      bias -threshold, so unit k fires toward +1 right of the threshold;
    * leaf layer (K x K-1): row l is P[l], bias ``-(L[l] - 1)``, so under
      crisp +-1 inputs the reached leaf's pre-activation is +1 and every
      other leaf's is at most -1;
    * output layer (C x K): column l holds the leaf's class probabilities
      halved, bias the row sums, so crisp leaf activations reproduce the
      leaf distribution exactly; training treats the outputs as logits.
    """
    if gamma2 is None:
        gamma2 = gamma2_of(gamma1)
    structure = enumerate_structure(tree)
    n_splits = len(structure.inner_ids)
    n_leaves = len(structure.leaf_ids)

    W1 = np.zeros((n_splits, tree.n_features))
    b1 = np.zeros(n_splits)
    for k, node_id in enumerate(structure.inner_ids):
        node = tree.nodes[node_id]
        W1[k, node.feature] = 1.0
        b1[k] = -node.threshold

    W2 = structure.paths.astype(np.float64)
    b2 = -(structure.path_lengths.astype(np.float64) - 1.0)

    W3 = np.zeros((tree.class_count, n_leaves))
    for l, node_id in enumerate(structure.leaf_ids):
        W3[:, l] = np.asarray(tree.nodes[node_id].class_probs) / 2.0
    b3 = W3.sum(axis=1)

    provenance = {"tree_sha256": tree_sha256(tree),
                  "gamma1": float(gamma1), "gamma2": float(gamma2),
                  "train_seed": None}
    return NdtModel.from_arrays(W1, b1, W2, b2, W3, b3, gamma1, gamma2,
                                provenance)


def forward(model: NdtModel, X):
    """Class probabilities (softmax over outputs) plus cached activations.

    Each probability row sums to 1 within 1e-9; the caches hold every
    layer's input, scaled pre-activation, and output for the backward
    pass.
    """
    logits, caches = network.forward_layers(model.layers, X)
    return network.softmax(logits), caches


def predict(model: NdtModel, X) -> np.ndarray:
    """Argmax class per row (softmax preserves the logit argmax)."""
    return network.predict_labels(model.layers, X)


def loss_and_gradients(model: NdtModel, X, y):
    """Mean cross-entropy and gradients for the six parameter blocks.

    Returns (loss, grads) with grads keyed "W1", "b1", ..., "b3".  The
    gamma constants are not trainable and have no gradient entries.
    """
    loss, layer_grads = network.loss_and_layer_gradients(model.layers, X, y)
    grads = {}
    for i, (dW, db) in enumerate(layer_grads):
        grads[PARAM_NAMES[2 * i]] = dW
        grads[PARAM_NAMES[2 * i + 1]] = db
    return loss, grads


def train(model: NdtModel, train_view, valid_view, cfg: TrainConfig,
          rng: np.random.Generator, seed: int | None = None
          ) -> tuple[NdtModel, TrainHistory]:
    """Fit with the shared Adam loop; returns (trained model, history).

    The gammas are asserted unchanged: only the weight blocks train.  When
    ``seed`` is given it is recorded in the model provenance.
    """
    layers, history = network.train_network(model.layers, train_view,
                                            valid_view, cfg, rng)
    assert layers[0].gain == model.gamma1 and layers[1].gain == model.gamma2
    provenance = dict(model.provenance) if model.provenance else None
    if provenance is not None and seed is not None:
        provenance["train_seed"] = int(seed)
    return NdtModel(layers, model.gamma1, model.gamma2, provenance), history


def model_to_json(model: NdtModel) -> dict:
    return {"format": "tree-network", "version": 1,
            "gamma1": model.gamma1, "gamma2": model.gamma2,
            "weights": {name: getattr(model, name).tolist()
                        for name in PARAM_NAMES},
            "provenance": model.provenance}


def model_from_json(doc: dict) -> NdtModel:
    if doc.get("format") != "tree-network":
        raise DataError("not a tree-network document")
    w = doc["weights"]
    return NdtModel.from_arrays(*(np.array(w[name]) for name in PARAM_NAMES),
                                doc["gamma1"], doc["gamma2"],
                                doc.get("provenance"))


def save_model(model: NdtModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_json(model), indent=2,
                                     sort_keys=True) + "\n", encoding="utf-8")


def load_model(path) -> NdtModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load model from {path}: {exc}") from exc
    return model_from_json(doc)
