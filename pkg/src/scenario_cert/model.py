"""Layered feed-forward network models, evaluated as black-box maps.

The rest of the pipeline only ever calls ``evaluate``; anything with
``input_dim``, ``output_dim`` and an ``evaluate(x)`` method can stand in
for a :class:`NetworkModel`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ._numeric import rowwise_affine

ACTIVATIONS = ("relu", "identity", "tanh", "sigmoid", "leaky_relu")


def _apply_activation(z: np.ndarray, name: str, slope: float) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "identity":
        return z
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return expit(z)
    if name == "leaky_relu":
        return np.where(z >= 0.0, z, slope * z)
    raise ValueError(f"unknown activation {name!r}; expected one of {ACTIVATIONS}")


@dataclass(frozen=True)
class Layer:
    """One affine map plus elementwise activation. Weights are row-major:
    row i holds the input weights of output neuron i."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "relu"
    slope: float = 0.01  # leaky_relu only

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("layer weights must be a 2-D matrix")
        if b.shape != (w.shape[0],):
            raise ValueError(
                f"bias length {b.shape} does not match weight rows {w.shape[0]}"
            )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("layer weights and bias must be finite")
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        w.setflags(write=False)
        b.setflags(write=False)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class NetworkModel:
    """Immutable stack of layers; safe to share across workers."""

    layers: tuple[Layer, ...] = field()

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        for k in range(1, len(layers)):
            if layers[k].in_dim != layers[k - 1].out_dim:
                raise ValueError(
                    f"layer {k} expects input dim {layers[k].in_dim}, "
                    f"but layer {k - 1} outputs dim {layers[k - 1].out_dim}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Forward pass. Accepts a single input (n_x,) or a batch (n, n_x);
        batch rows are evaluated identically to single-sample calls."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(
                f"input has shape {x.shape}, expected (*, {self.input_dim})"
            )
        if not np.isfinite(x).all():
            raise ValueError("input must be finite")
        z = x
        for layer in self.layers:
            z = rowwise_affine(z, layer.weights, layer.bias)
            z = _apply_activation(z, layer.activation, layer.slope)
        return z[0] if single else z

    __call__ = evaluate

    def to_dict(self) -> dict:
        out = []
        for layer in self.layers:
            d = {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            if layer.activation == "leaky_relu":
                d["slope"] = layer.slope
            out.append(d)
        return {"layers": out}


def network_from_dict(data: dict) -> NetworkModel:
    if not isinstance(data, dict) or "layers" not in data:
        raise ValueError("network JSON must be an object with a 'layers' list")
    raw = data["layers"]
    if not isinstance(raw, list) or not raw:
        raise ValueError("'layers' must be a non-empty list")
    layers = []
    for k, entry in enumerate(raw):
        try:
            layers.append(
                Layer(
                    weights=np.asarray(entry["weights"], dtype=np.float64),
                    bias=np.asarray(entry["bias"], dtype=np.float64),
                    activation=entry.get("activation", "relu"),
                    slope=float(entry.get("slope", 0.01)),
                )
            )
        except KeyError as exc:
            raise ValueError(f"layer {k} is missing field {exc}") from exc
    return NetworkModel(tuple(layers))


def load_model(path) -> NetworkModel:
    """Load and validate a network from its JSON file."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"could not parse network file {path}: {exc}") from exc
    return network_from_dict(data)


def random_relu_network(dims, seed: int, scale: float = 1.0) -> NetworkModel:
    """Random ReLU network with the given layer widths, e.g. (5, 35, 30, 2).
    Hidden layers use ReLU, the last layer is affine. Weights are Gaussian
    with He-style fan-in scaling; deterministic in the seed."""
    if len(dims) < 2:
        raise ValueError("need at least input and output dims")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    layers = []
    for k in range(len(dims) - 1):
        fan_in, fan_out = dims[k], dims[k + 1]
        w = rng.standard_normal((fan_out, fan_in)) * scale * np.sqrt(2.0 / fan_in)
        b = rng.standard_normal(fan_out) * 0.1
        act = "relu" if k < len(dims) - 2 else "identity"
        layers.append(Layer(w, b, act))
    return NetworkModel(tuple(layers))
