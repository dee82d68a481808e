"""Minimal fully-connected network machinery: forward, exact backprop, Adam,
soft target updates, and text checkpoints. Double precision throughout."""

from __future__ import annotations

import numpy as np

_ACTIVATIONS = ("identity", "logistic")


def _logistic(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Mlp:
    """Fully-connected net with rectifier hidden units and a configurable output
    activation; forward caches intermediates for the exact backward pass."""

    def __init__(self, layer_sizes, seed=0, output_activation="identity", _empty=False):
        if len(layer_sizes) < 2:
            raise ValueError("need at least one layer transition")
        if any(n < 1 for n in layer_sizes):
            raise ValueError(f"layer sizes must be positive, got {layer_sizes}")
        if output_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.layer_sizes = tuple(int(n) for n in layer_sizes)
        self.output_activation = output_activation
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        if _empty:
            return
        rng = np.random.default_rng(seed)
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def forward(self, x: np.ndarray):
        """Returns (output, cache); accepts a single vector or a batch of rows."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        if h.shape[1] != self.input_size:
            raise ValueError(f"input width {h.shape[1]} != {self.input_size}")
        pre_acts = []
        acts = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre_acts.append(z)
            if i < last:
                h = np.maximum(z, 0.0)
            elif self.output_activation == "logistic":
                h = _logistic(z)
            else:
                h = z
            acts.append(h)
        out = h[0] if single else h
        return out, (acts, pre_acts, single)

    def backward(self, cache, grad_out: np.ndarray):
        """Exact gradients of the cached forward pass.

        Returns (param_grads, input_grad) where param_grads is a list of (dW, db).
        """
        if cache is None:
            raise ValueError("backward requires the cache from forward")
        acts, pre_acts, single = cache
        g = np.asarray(grad_out, dtype=np.float64)
        if single:
            g = g.reshape(1, -1)
        if self.output_activation == "logistic":
            y = acts[-1]
            g = g * y * (1.0 - y)
        param_grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            if i < len(self.weights) - 1:
                g = g * (pre_acts[i] > 0)
            dw = acts[i].T @ g
            db = g.sum(axis=0)
            param_grads[i] = (dw, db)
            g = g @ self.weights[i].T
        input_grad = g[0] if single else g
        return param_grads, input_grad

    def copy(self) -> "Mlp":
        """Shape-identical deep copy, e.g. for target networks."""
        other = Mlp(self.layer_sizes, output_activation=self.output_activation, _empty=True)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("#cachegym-mlp v1\n")
            fh.write("layers " + " ".join(map(str, self.layer_sizes)) + "\n")
            fh.write(f"output_activation {self.output_activation}\n")
            for w, b in zip(self.weights, self.biases):
                for v in w.ravel():
                    fh.write(f"{float(v)!r}\n")
                for v in b:
                    fh.write(f"{float(v)!r}\n")

    @classmethod
    def load(cls, path) -> "Mlp":
        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != "#cachegym-mlp v1":
            raise ValueError("not a cachegym-mlp v1 checkpoint")
        sizes = [int(t) for t in lines[1].split()[1:]]
        activation = lines[2].split()[1]
        net = cls(sizes, output_activation=activation, _empty=True)
        values = iter(lines[3:])
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            w = np.array([float(next(values)) for _ in range(fan_in * fan_out)])
            net.weights.append(w.reshape(fan_in, fan_out))
            net.biases.append(np.array([float(next(values)) for _ in range(fan_out)]))
        return net


class Adam:
    """Standard Adam with bias correction, keyed to one network's parameters."""

    def __init__(self, net: Mlp, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        params = net.weights + net.biases
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, net: Mlp, param_grads) -> None:
        grads = [dw for dw, _ in param_grads] + [db for _, db in param_grads]
        params = net.weights + net.biases
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


def soft_update(target: Mlp, source: Mlp, tau: float) -> None:
    """target <- tau * source + (1 - tau) * target, element-wise."""
    if target.layer_sizes != source.layer_sizes:
        raise ValueError("shape mismatch between target and source")
    if not 0 < tau <= 1:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    for tp, sp in zip(target.weights + target.biases, source.weights + source.biases):
        tp *= 1.0 - tau
        tp += tau * sp
