"""The 4-block CNN for 48x48 grayscale expression classification.

Layer sequence (fixed): four blocks of [batchnorm -> conv 3x3 same -> ReLU
-> maxpool 2x2], a flatten, then three dense layers each preceded by
dropout; the two hidden dense layers use sigmoid, the 7-way output layer
feeds a softmax.  Default widths: conv {64,128,512,512}, dense {256,256,7},
dropout 0.3.  48 -> 24 -> 12 -> 6 -> 3 spatially, so the flattened width is
9 * conv_channels[-1] (4608 by default).
"""

from dataclasses import dataclass, field

import numpy as np

from ferlite import nn, rng as _rng
from ferlite.errors import ConfigError, ShapeError
from ferlite.labels import NUM_CLASSES

INPUT_SIZE = 48
NUM_BLOCKS = 4


@dataclass(frozen=True)
class ModelConfig:
    conv_channels: tuple = (64, 128, 512, 512)
    dense_sizes: tuple = (256, 256, NUM_CLASSES)
    kernel_size: int = 3
    dropout_p: float = 0.3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "conv_channels", tuple(int(c) for c in self.conv_channels))
        object.__setattr__(self, "dense_sizes", tuple(int(d) for d in self.dense_sizes))
        if len(self.conv_channels) != NUM_BLOCKS:
            raise ConfigError(f"expected {NUM_BLOCKS} conv channel counts, got {self.conv_channels}")
        if any(c < 1 for c in self.conv_channels):
            raise ConfigError("conv channel counts must be positive")
        if len(self.dense_sizes) != 3 or self.dense_sizes[-1] != NUM_CLASSES:
            raise ConfigError(f"dense sizes must be three values ending in {NUM_CLASSES}")
        if any(d < 1 for d in self.dense_sizes):
            raise ConfigError("dense sizes must be positive")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"kernel size must be odd and positive, got {self.kernel_size}")
        if not 0 <= self.dropout_p < 1:
            raise ConfigError(f"dropout probability must be in [0, 1), got {self.dropout_p}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def flat_width(self):
        side = INPUT_SIZE >> NUM_BLOCKS  # one 2x2 pool per block
        return side * side * self.conv_channels[-1]


def parameter_count(config: ModelConfig) -> int:
    """Closed-form learnable parameter count for a config."""
    total = 0
    cin = 1
    k = config.kernel_size
    for c in config.conv_channels:
        total += 2 * cin                 # batchnorm gamma + beta
        total += c * cin * k * k + c     # conv kernels + bias
        cin = c
    width = config.flat_width
    for d in config.dense_sizes:
        total += d * width + d
        width = d
    return total


# ---------------------------------------------------------------------------
# layers: uniform forward(x, mode, rng) / backward(gy) interface; train-mode
# forward caches whatever backward needs, eval-mode forward writes nothing so
# a trained model can serve concurrent readers.

class Layer:
    frozen = False

    def params(self):
        return {}

    def grads(self):
        return {}

    def forward(self, x, mode, rng):
        raise NotImplementedError

    def backward(self, gy):
        raise NotImplementedError


class BatchNorm(Layer):
    def __init__(self, channels):
        self.gamma = np.ones(channels, dtype=np.float32)
        self.beta = np.zeros(channels, dtype=np.float32)
        self.running_mean = np.zeros(channels, dtype=np.float32)
        self.running_var = np.ones(channels, dtype=np.float32)
        self.updates = 0  # running stats are unusable until > 0
        self._cache = None
        self._grads = {}

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def grads(self):
        return self._grads

    def forward(self, x, mode, rng):
        # a frozen layer keeps its statistics fixed, so it normalizes with
        # the running stats even while the rest of the model trains
        if mode == "train" and not self.frozen:
            out, cache = nn.batchnorm_forward(
                x, self.gamma, self.beta, self.running_mean, self.running_var,
                mode="train")
            self.running_mean = cache["running_mean"]
            self.running_var = cache["running_var"]
            self.updates += 1
            self._cache = cache
            return out
        if self.updates == 0:
            raise ConfigError(
                "batchnorm running statistics are unpopulated; train the model "
                "(or load a trained checkpoint) before eval-mode use")
        out, cache = nn.batchnorm_forward(
            x, self.gamma, self.beta, self.running_mean, self.running_var,
            mode="eval")
        if mode == "train":
            self._cache = cache
        return out

    def backward(self, gy):
        g = nn.batchnorm_backward(self._cache, gy)
        self._grads = {"gamma": g["gamma"], "beta": g["beta"]}
        return g["input"]


class Conv(Layer):
    def __init__(self, cin, cout, k, rng):
        std = np.sqrt(2.0 / (cin * k * k))
        self.w = (rng.standard_normal((cout, cin, k, k), dtype=np.float64) * std).astype(np.float32)
        self.b = np.zeros(cout, dtype=np.float32)
        self._x = None
        self._grads = {}

    def params(self):
        return {"w": self.w, "b": self.b}

    def grads(self):
        return self._grads

    def forward(self, x, mode, rng):
        if mode == "train":
            self._x = x
        return nn.conv2d_forward(x, self.w, self.b)

    def backward(self, gy):
        g = nn.conv2d_backward(self._x, self.w, gy)
        self._grads = {"w": g["kernels"], "b": g["bias"]}
        return g["input"]


class ReLU(Layer):
    def forward(self, x, mode, rng):
        if mode == "train":
            self._x = x
        return nn.relu(x)

    def backward(self, gy):
        return nn.relu_backward(self._x, gy)


class Sigmoid(Layer):
    def forward(self, x, mode, rng):
        out = nn.sigmoid(x)
        if mode == "train":
            self._y = out
        return out

    def backward(self, gy):
        return nn.sigmoid_backward(self._y, gy)


class MaxPool(Layer):
    def forward(self, x, mode, rng):
        out, idx = nn.maxpool2x2_forward(x)
        if mode == "train":
            self._idx = idx
        return out

    def backward(self, gy):
        return nn.maxpool2x2_backward(self._idx, gy)


class Flatten(Layer):
    def forward(self, x, mode, rng):
        if mode == "train":
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, gy):
        return gy.reshape(self._shape)


class Dropout(Layer):
    def __init__(self, p):
        self.p = p

    def forward(self, x, mode, rng):
        out, mask = nn.dropout(x, self.p, rng, mode)
        if mode == "train":
            self._mask = mask
        return out

    def backward(self, gy):
        return nn.dropout_backward(gy, self._mask, self.p)


class Dense(Layer):
    def __init__(self, n_in, n_out, rng):
        std = np.sqrt(2.0 / n_in)
        self.w = (rng.standard_normal((n_out, n_in), dtype=np.float64) * std).astype(np.float32)
        self.b = np.zeros(n_out, dtype=np.float32)
        self._x = None
        self._grads = {}

    def params(self):
        return {"w": self.w, "b": self.b}

    def grads(self):
        return self._grads

    def forward(self, x, mode, rng):
        if mode == "train":
            self._x = x
        return nn.dense_forward(x, self.w, self.b)

    def backward(self, gy):
        g = nn.dense_backward(self._x, self.w, gy)
        self._grads = {"w": g["weights"], "b": g["bias"]}
        return g["input"]


# ---------------------------------------------------------------------------

@dataclass
class FerModel:
    config: ModelConfig
    layers: list = field(default_factory=list)

    def named_layers(self):
        """(name, layer) pairs; names are stable and used by checkpoints."""
        out = []
        block = 0
        dense = 0
        for layer in self.layers:
            if isinstance(layer, BatchNorm):
                block += 1
                out.append((f"block{block}.bn", layer))
            elif isinstance(layer, Conv):
                out.append((f"block{block}.conv", layer))
            elif isinstance(layer, Dense):
                dense += 1
                out.append((f"dense{dense}", layer))
            else:
                out.append((f"layer{len(out)}", layer))
        return out

    def param_layers(self):
        return [(n, l) for n, l in self.named_layers() if l.params()]

    def num_parameters(self):
        return sum(p.size for _, l in self.param_layers() for p in l.params().values())

    def logits(self, batch, mode="eval", rng=None):
        x = np.asarray(batch, dtype=np.float32)
        expected = (1, INPUT_SIZE, INPUT_SIZE)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ShapeError(f"model input must be [B,1,{INPUT_SIZE},{INPUT_SIZE}], got {x.shape}")
        for layer in self.layers:
            x = layer.forward(x, mode, rng)
        return x

    def forward(self, batch, mode="eval", rng=None):
        """Class probabilities [B,7]; rows sum to 1."""
        return nn.softmax(self.logits(batch, mode, rng))

    def backward(self, grad_logits):
        """Backpropagate, stopping below the deepest layer that still trains."""
        lowest = None
        for i, layer in enumerate(self.layers):
            if layer.params() and not layer.frozen:
                lowest = i
                break
        if lowest is None:
            return
        g = grad_logits
        for layer in reversed(self.layers[lowest:]):
            g = layer.backward(g)

    def predict(self, image):
        """Single [1,48,48] image -> (label index, probabilities).

        Ties in the probability vector resolve to the lowest index.
        """
        image = np.asarray(image, dtype=np.float32)
        if image.shape != (1, INPUT_SIZE, INPUT_SIZE):
            raise ShapeError(f"predict expects [1,{INPUT_SIZE},{INPUT_SIZE}], got {image.shape}")
        probs = self.forward(image[None], mode="eval")[0]
        return int(np.argmax(probs)), probs

    def set_frozen(self, names, frozen=True):
        """Freeze/unfreeze layers by checkpoint name."""
        wanted = set(names)
        for name, layer in self.named_layers():
            if name in wanted:
                layer.frozen = frozen
                wanted.discard(name)
        if wanted:
            raise ConfigError(f"unknown layer names: {sorted(wanted)}")


def build_fer_cnn(config: ModelConfig = None) -> FerModel:
    """Freshly initialized model; weights are fan-in scaled normals from the
    config seed, biases zero, batchnorm gamma 1 / beta 0."""
    if config is None:
        config = ModelConfig()
    rng = _rng.make_rng(config.seed, _rng.INIT)
    layers = []
    cin = 1
    k = config.kernel_size
    for c in config.conv_channels:
        layers.append(BatchNorm(cin))
        layers.append(Conv(cin, c, k, rng))
        layers.append(ReLU())
        layers.append(MaxPool())
        cin = c
    layers.append(Flatten())
    width = config.flat_width
    hidden = config.dense_sizes[:-1]
    for d in hidden:
        layers.append(Dropout(config.dropout_p))
        layers.append(Dense(width, d, rng))
        layers.append(Sigmoid())
        width = d
    layers.append(Dropout(config.dropout_p))
    layers.append(Dense(width, config.dense_sizes[-1], rng))
    model = FerModel(config=config, layers=layers)
    assert model.num_parameters() == parameter_count(config)
    return model
