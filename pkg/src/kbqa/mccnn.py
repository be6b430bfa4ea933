"""Multi-channel convolutional relation classifier, implemented on numpy.

Two channels share one embedding table: a syntactic channel over the
dependency path between the question word and the entity mention, and a
sentential channel over the remaining words of the question. Each channel
convolves a sliding window, max-pools, and applies a dense tanh layer; the
concatenated channel vectors feed a softmax over relation paths. Training is
per-example SGD with AdaGrad on the cross-entropy + L2 objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .kb import RelationPath
from .linguistics import MentionSpan, Question, UP, sentential_context, shortest_dep_path

PAD = "<pad>"
UNK = "<unk>"
CHANNELS = ("syn", "sen")

MODEL_FORMAT = "kbqa-mccnn v1"


class MccnnError(Exception):
    pass


class Vocab:
    """Symbol table shared by words, dependency labels and edge directions.

    Labels are stored as ``dep:<label>`` and directions as ``dir:<arrow>`` so
    they never collide with word lemmas.
    """

    def __init__(self, symbols: Optional[Iterable[str]] = None):
        self._index: dict[str, int] = {PAD: 0, UNK: 1}
        if symbols:
            for sym in symbols:
                self.add(sym)

    def add(self, symbol: str) -> int:
        if symbol not in self._index:
            self._index[symbol] = len(self._index)
        return self._index[symbol]

    def index(self, symbol: str) -> int:
        return self._index.get(symbol, self._index[UNK])

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def symbols(self) -> list[str]:
        return sorted(self._index, key=self._index.get)


def syntactic_symbols(q: Question, m: MentionSpan) -> list[str]:
    """Dependency-path symbols in channel order, e.g. dir, label, word, label, dir."""
    out: list[str] = []
    for element in shortest_dep_path(q, m):
        if element.kind == "word":
            out.append(element.value)
        else:
            label, direction = element.value.rsplit("/", 1)
            if direction == UP:
                out.extend((f"dir:{direction}", f"dep:{label}"))
            else:
                out.extend((f"dep:{label}", f"dir:{direction}"))
    return out


def encode_inputs(q: Question, m: MentionSpan, vocab: Vocab,
                  window: int = 3) -> tuple[list[int], list[int]]:
    """Index sequences for both channels, padded with PAD up to the window size."""

    def encode(symbols: Sequence[str]) -> list[int]:
        seq = [vocab.index(s) for s in symbols]
        while len(seq) < window:
            seq.append(vocab.index(PAD))
        return seq

    return encode(syntactic_symbols(q, m)), encode(sentential_context(q, m))


@dataclass(frozen=True)
class TrainingExample:
    syntactic_input: tuple[int, ...]
    sentential_input: tuple[int, ...]
    label: int

    def __post_init__(self):
        if not self.syntactic_input or not self.sentential_input:
            raise MccnnError("channel inputs must be padded to at least the window size")
        if all(i == 0 for i in self.syntactic_input) and all(
            i == 0 for i in self.sentential_input
        ):
            raise MccnnError("degenerate example: both channels are all-PAD")


@dataclass
class MccnnModel:
    vocab: Vocab
    labels: list[RelationPath]          # class index -> relation path
    params: dict[str, np.ndarray]
    accumulators: dict[str, np.ndarray]
    dim: int
    hidden1: int
    hidden2: int
    window: int
    channels: str = "both"              # "both" | "syntactic" | "sentential"
    label_index: dict[RelationPath, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.label_index:
            self.label_index = {path: k for k, path in enumerate(self.labels)}

    @property
    def num_classes(self) -> int:
        return len(self.labels)


def init_model(vocab: Vocab, labels: Sequence[RelationPath], dim: int = 50,
               hidden1: int = 200, hidden2: int = 100, window: int = 3,
               seed: int = 0, channels: str = "both",
               pretrained: Optional[dict[str, np.ndarray]] = None) -> MccnnModel:
    """Uniform(-0.1, 0.1) init; the PAD embedding row stays zero.

    ``pretrained`` maps words to vectors of length ``dim``; matching vocab
    entries start from those vectors and are fine-tuned like the rest.
    """
    rng = np.random.default_rng(seed)
    V, K = len(vocab), len(labels)
    if K == 0:
        raise MccnnError("label set is empty")

    def uniform(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    params: dict[str, np.ndarray] = {"W_e": uniform(V, dim)}
    params["W_e"][0, :] = 0.0
    if pretrained:
        for i, sym in enumerate(vocab.symbols()):
            if i == 0:
                continue
            vec = pretrained.get(sym)
            if vec is not None:
                if len(vec) != dim:
                    raise MccnnError(
                        f"pretrained vector for {sym!r} has dim {len(vec)}, expected {dim}"
                    )
                params["W_e"][i, :] = vec
    for c in CHANNELS:
        params[f"W1_{c}"] = uniform(hidden1, window * dim)
        params[f"b1_{c}"] = np.zeros(hidden1)
        params[f"W2_{c}"] = uniform(hidden2, hidden1)
        params[f"b2_{c}"] = np.zeros(hidden2)
    params["W3"] = uniform(K, 2 * hidden2)
    params["b3"] = np.zeros(K)
    accumulators = {name: np.zeros_like(arr) for name, arr in params.items()}
    return MccnnModel(vocab, list(labels), params, accumulators,
                      dim, hidden1, hidden2, window, channels)


def load_pretrained_embeddings(path: str) -> dict[str, np.ndarray]:
    """``word v1 v2 ...`` per line, space separated."""
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) < 2:
                continue
            table[parts[0]] = np.array([float(v) for v in parts[1:]])
    return table


def _trim(seq: Sequence[int], window: int) -> list[int]:
    """Strip trailing PAD, then re-pad to the window size.

    This makes the forward pass invariant to appended padding.
    """
    out = list(seq)
    while out and out[-1] == 0:
        out.pop()
    while len(out) < window:
        out.append(0)
    return out


def _channel_forward(model: MccnnModel, seq: list[int], c: str):
    p = model.params
    w, d = model.window, model.dim
    E = p["W_e"][seq]                       # L x d
    L = len(seq)
    positions = L - w + 1
    X = np.empty((w * d, positions))
    for i in range(positions):
        X[:, i] = E[i : i + w].reshape(-1)
    Z = p[f"W1_{c}"] @ X + p[f"b1_{c}"][:, None]
    H = np.tanh(Z)
    argmax = np.argmax(H, axis=1)
    pool = H[np.arange(H.shape[0]), argmax]
    pre2 = p[f"W2_{c}"] @ pool + p[f"b2_{c}"]
    h = np.tanh(pre2)
    cache = {"seq": seq, "X": X, "H": H, "argmax": argmax, "pool": pool, "h": h}
    return h, cache


def forward(model: MccnnModel, syn_seq: Sequence[int], sen_seq: Sequence[int]):
    """Probability vector over relation classes plus the backprop cache."""
    if model.channels == "sentential":
        syn_seq = [0] * model.window
    if model.channels == "syntactic":
        sen_seq = [0] * model.window
    syn = _trim(syn_seq, model.window)
    sen = _trim(sen_seq, model.window)
    h_syn, cache_syn = _channel_forward(model, syn, "syn")
    h_sen, cache_sen = _channel_forward(model, sen, "sen")
    u = np.concatenate([h_syn, h_sen])
    logits = model.params["W3"] @ u + model.params["b3"]
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    probs = exp / exp.sum()
    cache = {"syn": cache_syn, "sen": cache_sen, "u": u, "logits": logits}
    return probs, cache


def predict_proba(model: MccnnModel, ex: TrainingExample) -> np.ndarray:
    probs, _ = forward(model, ex.syntactic_input, ex.sentential_input)
    return probs


def _channel_backward(model: MccnnModel, cache: dict, dh: np.ndarray, c: str,
                      grads: dict[str, np.ndarray]) -> None:
    p = model.params
    w, d = model.window, model.dim
    pre2_grad = dh * (1.0 - cache["h"] ** 2)
    grads[f"W2_{c}"] += np.outer(pre2_grad, cache["pool"])
    grads[f"b2_{c}"] += pre2_grad
    dpool = p[f"W2_{c}"].T @ pre2_grad
    dH = np.zeros_like(cache["H"])
    rows = np.arange(dH.shape[0])
    dH[rows, cache["argmax"]] = dpool
    dZ = dH * (1.0 - cache["H"] ** 2)
    grads[f"W1_{c}"] += dZ @ cache["X"].T
    grads[f"b1_{c}"] += dZ.sum(axis=1)
    dX = p[f"W1_{c}"].T @ dZ                    # (w*d) x positions
    seq = cache["seq"]
    dWe = grads["W_e"]
    for i in range(dX.shape[1]):
        window_grad = dX[:, i].reshape(w, d)
        for j in range(w):
            dWe[seq[i + j]] += window_grad[j]


def loss_and_gradients(model: MccnnModel, batch: Sequence[TrainingExample],
                       lam: float) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy over the batch plus L2, with backprop gradients.

    The returned embedding gradient includes the PAD row; the training loop
    freezes it.
    """
    if not batch:
        raise MccnnError("empty batch")
    if lam < 0:
        raise MccnnError("regularization strength must be >= 0")
    grads = {name: np.zeros_like(arr) for name, arr in model.params.items()}
    loss = 0.0
    for ex in batch:
        probs, cache = forward(model, ex.syntactic_input, ex.sentential_input)
        logits = cache["logits"]
        shifted = logits - logits.max()
        loss += np.log(np.exp(shifted).sum()) - shifted[ex.label]
        dlogits = probs.copy()
        dlogits[ex.label] -= 1.0
        grads["W3"] += np.outer(dlogits, cache["u"])
        grads["b3"] += dlogits
        du = model.params["W3"].T @ dlogits
        h2 = model.hidden2
        _channel_backward(model, cache["syn"], du[:h2], "syn", grads)
        _channel_backward(model, cache["sen"], du[h2:], "sen", grads)
    for name, arr in model.params.items():
        loss += lam * float(np.sum(arr * arr))
        grads[name] += 2.0 * lam * arr
    if not np.isfinite(loss):
        raise MccnnError("non-finite loss")
    return float(loss), grads


def train(model: MccnnModel, dataset: Sequence[TrainingExample], epochs: int,
          learning_rate: float = 0.01, lam: float = 1e-4, seed: int = 0,
          adagrad_eps: float = 1e-8) -> MccnnModel:
    """Per-example SGD with AdaGrad; deterministic for a fixed seed."""
    if not dataset:
        raise MccnnError("empty training set")
    rng = np.random.default_rng(seed)
    order = np.arange(len(dataset))
    for _epoch in range(epochs):
        rng.shuffle(order)
        for idx in order:
            _, grads = loss_and_gradients(model, [dataset[idx]], lam)
            grads["W_e"][0, :] = 0.0  # PAD embedding stays frozen at zero
            for name, g in grads.items():
                acc = model.accumulators[name]
                acc += g * g
                model.params[name] -= learning_rate * g / np.sqrt(acc + adagrad_eps)
                if not np.all(np.isfinite(model.params[name])):
                    raise MccnnError(f"non-finite parameters in block {name}")
    return model


def predict_relations(model: MccnnModel, q: Question, m: MentionSpan,
                      kb_candidates: Iterable[RelationPath]) -> list[tuple[RelationPath, float]]:
    """Candidate relation paths ranked by classifier confidence.

    Paths outside the training label space score 0 and sort last.
    """
    syn, sen = encode_inputs(q, m, model.vocab, model.window)
    probs, _ = forward(model, syn, sen)
    known = []
    unknown = []
    for path in set(kb_candidates):
        k = model.label_index.get(path)
        if k is None:
            unknown.append((path, 0.0))
        else:
            known.append((path, float(probs[k])))
    known.sort(key=lambda t: (-t[1], t[0]))
    unknown.sort(key=lambda t: t[0])
    return known + unknown


# --- persistence ------------------------------------------------------------

def _write_array(fh, name: str, arr: np.ndarray) -> None:
    shape = " ".join(str(s) for s in arr.shape)
    fh.write(f"array {name} {shape}\n")
    fh.write(arr.astype(np.float64).tobytes().hex() + "\n")


def _read_array(lines, lineno: int) -> tuple[str, np.ndarray, int]:
    header = lines[lineno].split()
    name = header[1]
    shape = tuple(int(s) for s in header[2:])
    data = np.frombuffer(bytes.fromhex(lines[lineno + 1]), dtype=np.float64)
    return name, data.reshape(shape).copy(), lineno + 2


def save_model(model: MccnnModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MODEL_FORMAT + "\n")
        fh.write(f"hyper {model.dim} {model.hidden1} {model.hidden2} "
                 f"{model.window} {model.channels}\n")
        syms = model.vocab.symbols()
        fh.write(f"vocab {len(syms)}\n")
        for sym in syms:
            fh.write(sym + "\n")
        fh.write(f"labels {len(model.labels)}\n")
        for path_ in model.labels:
            fh.write(" ".join(path_) + "\n")
        for name in sorted(model.params):
            _write_array(fh, name, model.params[name])
        for name in sorted(model.accumulators):
            _write_array(fh, f"acc:{name}", model.accumulators[name])


def load_model(path: str) -> MccnnModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MODEL_FORMAT:
        raise MccnnError(f"{path}: not a {MODEL_FORMAT} file")
    _, dim, h1, h2, window, channels = lines[1].split()
    lineno = 2
    n_vocab = int(lines[lineno].split()[1])
    symbols = lines[lineno + 1 : lineno + 1 + n_vocab]
    if symbols[:2] != [PAD, UNK]:
        raise MccnnError(f"{path}: corrupt vocabulary block")
    vocab = Vocab(symbols[2:])
    lineno += 1 + n_vocab
    n_labels = int(lines[lineno].split()[1])
    labels = [tuple(l.split()) for l in lines[lineno + 1 : lineno + 1 + n_labels]]
    lineno += 1 + n_labels
    params: dict[str, np.ndarray] = {}
    accumulators: dict[str, np.ndarray] = {}
    while lineno < len(lines) and lines[lineno].startswith("array "):
        name, arr, lineno = _read_array(lines, lineno)
        if name.startswith("acc:"):
            accumulators[name[4:]] = arr
        else:
            params[name] = arr
    return MccnnModel(vocab, labels, params, accumulators,
                      int(dim), int(h1), int(h2), int(window), channels)
