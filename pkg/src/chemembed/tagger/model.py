"""The tagger network and its hand-derived gradients.

Per token: a frozen pre-trained word vector (zero for out-of-vocabulary
words; the character encoder is the OOV mechanism) concatenated with a
bidirectional character-GRU encoding.  Dropout with inverted scaling is
applied to the character encoding and then to the concatenated token
input, train mode only.  A bidirectional token GRU feeds a linear
projection to per-tag emission scores, consumed by either a CRF or an
independent per-token softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..embeddings import EmbeddingTable
from .config import TaggerConfig
from .crf import crf_nll_and_grads, viterbi_decode
from .gru import GRUWeights, gru_backward, gru_forward, bigru_backward, bigru_forward, reverse_padded

UNK_CHAR_ID = 0  # row 0 of the char embedding matrix; also used for padding


@dataclass(frozen=True)
class TaggerParameters:
    """All trainable arrays plus the symbol inventories they are sized for."""

    arrays: dict[str, np.ndarray]
    tags: tuple[str, ...]
    alphabet: tuple[str, ...]
    word_dim: int
    _char_ids: dict[str, int] = field(default=None, repr=False, compare=False, init=False)
    _tag_ids: dict[str, int] = field(default=None, repr=False, compare=False, init=False)

    def __post_init__(self):
        object.__setattr__(self, "_char_ids",
                           {c: i + 1 for i, c in enumerate(self.alphabet)})
        object.__setattr__(self, "_tag_ids",
                           {t: i for i, t in enumerate(self.tags)})

    def char_id(self, ch: str) -> int:
        return self._char_ids.get(ch, UNK_CHAR_ID)

    def tag_id(self, tag: str) -> int:
        return self._tag_ids[tag]

    def gru(self, prefix: str) -> GRUWeights:
        return GRUWeights(self.arrays[f"{prefix}_w"], self.arrays[f"{prefix}_u"],
                          self.arrays[f"{prefix}_b"])

    def clone(self) -> "TaggerParameters":
        return replace(self, arrays={k: v.copy() for k, v in self.arrays.items()})

    def check_finite(self) -> None:
        for name, arr in self.arrays.items():
            if not np.all(np.isfinite(arr)):
                raise FloatingPointError(f"non-finite values in parameter {name!r}")


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def init_parameters(config: TaggerConfig, tags: tuple[str, ...],
                    alphabet: tuple[str, ...], word_dim: int,
                    rng: np.random.Generator) -> TaggerParameters:
    """Fresh parameters; shapes follow the config and symbol inventories."""
    dc, hc, ht = config.char_embed_dim, config.char_hidden, config.token_hidden
    din = word_dim + 2 * hc
    k = len(tags)
    arrays: dict[str, np.ndarray] = {
        "char_embed": rng.normal(0.0, 0.5, size=(len(alphabet) + 1, dc)),
    }
    for prefix, in_dim, hidden in (("char_fw", dc, hc), ("char_bw", dc, hc),
                                   ("tok_fw", din, ht), ("tok_bw", din, ht)):
        arrays[f"{prefix}_w"] = _glorot(rng, in_dim, 3 * hidden)
        arrays[f"{prefix}_u"] = _glorot(rng, hidden, 3 * hidden)
        arrays[f"{prefix}_b"] = np.zeros(3 * hidden)
    arrays["emit_w"] = _glorot(rng, 2 * ht, k)
    arrays["emit_b"] = np.zeros(k)
    arrays["crf_trans"] = np.zeros((k + 2, k + 2))
    return TaggerParameters(arrays, tuple(tags), tuple(alphabet), word_dim)


def corpus_alphabet(sentences) -> tuple[str, ...]:
    """Sorted set of characters appearing in the sentences' surfaces."""
    chars: set[str] = set()
    for sentence in sentences:
        for token in sentence.tokens:
            chars.update(token.surface)
    return tuple(sorted(chars))


def lookup_word_vector(table: EmbeddingTable, word: str) -> np.ndarray | None:
    """Exact-match lookup with a lowercased fallback; None when absent."""
    if word in table:
        return table.vector(word)
    lowered = word.lower()
    if lowered != word and lowered in table:
        return table.vector(lowered)
    return None


# ---------------------------------------------------------------------------
# batched forward/backward


class _BatchCache:
    __slots__ = ("surfaces", "mask", "lengths", "word_dim", "char_ids",
                 "char_mask", "char_lengths", "slot_b", "slot_t",
                 "char_states_f", "char_cache_f", "char_cache_r",
                 "char_drop", "token_drop", "tok_states", "tok_cache",
                 "train_mode")


def _batch_forward(batch_surfaces: list[tuple[str, ...]], table: EmbeddingTable,
                   params: TaggerParameters, config: TaggerConfig,
                   train_mode: bool, rng: np.random.Generator | None):
    """Emission scores (B, T, tags) for a padded batch, plus backprop cache."""
    if train_mode and (config.char_dropout > 0 or config.token_dropout > 0) and rng is None:
        raise ValueError("train_mode with dropout requires an rng")
    bsz = len(batch_surfaces)
    lengths = np.array([len(s) for s in batch_surfaces], dtype=np.int64)
    steps = int(lengths.max())
    mask = (np.arange(steps)[None, :] < lengths[:, None]).astype(np.float64)

    word_vecs = np.zeros((bsz, steps, params.word_dim))
    slot_b, slot_t, words = [], [], []
    for b, surfaces in enumerate(batch_surfaces):
        for t, word in enumerate(surfaces):
            vec = lookup_word_vector(table, word)
            if vec is not None:
                word_vecs[b, t] = vec
            slot_b.append(b)
            slot_t.append(t)
            words.append(word)
    slot_b = np.array(slot_b, dtype=np.int64)
    slot_t = np.array(slot_t, dtype=np.int64)

    char_lengths = np.array([len(w) for w in words], dtype=np.int64)
    max_chars = int(char_lengths.max())
    char_ids = np.zeros((len(words), max_chars), dtype=np.int64)
    for i, word in enumerate(words):
        for j, ch in enumerate(word):
            char_ids[i, j] = params.char_id(ch)
    char_mask = (np.arange(max_chars)[None, :] < char_lengths[:, None]).astype(np.float64)

    hc = config.char_hidden
    char_x = params.arrays["char_embed"][char_ids]
    w_cf, w_cb = params.gru("char_fw"), params.gru("char_bw")
    states_f, cache_f = gru_forward(char_x, char_mask, w_cf)
    char_x_rev = reverse_padded(char_x, char_lengths)
    states_r, cache_r = gru_forward(char_x_rev, char_mask, w_cb)
    encodings = np.concatenate([states_f[:, -1], states_r[:, -1]], axis=1)

    char_enc = np.zeros((bsz, steps, 2 * hc))
    char_enc[slot_b, slot_t] = encodings

    cache = _BatchCache()
    cache.train_mode = train_mode
    if train_mode and config.char_dropout > 0:
        keep = 1.0 - config.char_dropout
        cache.char_drop = (rng.random(char_enc.shape) < keep) / keep
        char_enc = char_enc * cache.char_drop
    else:
        cache.char_drop = None

    x = np.concatenate([word_vecs, char_enc], axis=2)
    if train_mode and config.token_dropout > 0:
        keep = 1.0 - config.token_dropout
        cache.token_drop = (rng.random(x.shape) < keep) / keep
        x = x * cache.token_drop
    else:
        cache.token_drop = None

    w_tf, w_tb = params.gru("tok_fw"), params.gru("tok_bw")
    tok_states, tok_cache = bigru_forward(x, mask, w_tf, w_tb)
    emissions = tok_states @ params.arrays["emit_w"] + params.arrays["emit_b"]

    cache.surfaces = batch_surfaces
    cache.mask = mask
    cache.lengths = lengths
    cache.word_dim = params.word_dim
    cache.char_ids = char_ids
    cache.char_mask = char_mask
    cache.char_lengths = char_lengths
    cache.slot_b = slot_b
    cache.slot_t = slot_t
    cache.char_states_f = states_f
    cache.char_cache_f = cache_f
    cache.char_cache_r = cache_r
    cache.tok_states = tok_states
    cache.tok_cache = tok_cache
    return emissions, cache


def _batch_backward(d_emissions: np.ndarray, cache: _BatchCache,
                    params: TaggerParameters, config: TaggerConfig) -> dict[str, np.ndarray]:
    """Gradients of the batch loss w.r.t. every trainable array."""
    grads = {name: np.zeros_like(arr) for name, arr in params.arrays.items()}
    tok_states = cache.tok_states
    grads["emit_w"] = np.einsum("bth,btk->hk", tok_states, d_emissions)
    grads["emit_b"] = d_emissions.sum(axis=(0, 1))
    d_states = d_emissions @ params.arrays["emit_w"].T

    w_tf, w_tb = params.gru("tok_fw"), params.gru("tok_bw")
    dx, (dw_f, du_f, db_f), (dw_b, du_b, db_b) = bigru_backward(
        d_states, cache.mask, cache.tok_cache, w_tf, w_tb)
    grads["tok_fw_w"], grads["tok_fw_u"], grads["tok_fw_b"] = dw_f, du_f, db_f
    grads["tok_bw_w"], grads["tok_bw_u"], grads["tok_bw_b"] = dw_b, du_b, db_b

    if cache.token_drop is not None:
        dx = dx * cache.token_drop
    d_char_enc = dx[:, :, cache.word_dim:]
    if cache.char_drop is not None:
        d_char_enc = d_char_enc * cache.char_drop

    d_encodings = d_char_enc[cache.slot_b, cache.slot_t]
    hc = config.char_hidden
    n_words, max_chars = cache.char_ids.shape
    w_cf, w_cb = params.gru("char_fw"), params.gru("char_bw")

    d_states_f = np.zeros((n_words, max_chars, hc))
    d_states_f[:, -1] = d_encodings[:, :hc]
    dxc_f, dw_cf, du_cf, db_cf = gru_backward(
        d_states_f, cache.char_mask, cache.char_cache_f, w_cf)
    grads["char_fw_w"], grads["char_fw_u"], grads["char_fw_b"] = dw_cf, du_cf, db_cf

    d_states_r = np.zeros((n_words, max_chars, hc))
    d_states_r[:, -1] = d_encodings[:, hc:]
    dxc_r, dw_cb, du_cb, db_cb = gru_backward(
        d_states_r, cache.char_mask, cache.char_cache_r, w_cb)
    grads["char_bw_w"], grads["char_bw_u"], grads["char_bw_b"] = dw_cb, du_cb, db_cb

    dxc = dxc_f + reverse_padded(dxc_r, cache.char_lengths)
    valid = cache.char_mask.astype(bool)
    np.add.at(grads["char_embed"], cache.char_ids[valid], dxc[valid])
    return grads


def _softmax_nll_and_grad(emissions: np.ndarray, tag_ids: np.ndarray):
    """Per-token cross-entropy over one sentence; returns (nll, d_emissions)."""
    shifted = emissions - emissions.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    steps = emissions.shape[0]
    nll = -float(log_probs[np.arange(steps), tag_ids].sum())
    d_em = np.exp(log_probs)
    d_em[np.arange(steps), tag_ids] -= 1.0
    return nll, d_em


def loss_and_grads(batch_surfaces: list[tuple[str, ...]],
                   batch_tag_ids: list[np.ndarray],
                   table: EmbeddingTable, params: TaggerParameters,
                   config: TaggerConfig, *, train_mode: bool = True,
                   rng: np.random.Generator | None = None):
    """Mean per-sentence NLL plus L2 penalty, with full gradients.

    The L2 term is ``l2_strength * 0.5 * sum(theta^2)`` over every
    trainable array.
    """
    emissions, cache = _batch_forward(batch_surfaces, table, params, config,
                                      train_mode, rng)
    bsz = len(batch_surfaces)
    d_emissions = np.zeros_like(emissions)
    total_nll = 0.0
    trans = params.arrays["crf_trans"]
    d_trans = np.zeros_like(trans)
    for i, tag_ids in enumerate(batch_tag_ids):
        steps = cache.lengths[i]
        if config.use_crf:
            nll, d_em, d_tr = crf_nll_and_grads(emissions[i, :steps], tag_ids, trans)
            d_trans += d_tr / bsz
        else:
            nll, d_em = _softmax_nll_and_grad(emissions[i, :steps], tag_ids)
        total_nll += nll
        d_emissions[i, :steps] = d_em / bsz
    grads = _batch_backward(d_emissions, cache, params, config)
    grads["crf_trans"] += d_trans
    loss = total_nll / bsz
    if config.l2_strength > 0:
        for name, arr in params.arrays.items():
            loss += config.l2_strength * 0.5 * float(np.sum(arr * arr))
            grads[name] += config.l2_strength * arr
    return loss, grads


# ---------------------------------------------------------------------------
# single-sentence entry points


def forward_scores(surfaces, table: EmbeddingTable, params: TaggerParameters,
                   config: TaggerConfig, *, train_mode: bool = False,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Emission score matrix (length, tags) for one sentence."""
    surfaces = tuple(surfaces)
    if not surfaces:
        raise ValueError("cannot score an empty sentence")
    emissions, _ = _batch_forward([surfaces], table, params, config,
                                  train_mode, rng)
    return emissions[0]


def encode_word_chars(word: str, params: TaggerParameters,
                      config: TaggerConfig) -> np.ndarray:
    """Concatenated final forward/backward char-GRU states for one word."""
    if not word:
        raise ValueError("cannot encode an empty word")
    ids = np.array([[params.char_id(c) for c in word]], dtype=np.int64)
    char_mask = np.ones((1, len(word)))
    x = params.arrays["char_embed"][ids]
    states_f, _ = gru_forward(x, char_mask, params.gru("char_fw"))
    x_rev = reverse_padded(x, np.array([len(word)]))
    states_r, _ = gru_forward(x_rev, char_mask, params.gru("char_bw"))
    return np.concatenate([states_f[0, -1], states_r[0, -1]])


def predict_tags(surfaces, table: EmbeddingTable, params: TaggerParameters,
                 config: TaggerConfig) -> list[str]:
    """Decode one sentence: Viterbi under the CRF, or per-token argmax."""
    emissions = forward_scores(surfaces, table, params, config)
    if config.use_crf:
        ids = viterbi_decode(emissions, params.arrays["crf_trans"])
    else:
        ids = list(np.argmax(emissions, axis=1))
    return [params.tags[i] for i in ids]
