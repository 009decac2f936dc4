"""
CLS pooling over the layer axis.

At every frame the token sequence is [cls; h_1; ...; h_L] (no position
embeddings) and one post-norm transformer encoder layer runs over it;
the output is the CLS token. Only the CLS row is computed: with a single
layer, the other rows matter solely as keys and values, so this is exact.
"""

import numpy as np

from collections import OrderedDict
from typing import Dict, Tuple

from interfaces.spec import InterfaceSpec
from numerics.kernels import (
    gelu,
    gelu_backward,
    layer_norm,
    layer_norm_backward,
    softmax,
    softmax_backward,
)
from numerics.tensor import Tensor


def _tokens(cls: Tensor, h: Tensor) -> Tensor:
    num_layers, num_frames, dim = h.shape
    tokens = np.empty((num_frames, num_layers + 1, dim))
    tokens[:, 0, :] = cls
    tokens[:, 1:, :] = h.transpose(1, 0, 2)
    return tokens


def forward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], h: Tensor) -> Tuple[Tensor, Dict]:
    p = trainable
    num_frames, dim = h.shape[1], h.shape[2]
    heads = spec.heads
    head_dim = dim // heads
    scale = 1.0 / np.sqrt(head_dim)
    tokens = _tokens(p["cls"], h)
    n_tokens = tokens.shape[1]

    # the CLS query is the same at every frame
    query = (p["cls"] @ p["q_weight"] + p["q_bias"]).reshape(heads, head_dim)
    keys = (tokens @ p["k_weight"] + p["k_bias"]).reshape(num_frames, n_tokens, heads, head_dim)
    values = (tokens @ p["v_weight"] + p["v_bias"]).reshape(num_frames, n_tokens, heads, head_dim)

    scores = np.einsum("hj,tnhj->thn", query, keys) * scale
    attn = softmax(scores, axis=-1)
    mixed = np.einsum("thn,tnhj->thj", attn, values).reshape(num_frames, dim)

    res1 = p["cls"] + (mixed @ p["out_weight"] + p["out_bias"])
    norm1 = layer_norm(res1, p["ln1_gamma"], p["ln1_beta"])
    hidden_pre = norm1 @ p["ffn1_weight"] + p["ffn1_bias"]
    hidden = gelu(hidden_pre)
    res2 = norm1 + (hidden @ p["ffn2_weight"] + p["ffn2_bias"])
    z = layer_norm(res2, p["ln2_gamma"], p["ln2_beta"])

    cache = {
        "tokens": tokens, "query": query, "keys": keys, "values": values,
        "attn": attn, "mixed": mixed, "res1": res1, "norm1": norm1,
        "hidden_pre": hidden_pre, "hidden": hidden, "res2": res2,
    }
    return z, cache


def backward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], cache: Dict, grad_z: Tensor):
    p = trainable
    tokens = cache["tokens"]
    num_frames, n_tokens, dim = tokens.shape
    heads = spec.heads
    head_dim = dim // heads
    scale = 1.0 / np.sqrt(head_dim)
    g: Dict[str, Tensor] = {}

    # feed-forward block
    grad_res2, g["ln2_gamma"], g["ln2_beta"] = layer_norm_backward(cache["res2"], p["ln2_gamma"], grad_z)
    g["ffn2_weight"] = cache["hidden"].T @ grad_res2
    g["ffn2_bias"] = grad_res2.sum(axis=0)
    grad_hidden_pre = gelu_backward(cache["hidden_pre"], grad_res2 @ p["ffn2_weight"].T)
    g["ffn1_weight"] = cache["norm1"].T @ grad_hidden_pre
    g["ffn1_bias"] = grad_hidden_pre.sum(axis=0)
    grad_norm1 = grad_res2 + grad_hidden_pre @ p["ffn1_weight"].T

    # attention block
    grad_res1, g["ln1_gamma"], g["ln1_beta"] = layer_norm_backward(cache["res1"], p["ln1_gamma"], grad_norm1)
    grad_cls = grad_res1.sum(axis=0)
    g["out_weight"] = cache["mixed"].T @ grad_res1
    g["out_bias"] = grad_res1.sum(axis=0)
    grad_mixed = (grad_res1 @ p["out_weight"].T).reshape(num_frames, heads, head_dim)

    attn, keys, values, query = cache["attn"], cache["keys"], cache["values"], cache["query"]
    grad_attn = np.einsum("thj,tnhj->thn", grad_mixed, values)
    grad_values = np.einsum("thn,thj->tnhj", attn, grad_mixed)
    grad_scores = softmax_backward(attn, grad_attn) * scale
    grad_query = np.einsum("thn,tnhj->hj", grad_scores, keys).reshape(dim)
    grad_keys = np.einsum("thn,hj->tnhj", grad_scores, query)

    g["q_weight"] = np.outer(p["cls"], grad_query)
    g["q_bias"] = grad_query
    grad_cls = grad_cls + p["q_weight"] @ grad_query

    flat_tokens = tokens.reshape(-1, dim)
    grad_keys = grad_keys.reshape(num_frames, n_tokens, dim)
    grad_values = grad_values.reshape(num_frames, n_tokens, dim)
    g["k_weight"] = flat_tokens.T @ grad_keys.reshape(-1, dim)
    g["k_bias"] = grad_keys.sum(axis=(0, 1))
    g["v_weight"] = flat_tokens.T @ grad_values.reshape(-1, dim)
    g["v_bias"] = grad_values.sum(axis=(0, 1))

    grad_tokens = grad_keys @ p["k_weight"].T + grad_values @ p["v_weight"].T
    g["cls"] = grad_cls + grad_tokens[:, 0, :].sum(axis=0)
    grad_h = np.ascontiguousarray(grad_tokens[:, 1:, :].transpose(1, 0, 2))

    ordered = OrderedDict((name, g[name]) for name in trainable)
    return ordered, grad_h
