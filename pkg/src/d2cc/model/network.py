"""Tree-encoder scorer with manually implemented gradients.

A dependency tree is encoded by a stacked sequential BiLSTM over
POS+word embeddings followed by a bidirectional tree LSTM over the
dependency structure (child-sum cell for the bottom-up pass, a
single-parent recurrence for the top-down pass), with the arc-label
embedding joining at the tree input.  Head attachments are scored by a
biaffine layer over MLP-projected states and supertags by per-category
bilinear forms conditioned on each token's most probable head.

Forward passes record every intermediate quantity in a cache dict so
the backward pass can accumulate exact gradients without an autodiff
framework.  All arrays are float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import AlignmentError
from ..scores import ScoreMatrices
from ..trees import DepTree
from .config import ModelConfig
from .vocab import Vocabulary


@dataclass
class Model:
    """Bundles trainable tensors with their vocabulary and dimensions."""

    config: ModelConfig
    vocab: Vocabulary
    params: Dict[str, np.ndarray]
    ext: Optional[Dict[str, np.ndarray]] = None
    ext_dim: int = 0


def param_shapes(config: ModelConfig, vocab: Vocabulary,
                 ext_dim: int = 0) -> Dict[str, Tuple[int, ...]]:
    """Shape of every trainable tensor, keyed by name."""
    cfg = config
    h = cfg.seq_dim // 2
    t = cfg.tree_dim
    m = cfg.mlp_dim
    d0 = cfg.pos_dim + cfg.word_dim + ext_dim
    dt = cfg.seq_dim + cfg.label_dim
    ncat = len(vocab.categories)
    shapes = {
        "emb_word": (vocab.word_rows, cfg.word_dim),
        "emb_pos": (len(vocab.pos), cfg.pos_dim),
        "emb_label": (len(vocab.labels), cfg.label_dim),
        "up_W": (4 * t, dt),
        "up_U": (3 * t, t),
        "up_Uf": (t, t),
        "up_b": (4 * t,),
        "down_W": (4 * t, dt),
        "down_U": (4 * t, t),
        "down_b": (4 * t,),
        "root_h": (2 * t,),
        "biaff_W": (m, m),
        "biaff_w": (m,),
        "bil_W": (ncat, m, m),
        "bil_v": (ncat, m),
        "bil_u": (ncat, m),
        "bil_b": (ncat,),
    }
    for name in ("dep_child", "dep_head", "tag_child", "tag_head"):
        shapes["mlp_%s_W" % name] = (m, 2 * t)
        shapes["mlp_%s_b" % name] = (m,)
    for layer in range(cfg.seq_layers):
        din = d0 if layer == 0 else cfg.seq_dim
        for direction in ("f", "b"):
            shapes["seq%d_%s_W" % (layer, direction)] = (4 * h, din + h)
            shapes["seq%d_%s_b" % (layer, direction)] = (4 * h,)
    return shapes


def init_model(vocab: Vocabulary, config: ModelConfig,
               seed: int = 0, ext: Optional[Dict[str, np.ndarray]] = None,
               ext_dim: int = 0) -> Model:
    """Random parameters; draws happen in sorted tensor-name order."""
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    for name, shape in sorted(param_shapes(config, vocab, ext_dim).items()):
        if name.endswith("_b"):
            params[name] = np.zeros(shape, dtype=np.float64)
        elif name.startswith("emb_") or name == "root_h":
            params[name] = rng.normal(0.0, 0.1, size=shape)
        else:
            scale = 1.0 / np.sqrt(shape[-1])
            params[name] = rng.normal(0.0, scale, size=shape)
    return Model(config=config, vocab=vocab, params=params,
                 ext=ext, ext_dim=ext_dim)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


def _elu(a: np.ndarray) -> np.ndarray:
    return np.where(a > 0.0, a, np.expm1(a))


def _elu_grad(a: np.ndarray) -> np.ndarray:
    return np.where(a > 0.0, 1.0, np.exp(a))


def _log_softmax_rows(s: np.ndarray) -> np.ndarray:
    m = np.max(s, axis=1, keepdims=True)
    z = np.log(np.sum(np.exp(s - m), axis=1, keepdims=True))
    return s - m - z


# ---------------------------------------------------------------------------
# Forward passes.  Every stage fills the shared cache dict.


def _embed(model: Model, z: DepTree, cache: dict) -> np.ndarray:
    vocab, p = model.vocab, model.params
    n = len(z.tokens)
    wi = np.array([vocab.word_id(w) for w in z.tokens], dtype=np.int64)
    pi = np.array([vocab.pos_id(t) for t in z.pos], dtype=np.int64)
    li = np.array([vocab.label_id(l) for l in z.labels], dtype=np.int64)
    parts = [p["emb_pos"][pi], p["emb_word"][wi]]
    if model.ext_dim:
        ext = np.zeros((n, model.ext_dim))
        for k, word in enumerate(z.tokens):
            vec = model.ext.get(word) if model.ext else None
            if vec is not None:
                ext[k] = vec
        parts.append(ext)
    x0 = np.concatenate(parts, axis=1)
    cache.update(n=n, wi=wi, pi=pi, li=li, x0=x0)
    return x0


def _lstm_run(w: np.ndarray, b: np.ndarray, xs: np.ndarray,
              order: List[int], h: int) -> dict:
    """One LSTM direction over ``xs`` rows in the given position order."""
    steps = []
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    out = np.zeros((xs.shape[0], h))
    for pos in order:
        x = xs[pos]
        zv = w @ np.concatenate([x, h_prev]) + b
        gi = _sigmoid(zv[:h])
        gf = _sigmoid(zv[h:2 * h])
        go = _sigmoid(zv[2 * h:3 * h])
        gg = np.tanh(zv[3 * h:])
        c = gf * c_prev + gi * gg
        tc = np.tanh(c)
        hv = go * tc
        steps.append(dict(pos=pos, x=x, h_prev=h_prev, c_prev=c_prev,
                          i=gi, f=gf, o=go, g=gg, c=c, tanh_c=tc))
        out[pos] = hv
        h_prev, c_prev = hv, c
    return dict(order=order, steps=steps, out=out)


def _seq_forward(model: Model, x0: np.ndarray, cache: dict) -> np.ndarray:
    cfg, p = model.config, model.params
    h = cfg.seq_dim // 2
    n = x0.shape[0]
    layers = []
    xs = x0
    inputs = [x0]
    for layer in range(cfg.seq_layers):
        fwd = _lstm_run(p["seq%d_f_W" % layer], p["seq%d_f_b" % layer],
                        xs, list(range(n)), h)
        bwd = _lstm_run(p["seq%d_b_W" % layer], p["seq%d_b_b" % layer],
                        xs, list(range(n - 1, -1, -1)), h)
        xs = np.concatenate([fwd["out"], bwd["out"]], axis=1)
        layers.append(dict(f=fwd, b=bwd))
        inputs.append(xs)
    cache.update(seq_layers=layers, seq_inputs=inputs, s=xs)
    return xs


def _tree_orders(z: DepTree) -> Tuple[List[int], Dict[int, List[int]]]:
    """DFS preorder over 0-based nodes (parents first) and child lists."""
    n = len(z.tokens)
    children: Dict[int, List[int]] = {k: [] for k in range(n)}
    roots = []
    for k in range(n):
        parent = z.heads[k] - 1
        if parent < 0:
            roots.append(k)
        else:
            children[parent].append(k)
    order = []
    stack = list(reversed(roots))
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(reversed(children[node]))
    if len(order) != n:
        raise AlignmentError("dependency structure is not a forest")
    return order, children


def _tree_forward(model: Model, z: DepTree, s: np.ndarray,
                  cache: dict) -> np.ndarray:
    cfg, p = model.config, model.params
    t = cfg.tree_dim
    n = s.shape[0]
    li = cache["li"]
    xt = np.concatenate([s, p["emb_label"][li]], axis=1)
    order, children = _tree_orders(z)

    up_w, up_u, up_uf, up_b = p["up_W"], p["up_U"], p["up_Uf"], p["up_b"]
    up = [None] * n
    up_h = np.zeros((n, t))
    up_c = np.zeros((n, t))
    for node in reversed(order):
        x = xt[node]
        a = up_w @ x + up_b
        hsum = np.zeros(t)
        for child in children[node]:
            hsum = hsum + up_h[child]
        gi = _sigmoid(a[:t] + up_u[:t] @ hsum)
        go = _sigmoid(a[t:2 * t] + up_u[t:2 * t] @ hsum)
        gu = np.tanh(a[2 * t:3 * t] + up_u[2 * t:] @ hsum)
        c = gi * gu
        fs = []
        for child in children[node]:
            fc = _sigmoid(a[3 * t:] + up_uf @ up_h[child])
            fs.append(fc)
            c = c + fc * up_c[child]
        tc = np.tanh(c)
        up_h[node] = go * tc
        up_c[node] = c
        up[node] = dict(x=x, hsum=hsum, i=gi, o=go, u=gu, f=fs,
                        c=c, tanh_c=tc)

    dn_w, dn_u, dn_b = p["down_W"], p["down_U"], p["down_b"]
    down = [None] * n
    down_h = np.zeros((n, t))
    down_c = np.zeros((n, t))
    for node in order:
        parent = z.heads[node] - 1
        h_par = down_h[parent] if parent >= 0 else np.zeros(t)
        c_par = down_c[parent] if parent >= 0 else np.zeros(t)
        x = xt[node]
        zv = dn_w @ x + dn_u @ h_par + dn_b
        gi = _sigmoid(zv[:t])
        gf = _sigmoid(zv[t:2 * t])
        go = _sigmoid(zv[2 * t:3 * t])
        gg = np.tanh(zv[3 * t:])
        c = gf * c_par + gi * gg
        tc = np.tanh(c)
        down_h[node] = go * tc
        down_c[node] = c
        down[node] = dict(x=x, h_par=h_par, c_par=c_par, i=gi, f=gf,
                          o=go, g=gg, c=c, tanh_c=tc)

    hmat = np.concatenate([up_h, down_h], axis=1)
    cache.update(xt=xt, order=order, children=children, up=up,
                 up_h=up_h, up_c=up_c, down=down, down_h=down_h,
                 down_c=down_c, h=hmat)
    return hmat


def _dep_forward(model: Model, hmat: np.ndarray, cache: dict) -> np.ndarray:
    p = model.params
    n = hmat.shape[0]
    hall = np.vstack([p["root_h"][None, :], hmat])
    ac = hmat @ p["mlp_dep_child_W"].T + p["mlp_dep_child_b"]
    rc = _elu(ac)
    ah = hall @ p["mlp_dep_head_W"].T + p["mlp_dep_head_b"]
    rh = _elu(ah)
    sdep = rc @ p["biaff_W"] @ rh.T + rh @ p["biaff_w"]
    for k in range(n):
        sdep[k, k + 1] = -np.inf
    dep_logp = _log_softmax_rows(sdep)
    cache.update(hall=hall, dep_ac=ac, dep_rc=rc, dep_ah=ah, dep_rh=rh,
                 sdep=sdep, dep_logp=dep_logp)
    return dep_logp


def _tag_forward(model: Model, hmat: np.ndarray, dep_logp: np.ndarray,
                 cache: dict,
                 dhat_override: Optional[Sequence[int]] = None) -> np.ndarray:
    p = model.params
    hall = cache.get("hall")
    if hall is None:
        hall = np.vstack([p["root_h"][None, :], hmat])
        cache["hall"] = hall
    if dhat_override is None:
        dhat = np.argmax(dep_logp, axis=1)
    else:
        dhat = np.asarray(dhat_override, dtype=np.int64)
    aqc = hmat @ p["mlp_tag_child_W"].T + p["mlp_tag_child_b"]
    qc = _elu(aqc)
    aqh = hall @ p["mlp_tag_head_W"].T + p["mlp_tag_head_b"]
    qh = _elu(aqh)
    qd = qh[dhat]
    stag = (np.einsum("ti,cij,tj->tc", qc, p["bil_W"], qd)
            + qc @ p["bil_v"].T + qd @ p["bil_u"].T + p["bil_b"])
    tag_logp = _log_softmax_rows(stag)
    cache.update(dhat=dhat, tag_aqc=aqc, tag_qc=qc, tag_aqh=aqh,
                 tag_qh=qh, tag_qd=qd, stag=stag, tag_logp=tag_logp)
    return tag_logp


def _forward(model: Model, z: DepTree,
             dhat_override: Optional[Sequence[int]] = None) -> dict:
    cache: dict = {}
    x0 = _embed(model, z, cache)
    s = _seq_forward(model, x0, cache)
    hmat = _tree_forward(model, z, s, cache)
    dep_logp = _dep_forward(model, hmat, cache)
    _tag_forward(model, hmat, dep_logp, cache, dhat_override)
    return cache


# ---------------------------------------------------------------------------
# Public scoring API.


def encode(model: Model, z: DepTree) -> np.ndarray:
    """Hidden state per token: bottom-up half then top-down half."""
    cache: dict = {}
    x0 = _embed(model, z, cache)
    s = _seq_forward(model, x0, cache)
    return _tree_forward(model, z, s, cache)


def score_dep(model: Model, hmat: np.ndarray) -> np.ndarray:
    """Log probability of each head (column 0 = root), self-arc masked."""
    return _dep_forward(model, hmat, {})


def score_tag(model: Model, hmat: np.ndarray, dep_logp: np.ndarray,
              dhat_override: Optional[Sequence[int]] = None) -> np.ndarray:
    """Log probability of each category given the most probable head."""
    return _tag_forward(model, hmat, dep_logp, {}, dhat_override)


def score_sentence(model: Model, z: DepTree) -> ScoreMatrices:
    cache = _forward(model, z)
    return ScoreMatrices(tokens=list(z.tokens),
                         categories=list(model.vocab.categories),
                         tag_logp=cache["tag_logp"],
                         dep_logp=cache["dep_logp"])


def _gold_ids(model: Model, z: DepTree, tags: Sequence[str],
              heads: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    n = len(z.tokens)
    if len(tags) != n or len(heads) != n:
        raise AlignmentError(
            "expected %d tags and heads, got %d and %d"
            % (n, len(tags), len(heads)))
    tag_ids = np.array([model.vocab.category_id(c) for c in tags],
                       dtype=np.int64)
    return tag_ids, np.asarray(heads, dtype=np.int64)


def loss_value(model: Model, z: DepTree, tags: Sequence[str],
               heads: Sequence[int],
               dhat_override: Optional[Sequence[int]] = None) -> float:
    """Negative log likelihood without gradient bookkeeping."""
    tag_ids, head_ids = _gold_ids(model, z, tags, heads)
    cache = _forward(model, z, dhat_override)
    rows = np.arange(cache["n"])
    return float(-(cache["tag_logp"][rows, tag_ids].sum()
                   + cache["dep_logp"][rows, head_ids].sum()))


def nll_loss(model: Model, z: DepTree, tags: Sequence[str],
             heads: Sequence[int],
             dhat_override: Optional[Sequence[int]] = None):
    """Loss, gradient dict and an aux dict with the score matrices.

    The head used by the tag scorer is the argmax of the head
    distribution (frozen when ``dhat_override`` is given); it is treated
    as a constant in the backward pass.
    """
    cfg, p = model.config, model.params
    tag_ids, head_ids = _gold_ids(model, z, tags, heads)
    cache = _forward(model, z, dhat_override)
    n = cache["n"]
    rows = np.arange(n)
    loss = float(-(cache["tag_logp"][rows, tag_ids].sum()
                   + cache["dep_logp"][rows, head_ids].sum()))

    grads = {name: np.zeros_like(arr) for name, arr in p.items()}
    t = cfg.tree_dim
    h = cfg.seq_dim // 2

    # tag bilinear
    dstag = np.exp(cache["tag_logp"])
    dstag[rows, tag_ids] -= 1.0
    qc, qd, qh = cache["tag_qc"], cache["tag_qd"], cache["tag_qh"]
    grads["bil_b"] += dstag.sum(axis=0)
    grads["bil_v"] += dstag.T @ qc
    grads["bil_u"] += dstag.T @ qd
    grads["bil_W"] += np.einsum("tc,ti,tj->cij", dstag, qc, qd)
    dqc = np.einsum("tc,cij,tj->ti", dstag, p["bil_W"], qd) + dstag @ p["bil_v"]
    dqd = np.einsum("tc,cij,ti->tj", dstag, p["bil_W"], qc) + dstag @ p["bil_u"]
    dqh = np.zeros_like(qh)
    np.add.at(dqh, cache["dhat"], dqd)

    dhall = np.zeros_like(cache["hall"])
    dhmat = np.zeros_like(cache["h"])

    daqh = dqh * _elu_grad(cache["tag_aqh"])
    grads["mlp_tag_head_W"] += daqh.T @ cache["hall"]
    grads["mlp_tag_head_b"] += daqh.sum(axis=0)
    dhall += daqh @ p["mlp_tag_head_W"]
    daqc = dqc * _elu_grad(cache["tag_aqc"])
    grads["mlp_tag_child_W"] += daqc.T @ cache["h"]
    grads["mlp_tag_child_b"] += daqc.sum(axis=0)
    dhmat += daqc @ p["mlp_tag_child_W"]

    # dep biaffine
    dsdep = np.exp(cache["dep_logp"])
    dsdep[rows, head_ids] -= 1.0
    rc, rh = cache["dep_rc"], cache["dep_rh"]
    grads["biaff_W"] += rc.T @ dsdep @ rh
    grads["biaff_w"] += dsdep.sum(axis=0) @ rh
    drc = (dsdep @ rh) @ p["biaff_W"].T
    drh = (dsdep.T @ rc) @ p["biaff_W"] + np.outer(dsdep.sum(axis=0),
                                                   p["biaff_w"])
    dah = drh * _elu_grad(cache["dep_ah"])
    grads["mlp_dep_head_W"] += dah.T @ cache["hall"]
    grads["mlp_dep_head_b"] += dah.sum(axis=0)
    dhall += dah @ p["mlp_dep_head_W"]
    dac = drc * _elu_grad(cache["dep_ac"])
    grads["mlp_dep_child_W"] += dac.T @ cache["h"]
    grads["mlp_dep_child_b"] += dac.sum(axis=0)
    dhmat += dac @ p["mlp_dep_child_W"]

    grads["root_h"] += dhall[0]
    dhmat += dhall[1:]

    # top-down tree pass
    dxt = np.zeros_like(cache["xt"])
    d_down_h = dhmat[:, t:].copy()
    d_down_c = np.zeros((n, t))
    for node in reversed(cache["order"]):
        st = cache["down"][node]
        dh = d_down_h[node]
        dc = d_down_c[node] + dh * st["o"] * (1.0 - st["tanh_c"] ** 2)
        do = dh * st["tanh_c"]
        di = dc * st["g"]
        dg = dc * st["i"]
        df = dc * st["c_par"]
        dzv = np.concatenate([di * st["i"] * (1.0 - st["i"]),
                              df * st["f"] * (1.0 - st["f"]),
                              do * st["o"] * (1.0 - st["o"]),
                              dg * (1.0 - st["g"] ** 2)])
        grads["down_W"] += np.outer(dzv, st["x"])
        grads["down_U"] += np.outer(dzv, st["h_par"])
        grads["down_b"] += dzv
        dxt[node] += p["down_W"].T @ dzv
        parent = z.heads[node] - 1
        if parent >= 0:
            d_down_h[parent] += p["down_U"].T @ dzv
            d_down_c[parent] += dc * st["f"]

    # bottom-up tree pass (parents before children)
    d_up_h = dhmat[:, :t].copy()
    d_up_c = np.zeros((n, t))
    up_u, up_uf = p["up_U"], p["up_Uf"]
    for node in cache["order"]:
        st = cache["up"][node]
        dh = d_up_h[node]
        dc = d_up_c[node] + dh * st["o"] * (1.0 - st["tanh_c"] ** 2)
        do = dh * st["tanh_c"]
        di = dc * st["u"]
        du = dc * st["i"]
        dai = di * st["i"] * (1.0 - st["i"])
        dao = do * st["o"] * (1.0 - st["o"])
        dau = du * (1.0 - st["u"] ** 2)
        dhsum = up_u[:t].T @ dai + up_u[t:2 * t].T @ dao + up_u[2 * t:].T @ dau
        daf = np.zeros(t)
        for fc, child in zip(st["f"], cache["children"][node]):
            dfc = dc * cache["up_c"][child]
            dzf = dfc * fc * (1.0 - fc)
            daf += dzf
            grads["up_Uf"] += np.outer(dzf, cache["up_h"][child])
            d_up_h[child] += up_uf.T @ dzf + dhsum
            d_up_c[child] += dc * fc
        grads["up_U"][:t] += np.outer(dai, st["hsum"])
        grads["up_U"][t:2 * t] += np.outer(dao, st["hsum"])
        grads["up_U"][2 * t:] += np.outer(dau, st["hsum"])
        dz_all = np.concatenate([dai, dao, dau, daf])
        grads["up_W"] += np.outer(dz_all, st["x"])
        grads["up_b"] += dz_all
        dxt[node] += p["up_W"].T @ dz_all

    ds = dxt[:, :cfg.seq_dim]
    np.add.at(grads["emb_label"], cache["li"], dxt[:, cfg.seq_dim:])

    # sequence layers, top to bottom
    dout = ds
    for layer in range(cfg.seq_layers - 1, -1, -1):
        lay = cache["seq_layers"][layer]
        din = cache["seq_inputs"][layer].shape[1]
        dx_in = np.zeros_like(cache["seq_inputs"][layer])
        for direction, sl in (("f", slice(0, h)), ("b", slice(h, 2 * h))):
            run = lay[direction]
            wname = "seq%d_%s_W" % (layer, direction)
            bname = "seq%d_%s_b" % (layer, direction)
            w = p[wname]
            dh_rec = np.zeros(h)
            dc_rec = np.zeros(h)
            for st in reversed(run["steps"]):
                dh = dout[st["pos"], sl] + dh_rec
                dc = dc_rec + dh * st["o"] * (1.0 - st["tanh_c"] ** 2)
                do = dh * st["tanh_c"]
                di = dc * st["g"]
                dg = dc * st["i"]
                df = dc * st["c_prev"]
                dc_rec = dc * st["f"]
                dzv = np.concatenate([di * st["i"] * (1.0 - st["i"]),
                                      df * st["f"] * (1.0 - st["f"]),
                                      do * st["o"] * (1.0 - st["o"]),
                                      dg * (1.0 - st["g"] ** 2)])
                grads[wname] += np.outer(dzv,
                                         np.concatenate([st["x"],
                                                         st["h_prev"]]))
                grads[bname] += dzv
                dxh = w.T @ dzv
                dx_in[st["pos"]] += dxh[:din]
                dh_rec = dxh[din:]
        dout = dx_in

    np.add.at(grads["emb_pos"], cache["pi"], dout[:, :cfg.pos_dim])
    np.add.at(grads["emb_word"], cache["wi"],
              dout[:, cfg.pos_dim:cfg.pos_dim + cfg.word_dim])

    aux = dict(tag_logp=cache["tag_logp"], dep_logp=cache["dep_logp"],
               dhat=cache["dhat"], gold_tag_ids=tag_ids,
               gold_head_ids=head_ids,
               pred_tags=np.argmax(cache["tag_logp"], axis=1))
    return loss, grads, aux
