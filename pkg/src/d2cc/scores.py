"""Per-sentence score matrices exchanged between scorer and decoder.

``tag_logp`` is N x |C| (token rows over the category inventory) and
``dep_logp`` is N x (N+1) (token rows over head candidates, column 0 = root).
Every row is a log distribution: it must log-sum-exp to 0 within 1e-6.

The JSON file format is a list of objects::

    {"tokens": [...], "categories": [...],
     "tag_logp": [[...]], "dep_logp": [[...]]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .categories import parse_category, print_category
from .errors import DataError


@dataclass
class ScoreMatrices:
    """``categories`` holds canonical category text (column order of
    ``tag_logp``)."""

    tokens: List[str]
    categories: List[str]
    tag_logp: np.ndarray
    dep_logp: np.ndarray

    def __len__(self) -> int:
        return len(self.tokens)


def check_normalized(m: ScoreMatrices, tol: float = 1e-6) -> Optional[str]:
    """None if every row normalizes; else a message naming the first bad row."""
    n = len(m.tokens)
    if m.tag_logp.shape != (n, len(m.categories)):
        return "tag_logp shape %s does not match %d tokens x %d categories" % (
            m.tag_logp.shape, n, len(m.categories))
    if m.dep_logp.shape != (n, n + 1):
        return "dep_logp shape %s does not match %d tokens" % (
            m.dep_logp.shape, n)
    for name, mat in (("tag_logp", m.tag_logp), ("dep_logp", m.dep_logp)):
        for i in range(n):
            lse = _logsumexp(mat[i])
            if not math.isfinite(lse) or abs(lse) > tol:
                return "%s row %d log-sum-exps to %.3g, not 0" % (name, i + 1, lse)
    return None


def _logsumexp(row: np.ndarray) -> float:
    hi = np.max(row)
    if hi == -np.inf:
        return -np.inf
    return float(hi + np.log(np.sum(np.exp(row - hi))))


def matrices_to_dict(m: ScoreMatrices) -> dict:
    return {
        "tokens": list(m.tokens),
        "categories": list(m.categories),
        "tag_logp": [[_num(v) for v in row] for row in m.tag_logp],
        "dep_logp": [[_num(v) for v in row] for row in m.dep_logp],
    }


def _num(v: float):
    v = float(v)
    return v if math.isfinite(v) else "-inf"


def _denum(v) -> float:
    if isinstance(v, str):
        if v in ("-inf", "-Infinity"):
            return -math.inf
        raise DataError("bad score value %r" % v)
    return float(v)


def matrices_from_dict(d: dict) -> ScoreMatrices:
    try:
        tokens = list(d["tokens"])
        # store canonical text so lookups by printed category always match
        categories = [print_category(parse_category(c))
                      for c in d["categories"]]
        tag = np.array([[_denum(v) for v in row] for row in d["tag_logp"]],
                       dtype=np.float64)
        dep = np.array([[_denum(v) for v in row] for row in d["dep_logp"]],
                       dtype=np.float64)
    except KeyError as exc:
        raise DataError("score object missing field %s" % exc)
    except ValueError:
        raise DataError("score matrices must be rectangular")
    if tag.ndim != 2 or dep.ndim != 2:
        raise DataError("score matrices must be rectangular")
    return ScoreMatrices(tokens, categories, tag, dep)


def write_score_file(batch: List[ScoreMatrices]) -> str:
    return json.dumps([matrices_to_dict(m) for m in batch], indent=2) + "\n"


def read_score_file(text: str) -> List[ScoreMatrices]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise DataError("score file must contain a list of score objects")
    return [matrices_from_dict(d) for d in data]
