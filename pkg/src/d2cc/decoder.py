"""A* decoding of score matrices into grammar-licensed derivations.

Chart items cover a span with a category; under Head First the span head is
always the leftmost token, so an item's inside score is the sum of its
supertag log-probs plus the head-arc log-prob of every covered token except
the first.  The agenda is ordered by inside + heuristic where the heuristic
grants every outside token its best supertag and best head arc, and the span
head its best head arc; that never underestimates any completion, so the
first goal item popped is optimal.  Ties break by span width, start index,
then category text, which makes the search deterministic.

Span constraints follow the two rejection conditions: a proposal is refused
if its span properly overlaps a constrained span, or if it sits exactly on a
constrained span with an incompatible category that no unary rule can turn
into a compatible one (so an N proposal survives an NP constraint when the
grammar has N => NP).  Terminal category constraints are additionally
enforced by rewriting the token's tag row to a one-hot log distribution.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .categories import (
    Category,
    is_dummy,
    parse_category,
    print_category,
    unify_features,
)
from .errors import BudgetError, ConstraintError, DataError, NoParseError, VocabularyError
from .grammar import Grammar, apply_binary, apply_unary
from .scores import ScoreMatrices
from .trees import Binary, CCGTree, Terminal, Unary, head_index

DEFAULT_BEAM = -math.log(1e-4)
DEFAULT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class Constraint:
    """A span constraint; ``category`` None means span-only.  1-based,
    inclusive on both ends; ``start == end`` with a category constrains a
    terminal."""

    category: Optional[Category]
    start: int
    end: int


@dataclass(frozen=True)
class ParseResult:
    tree: CCGTree
    score: float


def load_constraint_file(text: str) -> Dict[int, List[Constraint]]:
    """Constraint JSON: object mapping sentence ordinal (1-based, as a
    string) to a list of {"category": str|null, "start": int, "end": int}."""
    data = json.loads(text)
    if not isinstance(data, dict):
        raise DataError("constraint file must be a JSON object keyed by ordinal")
    out: Dict[int, List[Constraint]] = {}
    for key, entries in data.items():
        try:
            ordinal = int(key)
        except ValueError:
            raise DataError("bad sentence ordinal %r in constraint file" % key)
        if not isinstance(entries, list):
            raise DataError("constraints for sentence %s must be a list" % key)
        parsed = []
        for e in entries:
            cat = e.get("category")
            parsed.append(Constraint(
                parse_category(cat) if cat is not None else None,
                int(e["start"]), int(e["end"])))
        out[ordinal] = parsed
    return out


def _consistent(a: Category, b: Category) -> bool:
    return unify_features(a, b) is not None


def check_constraint(category: Category, start: int, end: int,
                     constraints: Sequence[Constraint],
                     grammar: Grammar) -> bool:
    """True iff an item (category, start, end) survives every constraint."""
    for con in constraints:
        i, j = con.start, con.end
        if (i < start <= j < end) or (start < i <= end < j):
            return False
        if con.category is not None and i == start and j == end:
            if _consistent(category, con.category):
                continue
            if not any(_consistent(target, con.category)
                       for target, _ in apply_unary(grammar, category)):
                return False
    return True


def validate_constraints(constraints: Sequence[Constraint], n: int) -> None:
    for con in constraints:
        if not (1 <= con.start <= con.end <= n):
            raise ConstraintError(
                "constraint span (%d, %d) out of range for %d tokens"
                % (con.start, con.end, n))


def apply_terminal_constraints(m: ScoreMatrices,
                               constraints: Sequence[Constraint]) -> ScoreMatrices:
    """Rewrite constrained tokens' tag rows to one-hot log distributions."""
    validate_constraints(constraints, len(m))
    forced: Dict[int, Category] = {}
    for con in constraints:
        if con.category is None or con.start != con.end:
            continue
        prev = forced.get(con.start)
        if prev is not None and prev != con.category:
            raise ConstraintError(
                "token %d constrained to both %s and %s"
                % (con.start, print_category(prev), print_category(con.category)))
        forced[con.start] = con.category
    if not forced:
        return m
    tag = m.tag_logp.copy()
    for token, category in forced.items():
        try:
            col = m.categories.index(print_category(category))
        except ValueError:
            raise VocabularyError(
                "constraint category %s not in the model inventory"
                % print_category(category))
        tag[token - 1, :] = -np.inf
        tag[token - 1, col] = 0.0
    return ScoreMatrices(m.tokens, m.categories, tag, m.dep_logp)


def heuristic(m: ScoreMatrices, start: int, end: int, head: int) -> float:
    """Admissible completion estimate for an item over [start, end]."""
    tmax = np.max(m.tag_logp, axis=1)
    dmax = np.max(m.dep_logp, axis=1)
    per_token = tmax + dmax
    outside = float(np.sum(per_token[:start - 1]) + np.sum(per_token[end:]))
    return outside + float(dmax[head - 1])


class _Item:
    __slots__ = ("start", "end", "category", "depth", "inside", "rule",
                 "left", "right")

    def __init__(self, start, end, category, depth, inside, rule, left, right):
        self.start = start
        self.end = end
        self.category = category
        self.depth = depth
        self.inside = inside
        self.rule = rule
        self.left = left
        self.right = right


def astar_parse(m: ScoreMatrices, grammar: Grammar,
                constraints: Sequence[Constraint] = (), *,
                beam: Optional[float] = DEFAULT_BEAM,
                budget: int = DEFAULT_BUDGET,
                pos: Optional[Sequence[str]] = None,
                _classify: bool = True) -> ParseResult:
    """Best grammar-licensed tree under the score matrices.

    ``beam`` keeps only supertags within that log margin of each token's
    best (None disables pruning); ``budget`` bounds agenda pops.  Raises
    NoParseError when no goal is reachable and BudgetError past the budget.
    """
    n = len(m)
    if n == 0:
        raise DataError("cannot parse an empty sentence")
    validate_constraints(constraints, n)

    tmax = np.max(m.tag_logp, axis=1)
    dmax = np.max(m.dep_logp, axis=1)
    per_token = tmax + dmax
    suffix = np.concatenate([np.cumsum(per_token[::-1])[::-1], [0.0]])
    prefix = np.concatenate([[0.0], np.cumsum(per_token)])

    def outside_bound(start: int, end: int) -> float:
        return float(prefix[start - 1] + suffix[end])

    counter = itertools.count()
    agenda: List[tuple] = []

    def push(item: _Item, goal: bool = False) -> None:
        if goal:
            priority = item.inside + float(m.dep_logp[0, 0])
        else:
            priority = (item.inside + outside_bound(item.start, item.end)
                        + float(dmax[item.start - 1]))
        if priority == -np.inf:
            return
        heapq.heappush(agenda, (
            -priority, item.end - item.start, item.start,
            print_category(item.category), item.depth, goal,
            next(counter), item))

    inventory = [parse_category(c) for c in m.categories]
    for i in range(1, n + 1):
        row = m.tag_logp[i - 1]
        cutoff = -np.inf if beam is None else float(np.max(row)) - beam
        for c_idx, category in enumerate(inventory):
            logp = float(row[c_idx])
            if logp == -np.inf or logp < cutoff:
                continue
            if not check_constraint(category, i, i, constraints, grammar):
                continue
            push(_Item(i, i, category, 0, logp, None, None, None))

    chart: Dict[tuple, _Item] = {}
    by_start: Dict[int, List[_Item]] = {}
    by_end: Dict[int, List[_Item]] = {}
    pops = 0

    def combine(left: _Item, right: _Item) -> None:
        arc = float(m.dep_logp[right.start - 1, left.start])
        if arc == -np.inf:
            return
        inside = left.inside + right.inside + arc
        for category, rule in apply_binary(grammar, left.category, right.category):
            if not check_constraint(category, left.start, right.end,
                                    constraints, grammar):
                continue
            push(_Item(left.start, right.end, category, 0, inside, rule,
                       left, right))

    while agenda:
        pops += 1
        if pops > budget:
            raise BudgetError("item budget of %d pops exceeded" % budget)
        _, _, _, _, _, goal, _, item = heapq.heappop(agenda)
        if goal:
            score = item.inside + float(m.dep_logp[0, 0])
            return ParseResult(_build_tree(item, m, pos), score)
        key = (item.start, item.end, print_category(item.category), item.depth)
        if key in chart:
            continue
        chart[key] = item
        by_start.setdefault(item.start, []).append(item)
        by_end.setdefault(item.end, []).append(item)

        if item.start == 1 and item.end == n and item.category in grammar.roots:
            push(item, goal=True)

        if item.depth == 0:
            for category, rule in apply_unary(grammar, item.category):
                if not check_constraint(category, item.start, item.end,
                                        constraints, grammar):
                    continue
                push(_Item(item.start, item.end, category, 1, item.inside,
                           rule, item, None))

        for left in by_end.get(item.start - 1, ()):
            combine(left, item)
        for right in by_start.get(item.end + 1, ()):
            combine(item, right)

    if constraints and _classify:
        try:
            astar_parse(m, grammar, (), beam=beam, budget=budget, pos=pos,
                        _classify=False)
        except NoParseError:
            raise NoParseError("no valid parse (grammar failure)",
                               reason="grammar")
        except BudgetError:
            raise NoParseError("no valid parse (cause undetermined)",
                               reason="unknown")
        raise NoParseError("no valid parse satisfies the constraints",
                           reason="constraint")
    raise NoParseError("no valid parse (grammar failure)", reason="grammar")


def _build_tree(item: _Item, m: ScoreMatrices,
                pos: Optional[Sequence[str]]) -> CCGTree:
    if item.left is None:
        word = m.tokens[item.start - 1]
        tag = pos[item.start - 1] if pos else "XX"
        return Terminal(item.start, word, item.category, tag)
    if item.right is None:
        return Unary(_build_tree(item.left, m, pos), item.category, item.rule)
    return Binary(_build_tree(item.left, m, pos),
                  _build_tree(item.right, m, pos), item.category, item.rule)


def convert(params, grammar: Grammar, z, constraints: Sequence[Constraint] = (),
            *, beam: Optional[float] = DEFAULT_BEAM,
            budget: int = DEFAULT_BUDGET) -> CCGTree:
    """Score a dependency tree and decode it into a CCG derivation."""
    from .model import score_sentence

    m = score_sentence(params, z)
    m = apply_terminal_constraints(m, constraints)
    result = astar_parse(m, grammar, constraints, beam=beam, budget=budget,
                         pos=z.pos)
    return result.tree


def strip_dummies(t: CCGTree) -> Optional[CCGTree]:
    """Remove X-category terminals and their absorption nodes, reindexing
    the remaining terminals from the original leftmost position.  Returns
    None if every terminal was a dummy."""

    def prune(node: CCGTree) -> Optional[CCGTree]:
        if isinstance(node, Terminal):
            return None if is_dummy(node.category) else node
        if isinstance(node, Unary):
            child = prune(node.child)
            return None if child is None else Unary(child, node.category,
                                                    node.rule)
        left = prune(node.left)
        right = prune(node.right)
        if left is None:
            return right
        if right is None:
            return left
        return Binary(left, right, node.category, node.rule)

    pruned = prune(t)
    if pruned is None:
        return None

    order: List[Terminal] = []

    def collect(node: CCGTree) -> None:
        if isinstance(node, Terminal):
            order.append(node)
        elif isinstance(node, Unary):
            collect(node.child)
        else:
            collect(node.left)
            collect(node.right)

    collect(pruned)
    first = head_index(t)  # original leftmost, even if it was a dummy
    renumber = {term.index: first + k for k, term in enumerate(order)}

    def rebuild(node: CCGTree) -> CCGTree:
        if isinstance(node, Terminal):
            return Terminal(renumber[node.index], node.word, node.category,
                            node.pos)
        if isinstance(node, Unary):
            return Unary(rebuild(node.child), node.category, node.rule)
        return Binary(rebuild(node.left), rebuild(node.right), node.category,
                      node.rule)

    return rebuild(pruned)
