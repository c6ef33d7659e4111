"""Model-theoretic recall/precision over aligned chain partitions.

Identity coreference is symmetric and transitive, so an annotation is a
partition of the mention space.  Recall charges each key chain S for the
number of blocks p(S) the response cuts it into: the chain contributes
|S| - p(S) correctly recovered links out of |S| - 1.  Key mentions with no
aligned response mention count as singleton blocks.  Precision is the same
computation with the roles swapped; unmatched response mentions act as
fresh entities there.  F is the balanced harmonic mean 2PR/(P+R).

All arithmetic is exact (integers and fractions); floats appear only when
rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .align import MentionAlignment
from .chains import ChainSet
from .errors import AlignmentMismatch, TooLarge, UndefinedResult

ORACLE_MAX_MENTIONS = 20


@dataclass(frozen=True)
class ScoreReport:
    recall_num: int
    recall_den: int
    precision_num: int
    precision_den: int
    # blocks each key chain was cut into, for diff diagnostics
    per_chain: tuple[tuple[str, int], ...] = ()

    @property
    def recall(self) -> Fraction | None:
        if self.recall_den == 0:
            return None
        return Fraction(self.recall_num, self.recall_den)

    @property
    def precision(self) -> Fraction | None:
        if self.precision_den == 0:
            return None
        return Fraction(self.precision_num, self.precision_den)

    @property
    def f_measure(self) -> Fraction | None:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return f_measure(p, r)

    def to_dict(self) -> dict:
        return {
            "recall_num": self.recall_num,
            "recall_den": self.recall_den,
            "precision_num": self.precision_num,
            "precision_den": self.precision_den,
            "recall": None if self.recall is None else float(self.recall),
            "precision": None if self.precision is None else float(self.precision),
            "f_measure": None if self.f_measure is None else float(self.f_measure),
            "per_chain": [[cid, n] for cid, n in self.per_chain],
        }


def f_measure(p, r) -> Fraction:
    """Balanced F: 2*P*R/(P+R).  Undefined when P+R is zero."""
    p, r = Fraction(p), Fraction(r)
    if p + r == 0:
        raise UndefinedResult("F undefined: P + R = 0")
    return 2 * p * r / (p + r)


def _entity_map(chain_set: ChainSet) -> dict[str, object]:
    ent: dict[str, object] = {}
    for c in chain_set.chains:
        for m in c.member_ids:
            ent[m] = c.chain_id
    for s in chain_set.singletons:
        ent[s] = ("singleton", s)
    return ent


def _check_alignment(key_chains: ChainSet, response_chains: ChainSet,
                     alignment: MentionAlignment) -> None:
    key_ids = key_chains.all_mention_ids()
    resp_ids = response_chains.all_mention_ids()
    for k, r in alignment.pairs:
        if k not in key_ids:
            raise AlignmentMismatch(f"alignment key id {k!r} unknown to key chains")
        if r not in resp_ids:
            raise AlignmentMismatch(f"alignment response id {r!r} unknown to response chains")


def _partition_side(a_chains: ChainSet, b_entity: dict[str, object],
                    a_to_b: dict[str, str]) -> tuple[int, int, list[tuple[str, int]]]:
    num = den = 0
    per = []
    for chain in a_chains.chains:
        blocks: set = set()
        fresh = 0
        for m in sorted(chain.member_ids):
            b = a_to_b.get(m)
            if b is None:
                fresh += 1
            else:
                blocks.add(b_entity[b])
        p = len(blocks) + fresh
        num += len(chain.member_ids) - p
        den += len(chain.member_ids) - 1
        per.append((chain.chain_id, p))
    return num, den, per


def score(key_chains: ChainSet, response_chains: ChainSet,
          alignment: MentionAlignment) -> ScoreReport:
    """Recall, precision and F between two chain partitions."""
    _check_alignment(key_chains, response_chains, alignment)
    key_to_resp = {k: r for k, r in alignment.pairs}
    resp_to_key = {r: k for k, r in alignment.pairs}
    r_num, r_den, per = _partition_side(key_chains, _entity_map(response_chains), key_to_resp)
    p_num, p_den, _ = _partition_side(response_chains, _entity_map(key_chains), resp_to_key)
    return ScoreReport(recall_num=r_num, recall_den=r_den,
                       precision_num=p_num, precision_den=p_den,
                       per_chain=tuple(per))


def combine_reports(reports) -> ScoreReport:
    """Micro-average: sum numerators and denominators across documents."""
    return ScoreReport(
        recall_num=sum(r.recall_num for r in reports),
        recall_den=sum(r.recall_den for r in reports),
        precision_num=sum(r.precision_num for r in reports),
        precision_den=sum(r.precision_den for r in reports),
    )


# ---- brute-force reference (tests and small instances only) ----

def _closure_blocks(members: list[str], same: dict[tuple[str, str], bool]) -> list[set[str]]:
    # explicit relation matrix, reflexive-symmetric-transitive closure
    n = len(members)
    mat = [[i == j for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if same.get((members[i], members[j])):
                mat[i][j] = True
                mat[j][i] = True
    for k in range(n):
        for i in range(n):
            if mat[i][k]:
                row_k = mat[k]
                row_i = mat[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    blocks: list[set[str]] = []
    seen: set[int] = set()
    for i in range(n):
        if i in seen:
            continue
        block = {j for j in range(n) if mat[i][j]}
        seen |= block
        blocks.append({members[j] for j in block})
    return blocks


def _oracle_side(a_chains: ChainSet, b_entity: dict[str, object],
                 a_to_b: dict[str, str]) -> tuple[int, int, list[tuple[str, int]]]:
    # count recoverable spanning links per chain, literally
    num = den = 0
    per = []
    for chain in a_chains.chains:
        members = sorted(chain.member_ids)
        same: dict[tuple[str, str], bool] = {}
        for x in members:
            for y in members:
                bx, by = a_to_b.get(x), a_to_b.get(y)
                if bx is not None and by is not None and b_entity[bx] == b_entity[by]:
                    same[(x, y)] = True
        blocks = _closure_blocks(members, same)
        recovered_links = sum(len(b) - 1 for b in blocks)
        minimal_links = len(members) - 1
        num += recovered_links
        den += minimal_links
        per.append((chain.chain_id, len(blocks)))
    return num, den, per


def oracle_link_score(key_chains: ChainSet, response_chains: ChainSet,
                      alignment: MentionAlignment) -> ScoreReport:
    """Link-counting reference scorer; exact but quadratic per chain."""
    biggest = max(len(key_chains.all_mention_ids()),
                  len(response_chains.all_mention_ids()))
    if biggest > ORACLE_MAX_MENTIONS:
        raise TooLarge(f"{biggest} mentions exceed the oracle bound of {ORACLE_MAX_MENTIONS}")
    _check_alignment(key_chains, response_chains, alignment)
    key_to_resp = {k: r for k, r in alignment.pairs}
    resp_to_key = {r: k for k, r in alignment.pairs}
    r_num, r_den, per = _oracle_side(key_chains, _entity_map(response_chains), key_to_resp)
    p_num, p_den, _ = _oracle_side(response_chains, _entity_map(key_chains), resp_to_key)
    return ScoreReport(recall_num=r_num, recall_den=r_den,
                       precision_num=p_num, precision_den=p_den,
                       per_chain=tuple(per))
