"""Coreference chains: the transitive closure of IDENT links.

A REF link is a symmetric, transitive identity relation, so closing the
link graph partitions the linked mentions into equivalence classes.  Every
mention untouched by a link is a singleton markable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DanglingRef, UnknownMention
from .sgml import AnnotatedDocument, Mention


class UnionFind:
    """Disjoint sets over hashable keys, with path compression."""

    def __init__(self):
        self.parent: dict = {}

    def add(self, k) -> None:
        if k not in self.parent:
            self.parent[k] = k

    def find(self, k):
        self.add(k)
        root = k
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[k] != root:
            self.parent[k], k = root, self.parent[k]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def classes(self) -> list[set]:
        groups: dict = {}
        for k in self.parent:
            groups.setdefault(self.find(k), set()).add(k)
        return list(groups.values())


@dataclass(frozen=True)
class Chain:
    """An equivalence class of at least two linked mentions."""

    chain_id: str
    member_ids: frozenset[str]
    representative: str


@dataclass(frozen=True)
class ChainSet:
    doc_id: str
    chains: tuple[Chain, ...]
    singletons: tuple[str, ...]

    def all_mention_ids(self) -> set[str]:
        ids = set(self.singletons)
        for c in self.chains:
            ids |= c.member_ids
        return ids

    def chain_by_member(self) -> dict[str, Chain]:
        return {m: c for c in self.chains for m in c.member_ids}


def _mention_sort_key(m: Mention) -> tuple[int, int, str]:
    # smallest start, then smallest end, then lexicographic id
    return (m.start, m.end, m.id)


def build_chains(doc: AnnotatedDocument) -> ChainSet:
    """Close REF links into chains; direction of the links is irrelevant."""
    by_id = {m.id: m for m in doc.mentions}
    uf = UnionFind()
    linked: set[str] = set()
    for m in doc.mentions:
        if m.ref is not None:
            if m.ref not in by_id:
                raise DanglingRef(m.ref)
            uf.union(m.id, m.ref)
            linked.add(m.id)
            linked.add(m.ref)

    chains = []
    for members in uf.classes():
        if len(members) < 2:
            continue
        rep = min(members, key=lambda i: _mention_sort_key(by_id[i]))
        chains.append(Chain(chain_id=f"chain-{rep}",
                            member_ids=frozenset(members),
                            representative=rep))
    chains.sort(key=lambda c: _mention_sort_key(by_id[c.representative]))
    singletons = tuple(sorted((m.id for m in doc.mentions if m.id not in linked),
                              key=lambda i: _mention_sort_key(by_id[i])))
    return ChainSet(doc_id=doc.doc_id, chains=tuple(chains), singletons=singletons)


def chain_of(chain_set: ChainSet, mention_id: str) -> Chain | None:
    """The chain containing a mention, or None for singleton markables."""
    for c in chain_set.chains:
        if mention_id in c.member_ids:
            return c
    if mention_id in chain_set.singletons:
        return None
    raise UnknownMention(f"mention {mention_id!r} unknown to chain set for "
                         f"document {chain_set.doc_id!r}")


def chainset_from_partition(doc_id: str, blocks) -> ChainSet:
    """Build a ChainSet directly from member-id blocks (scoring tests and
    synthetic partitions).  Blocks of size one become singletons."""
    chains = []
    singles: list[str] = []
    for block in blocks:
        members = sorted(str(b) for b in block)
        if len(members) >= 2:
            rep = members[0]
            chains.append(Chain(chain_id=f"chain-{rep}",
                                member_ids=frozenset(members),
                                representative=rep))
        elif members:
            singles.append(members[0])
    chains.sort(key=lambda c: c.representative)
    return ChainSet(doc_id=doc_id, chains=tuple(chains), singletons=tuple(sorted(singles)))
