"""corefkit: MUC-style coreference annotation, scoring and agreement analysis."""

from .align import MentionAlignment, align, align_symmetric, identity_alignment, resolve_min
from .chains import Chain, ChainSet, build_chains, chain_of, chainset_from_partition
from .diff import (
    Category,
    CategoryTally,
    DiffConfig,
    DiffKind,
    DiffReport,
    Discrepancy,
    apply_labels,
    auto_classify,
    diff,
    tally,
)
from .report import ChainTable, chain_table, render_html, render_score_text
from .score import ScoreReport, combine_reports, f_measure, oracle_link_score, score
from .sgml import (
    AnnotatedDocument,
    Mention,
    Zone,
    ZoneKind,
    document_from_text,
    mention_text,
    parse_muc_sgml,
    segment_zones,
    serialize_muc_sgml,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
