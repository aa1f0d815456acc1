"""Unsupervised in-context example mining for LLM machine translation.

Two stages: word-pair mining (sampled forward translation, greedy backward
translation, bidirectional consistency filtering, similarity ranking, and
an optional k-shot refinement round), then sentence-level mining via
back-translation of unlabeled target text. Selection policies (Random,
TopK, TopK+BM25) pick per-query in-context examples from the mined pool,
and chrF++/BLEU score the resulting translations.
"""

__version__ = "0.1.0"
