"""Versioned prompt templates.

Every template used at inference time lives here; the version hash over the
template texts is stamped into each trace so runs can be tied to the exact
prompt wording that produced them.
"""

from __future__ import annotations

import hashlib

INSTRUCTION_LEVEL = (
    "You are classifying a text into a hierarchical category system, one "
    "level at a time. Given the current label, answer with the next-level "
    "label. Reply with the label only.\n\n"
)

DEMO_BLOCK = "Text: {text}\nCurrent Label: {current}\nNext Label: {answer}\n\n"

QUERY_BLOCK = (
    "Text: {text}\nCurrent Label: {current}\n"
    "Candidate Label Set: {candidates}\nNext Label:"
)

QUERY_BLOCK_FREE = "Text: {text}\nCurrent Label: {current}\nNext Label:"

INSTRUCTION_FULL_PATH = (
    "You are classifying a text into a hierarchical category system. Answer "
    "with the full label path exactly as written in the candidate set. Reply "
    "with the label path only.\n\n"
)

DEMO_BLOCK_FULL_PATH = "Text: {text}\nLabel Path: {answer}\n\n"

QUERY_BLOCK_FULL_PATH = (
    "Text: {text}\nCandidate Label Paths: {candidates}\nLabel Path:"
)

INSTRUCTION_PICK_SIMILAR = (
    "Below are numbered example texts. Reply with the number of the example "
    "most similar to the query text. Reply with the number only.\n\n"
)

PICK_SIMILAR_ITEM = "Example {index}: {text}\n\n"

PICK_SIMILAR_QUERY = "Query text: {text}\nMost similar example number:"

DESCRIBE = (
    "Describe the category \"{path_text}\" in one or two sentences, "
    "emphasizing what distinguishes it from closely related categories."
)

_ALL_TEMPLATES = [
    INSTRUCTION_LEVEL,
    DEMO_BLOCK,
    QUERY_BLOCK,
    QUERY_BLOCK_FREE,
    INSTRUCTION_FULL_PATH,
    DEMO_BLOCK_FULL_PATH,
    QUERY_BLOCK_FULL_PATH,
    INSTRUCTION_PICK_SIMILAR,
    PICK_SIMILAR_ITEM,
    PICK_SIMILAR_QUERY,
    DESCRIBE,
]

TEMPLATE_VERSION = hashlib.sha256(
    "\x1e".join(_ALL_TEMPLATES).encode("utf-8")
).hexdigest()[:16]
