"""Python access to the docdec decoding engine.

Worlds, corpora and reports cross the boundary as JSON; the helpers here
parse them into plain Python objects.
"""

import json

from ._docdec import (
    DocdecError,
    bleu,
    predicted_cost,
    split_by_separator,
    strategies,
)
from . import _docdec

__all__ = [
    "DocdecError",
    "beam_search",
    "bleu",
    "decode",
    "default_world",
    "generate",
    "next_token_logprobs",
    "predicted_cost",
    "split_by_separator",
    "strategies",
]


def default_world():
    """The built-in world spec as a dict."""
    return json.loads(_docdec.default_world())


def _world_json(world):
    return world if isinstance(world, str) else json.dumps(world)


def generate(world, seed, n_docs=100, sents_per_doc=6, sent_len=8, window=3):
    """A synthetic corpus as a list of document dicts."""
    text = _docdec.generate(_world_json(world), seed, n_docs, sents_per_doc, sent_len, window)
    return [json.loads(line) for line in text.splitlines() if line]


def decode(strategy, world, corpus, window=3, beam=12, context_beam=12, length_norm=True,
           jobs=1, metrics=("ppl", "bleu", "gender", "formality")):
    """Decodes a corpus (list of document dicts) and returns the run report."""
    jsonl = "".join(json.dumps(doc) + "\n" for doc in corpus)
    return json.loads(_docdec.decode(strategy, _world_json(world), jsonl, window, beam,
                                     context_beam, length_norm, jobs, list(metrics)))


def beam_search(world, src, context=(), beam=12, length_norm=True):
    """Ranked (tokens, log-probability) pairs for one source segment."""
    return _docdec.beam_search(_world_json(world), list(src), list(context), beam, length_norm)


def next_token_logprobs(world, src, context=(), prefix=()):
    """Next-token log-probabilities of the synthetic model, keyed by token."""
    return _docdec.next_token_logprobs(_world_json(world), list(src), list(context), list(prefix))
