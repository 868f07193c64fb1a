"""Deadlock checking for synchronous message-passing programs."""

import json

from ._core import ModelError, ParseError, classify, mdg_dot, render, simulate, validate
from ._core import check_json as _check_json

__all__ = ["ModelError", "ParseError", "check", "classify", "mdg_dot", "render", "simulate", "validate"]


def check(text, via="auto", trace=False, max_events=None):
    """Return the JSON report of a static check as a dict."""
    kwargs = {} if max_events is None else {"max_events": max_events}
    return json.loads(_check_json(text, via, trace, **kwargs))
