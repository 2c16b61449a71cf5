"""Piecewise polynomial controller synthesis for hybrid systems."""

import json

from ._core import *  # noqa: F401,F403
from ._core import ControllabilityMap, SynthResult


def summary(result):
    """The JSON summary of a SynthResult or ControllabilityMap as a dict."""
    if not isinstance(result, (SynthResult, ControllabilityMap)):
        raise TypeError("expected a SynthResult or ControllabilityMap")
    return json.loads(result.summary())
