"""Exceptions and warnings raised by mmclt.

Every exception derives from ValueError so callers that only guard against
bad input values keep working.
"""

import warnings
from typing import Any, Dict, List, Optional, Tuple

from .utils.log import logger


class MetricInputError(ValueError):
    """Malformed distance data: non-square, non-finite, duplicate points, bad files."""


class MetricAxiomError(ValueError):
    """A matrix that fails metric validation was used to build a space."""


class MeasureError(ValueError):
    """Invalid weights or sampling arguments."""


class SpaceMismatchError(ValueError):
    """Objects living on different spaces were combined."""


class CoveringSearchTooLarge(ValueError):
    """Exact set-cover search requested on a space above its size guard."""


class HypothesisError(ValueError):
    """A hypothesis the operation cannot proceed without is not met."""


class HypothesisWarning(UserWarning):
    """A hypothesis (ball positivity, non-degeneracy) fails; the result is still returned."""

    def __init__(self, hypothesis: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.hypothesis = hypothesis
        self.details = details or {}


class PseudoMetricWarning(HypothesisWarning):
    """The modified metric collapses distinct points."""

    def __init__(self, collapsed_pairs: List[Tuple[int, int]], message: str):
        super().__init__("metric-positivity", message, {"collapsed_pairs": collapsed_pairs})
        self.collapsed_pairs = collapsed_pairs


def warn_hypothesis(warning: HypothesisWarning) -> None:
    """Log and emit a structured hypothesis warning."""
    logger.warning("%s: %s", warning.hypothesis, warning)
    warnings.warn(warning, stacklevel=3)
