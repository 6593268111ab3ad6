"""Sequences of discrete probability measures, escape of mass, and limit probabilities."""

from limitlab.errors import CapacityError, DomainError, LabError, ParameterError
from limitlab.extreal import (
    MINUS_INF,
    PLUS_INF,
    DiscreteMeasure,
    ExtendedReal,
    as_rational,
    dirac,
    measure_of_event,
    tv_distance,
)
from limitlab.events import (
    EXTENDED_LINE,
    REAL_LINE,
    EventRule,
    EventSet,
    LimitEvent,
    apply_rule,
    complement,
    limit_event,
    parse_event,
)
from limitlab.families import MeasureFamily, make_family

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "DiscreteMeasure",
    "DomainError",
    "EXTENDED_LINE",
    "EventRule",
    "EventSet",
    "ExtendedReal",
    "LabError",
    "LimitEvent",
    "MINUS_INF",
    "MeasureFamily",
    "PLUS_INF",
    "ParameterError",
    "REAL_LINE",
    "apply_rule",
    "as_rational",
    "complement",
    "dirac",
    "limit_event",
    "make_family",
    "measure_of_event",
    "parse_event",
    "tv_distance",
]
