from storyreel.utilities.adapters import AdapterSuite
from storyreel.utilities.descriptors import (
    Capability,
    UtilityDescriptor,
    UtilityGapReport,
    UtilityRegistry,
    UtilitySuggestion,
    builtin_descriptors,
)
from storyreel.utilities.mocks import build_mock_suite

__all__ = [
    "AdapterSuite",
    "Capability",
    "UtilityDescriptor",
    "UtilityGapReport",
    "UtilityRegistry",
    "UtilitySuggestion",
    "builtin_descriptors",
    "build_mock_suite",
]
