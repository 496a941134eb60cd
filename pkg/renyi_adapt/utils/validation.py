"""Validation utilities for renyi-adapt command-line input."""

import re

from renyi_adapt.models.base import LossKind


N_RANGE_PATTERN: re.Pattern = re.compile(r"^\s*(\d+)\s*(?:-\s*(\d+)\s*)?$")


def parse_n_range(text: str) -> tuple[bool, list[int], str]:
    """Parse ``--n`` values such as ``3``, ``1-5`` or ``1,2,4``.

    Args:
        text: Raw option value.

    Returns:
        tuple[bool, list[int], str]: Success status, parsed sizes and error message if any.
    """
    sizes: list[int] = []
    for part in text.split(","):
        match = N_RANGE_PATTERN.match(part)
        if not match:
            return False, [], f"Invalid size '{part.strip()}'. Expected e.g. 3, 1-5 or 1,2,4"
        start = int(match.group(1))
        stop = int(match.group(2)) if match.group(2) else start
        if stop < start:
            return False, [], f"Size range '{part.strip()}' is descending"
        sizes.extend(range(start, stop + 1))
    return True, sizes, ""


def validate_n_values(sizes: list[int], low: int = 1, high: int = 6) -> tuple[bool, str]:
    """Check every n lies in [low, high].

    Returns:
        tuple[bool, str]: Success status and error message if any.
    """
    outside = [n for n in sizes if not low <= n <= high]
    if outside:
        return False, f"n must lie in [{low}, {high}]; got {outside}"
    return True, ""


def validate_losses(names: list[str]) -> tuple[bool, str]:
    """Check loss names against the supported set.

    Returns:
        tuple[bool, str]: Success status and error message if any.
    """
    valid = {kind.value for kind in LossKind}
    unknown = [name for name in names if name.lower() not in valid]
    if unknown:
        return False, f"Unknown loss(es) {unknown}; choose from {sorted(valid)}"
    return True, ""


def validate_threshold(value: float) -> tuple[bool, str]:
    """Gradient thresholds must be positive and below 1.

    Returns:
        tuple[bool, str]: Success status and error message if any.
    """
    if not 0.0 < value < 1.0:
        return False, f"Threshold must lie in (0, 1), got {value}"
    return True, ""
