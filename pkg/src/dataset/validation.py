"""
Validation of LIBSVM tokens.

Normalizes labels and checks feature indices and values before they reach
the dataset model.
"""

import logging
import math
from typing import Optional, Tuple


logger = logging.getLogger(__name__)


class ValidationError(Exception):
    """Raised when a token fails validation"""
    pass


class LabelValidator:
    """Validates and normalizes binary labels"""

    VALID_LABELS = {0, 1}

    # LIBSVM binary files use +1/-1
    LABEL_MAPPINGS = {
        "1": 1,
        "+1": 1,
        "0": 0,
        "-1": 0,
    }

    @classmethod
    def validate(cls, token: str) -> int:
        """
        Validate and normalize a label token.

        Args:
            token: Raw label token

        Returns:
            Label in {0, 1}

        Raises:
            ValidationError: If the token is not a binary label
        """
        if not token:
            raise ValidationError("Label is required")

        normalized = token.strip()
        if normalized in cls.LABEL_MAPPINGS:
            return cls.LABEL_MAPPINGS[normalized]

        try:
            value = float(normalized)
        except ValueError:
            raise ValidationError(f"Invalid label: {token!r}")

        if value == 1.0:
            return 1
        if value in (0.0, -1.0):
            return 0

        raise ValidationError(
            f"Invalid label: {token!r}. Must be one of: 0, 1, +1, -1"
        )


class FeatureTokenValidator:
    """Validates ``<index>:<value>`` tokens"""

    @classmethod
    def validate(
        cls,
        token: str,
        previous_index: int = 0,
        n_features: Optional[int] = None,
    ) -> Tuple[int, float]:
        """
        Validate a feature token.

        Args:
            token: Raw ``idx:val`` token (idx is one-based)
            previous_index: One-based index of the previous token on the line
            n_features: Optional upper bound on the one-based index

        Returns:
            (zero-based index, value)

        Raises:
            ValidationError: If the token is malformed or out of order
        """
        index_text, sep, value_text = token.partition(":")
        if not sep:
            raise ValidationError(f"Invalid feature token: {token!r}")

        try:
            index = int(index_text)
        except ValueError:
            raise ValidationError(f"Non-numeric feature index in {token!r}")

        try:
            value = float(value_text)
        except ValueError:
            raise ValidationError(f"Non-numeric feature value in {token!r}")

        if index < 1:
            raise ValidationError(f"Feature index must be >= 1, got {index}")

        if index <= previous_index:
            raise ValidationError(
                f"Feature indices must be strictly ascending: {index} after {previous_index}"
            )

        if n_features is not None and index > n_features:
            raise ValidationError(
                f"Feature index {index} exceeds n_features {n_features}"
            )

        if not math.isfinite(value):
            raise ValidationError(f"Feature value must be finite in {token!r}")

        return index - 1, value
