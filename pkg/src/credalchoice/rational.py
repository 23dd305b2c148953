"""Helpers for exact rational values crossing a text boundary."""

from __future__ import annotations

from fractions import Fraction

from .errors import ParseError


def format_fraction(x: Fraction) -> str:
    """Canonical ``p/q`` form, also for integers (``1`` becomes ``1/1``)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    """Accept ``p/q``, integer, and decimal notations, all read exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text!r}") from exc
