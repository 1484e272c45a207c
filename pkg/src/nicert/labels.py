"""Confidentiality labels, the join operator and the memory-update algebra."""

from __future__ import annotations

import enum


class Label(enum.Enum):
    """Two-point confidentiality lattice, Low < High."""

    LOW = "Low"
    HIGH = "High"

    def __str__(self) -> str:
        return self.value

    @property
    def token(self) -> str:
        return "L" if self is Label.LOW else "H"


class StoredLabel(enum.Enum):
    """Label held by a memory location: a plain label or a change marker."""

    LOW = "Low"
    HIGH = "High"
    LOW_TO_HIGH = "Low >> High"
    HIGH_TO_LOW = "High >> Low"

    def __str__(self) -> str:
        return self.value

    @property
    def token(self) -> str:
        return _STORED_TOKENS[self]

    @classmethod
    def from_token(cls, token: str) -> "StoredLabel":
        try:
            return _TOKEN_STORED[token]
        except KeyError:
            raise ValueError(f"not a stored label token: {token!r}") from None


LOW = Label.LOW
HIGH = Label.HIGH

_STORED_TOKENS = {
    StoredLabel.LOW: "L",
    StoredLabel.HIGH: "H",
    StoredLabel.LOW_TO_HIGH: "LH",
    StoredLabel.HIGH_TO_LOW: "HL",
}
_TOKEN_STORED = {v: k for k, v in _STORED_TOKENS.items()}

_CURRENT = {
    StoredLabel.LOW: LOW,
    StoredLabel.HIGH: HIGH,
    StoredLabel.LOW_TO_HIGH: HIGH,
    StoredLabel.HIGH_TO_LOW: LOW,
}

_AS_STORED = {LOW: StoredLabel.LOW, HIGH: StoredLabel.HIGH}


def current(sl: StoredLabel) -> Label:
    """Label a stored value carries when it is read."""
    return _CURRENT[sl]


def as_stored(label: Label) -> StoredLabel:
    return _AS_STORED[label]


def join(a: Label | StoredLabel, b: Label | StoredLabel) -> Label:
    """Least upper bound; stored labels are projected through `current` first."""
    if isinstance(a, StoredLabel):
        a = _CURRENT[a]
    if isinstance(b, StoredLabel):
        b = _CURRENT[b]
    if a is LOW and b is LOW:
        return LOW
    return HIGH


def update(prev: StoredLabel, new: Label) -> StoredLabel:
    """New stored label after writing a `new`-labeled value over `prev`.

    >>> update(StoredLabel.LOW, Label.HIGH)
    <StoredLabel.LOW_TO_HIGH: 'Low >> High'>
    >>> update(StoredLabel.LOW_TO_HIGH, Label.LOW)
    <StoredLabel.LOW: 'Low'>
    """
    if prev is StoredLabel.LOW:
        return StoredLabel.LOW if new is LOW else StoredLabel.LOW_TO_HIGH
    if prev is StoredLabel.HIGH:
        return StoredLabel.HIGH if new is HIGH else StoredLabel.HIGH_TO_LOW
    # change labels: writing the origin label reverts, writing the target persists
    if prev is StoredLabel.LOW_TO_HIGH:
        return StoredLabel.LOW if new is LOW else StoredLabel.LOW_TO_HIGH
    return StoredLabel.HIGH if new is HIGH else StoredLabel.HIGH_TO_LOW


def parse_label(text: str) -> Label:
    for label in Label:
        if label.value == text:
            return label
    raise ValueError(f"unknown label {text!r}; expected Low or High")
