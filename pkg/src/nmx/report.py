"""Deterministic machine-parseable run reports.

Reports contain only stable fields (wall time goes to stderr, never into
the artifact) so identical inputs render byte-identical text. Rationals are
printed as p/q plus a decimal approximation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

from .model import InfoStructure, SystemModel
from .modelfile import serialize_model

TIE_BREAK_VERSION = "lex-v1"


def instance_digest(model: SystemModel, info: InfoStructure) -> str:
    text = serialize_model(model, info)
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def params_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def format_value(value: Fraction) -> str:
    approx = float(value)
    if value.denominator == 1:
        return f"{value.numerator} ({approx:g})"
    return f"{value.numerator}/{value.denominator} ({approx:g})"


@dataclass
class RunReport:
    command: str
    instance: str
    fields: list = field(default_factory=list)

    def add(self, key: str, value):
        if isinstance(value, Fraction):
            value = format_value(value)
        self.fields.append((key, str(value)))

    def render(self) -> str:
        lines = ["nmx-report v1"]
        lines.append(f"command = {self.command}")
        lines.append(f"instance = {self.instance}")
        lines.append(f"tie_break = {TIE_BREAK_VERSION}")
        for key, value in self.fields:
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"
