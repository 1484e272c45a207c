"""Non-interference policies from ``setLabel`` annotations."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..labels import HIGH, LOW, Label, parse_label
from . import ast


class PolicyError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


@dataclass(frozen=True)
class NIPolicy:
    """Labels for policy variables; anything not listed is Low.

    Keys are canonical variable names: a main input (``initbalance``), a static
    field (``high``) or an instance field of a class (``Account.balance``).
    """

    labels: dict[str, Label] = field(default_factory=dict)

    def label(self, key: str) -> Label:
        return self.labels.get(key, LOW)

    def is_low(self, key: str) -> bool:
        return self.label(key) is LOW

    def high_keys(self) -> set[str]:
        return {k for k, v in self.labels.items() if v is HIGH}

    def canonical_text(self) -> str:
        return "".join(f"{k}={self.labels[k]}\n" for k in sorted(self.labels))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def paths(self, program: ast.Program) -> dict[str, Label]:
        """Labels of every input, static field and instance field path rooted
        at a static field (cycles through object types are cut)."""
        out: dict[str, Label] = {}
        for name, _ in program.inputs:
            out[name] = self.label(name)
        for name, f, _ in program.statics:
            out[name] = self.label(name)
            _expand(program, self, name, f.type, out, (f.type,))
        return out


def _expand(program, policy, prefix, type_name, out, seen) -> None:
    if not program.has_class(type_name):
        return
    for f in program.klass(type_name).instance_fields:
        path = f"{prefix}.{f.name}"
        out[path] = policy.label(f"{type_name}.{f.name}")
        if f.type not in seen:
            _expand(program, policy, path, f.type, out, seen + (f.type,))


def extract_policy(program: ast.Program) -> NIPolicy:
    """Resolve every annotation of a checked program into a policy."""
    labels: dict[str, Label] = {}
    for a in program.annotations:
        try:
            label = parse_label(a.label)
        except ValueError:
            raise PolicyError(f"label {a.label!r} is not Low or High", a.line, a.col) from None
        key = _resolve(program, a)
        if key in labels and labels[key] is not label:
            raise PolicyError(f"conflicting labels for {a.path!r}", a.line, a.col)
        labels[key] = label
    # Low is the default; storing it explicitly would make equal policies hash differently
    return NIPolicy({k: v for k, v in sorted(labels.items()) if v is HIGH})


def _resolve(program: ast.Program, a: ast.Annotation) -> str:
    parts = a.path.split(".")
    if len(parts) == 1:
        name = parts[0]
        if a.method == "main" and program.main is not None \
                and a.klass == program.main.klass \
                and any(n == name for _, n in program.main.params):
            return name
        if a.klass is not None and program.has_class(a.klass):
            for f in program.klass(a.klass).fields:
                if f.name == name:
                    return name if f.static else f"{a.klass}.{name}"
        for sname, _, _ in program.statics:
            if sname == name:
                return name
        if any(n == name for n, _ in program.inputs):
            return name
        raise PolicyError(f"setLabel names undeclared variable {name!r}", a.line, a.col)

    # dotted path: static root followed by instance fields, or Class.field
    head, rest = parts[0], parts[1:]
    type_name = None
    for sname, f, _ in program.statics:
        if sname == head:
            type_name = f.type
            break
    if type_name is None:
        if program.has_class(head) and len(rest) == 1:
            c = program.klass(head)
            for f in c.fields:
                if f.name == rest[0]:
                    return rest[0] if f.static else f"{head}.{rest[0]}"
        raise PolicyError(f"setLabel names undeclared variable {a.path!r}", a.line, a.col)
    key = None
    for part in rest:
        if not program.has_class(type_name):
            raise PolicyError(f"{a.path!r}: {type_name} has no fields", a.line, a.col)
        c = program.klass(type_name)
        idx = c.field_index(part)
        if idx < 0:
            raise PolicyError(f"setLabel names undeclared variable {a.path!r}", a.line, a.col)
        key = f"{c.name}.{part}"
        type_name = c.instance_fields[idx].type
    return key
