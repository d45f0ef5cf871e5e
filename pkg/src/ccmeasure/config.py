"""Experiment configs: INI files whose keys mirror CLI option names.

Sections ``[space]``, ``[curve]``, ``[operation]`` and ``[output]`` apply to
every subcommand; a section named after a subcommand (``[measure complexity]``,
``[rect check]``) applies to that one only. Rectifiable sets are described
by ``[piece.N]`` sections with ``curve``, ``a``, ``b`` and ``subsets``
(``lo:hi`` pairs separated by commas) plus any curve options.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError

COMMON = ("space", "curve", "operation", "output")


@dataclass
class ExperimentConfig:
    space: dict = field(default_factory=dict)
    curve: dict = field(default_factory=dict)
    operation: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    commands: dict = field(default_factory=dict)  # "measure complexity" -> {...}
    pieces: list = field(default_factory=list)

    def defaults_for(self, command: str) -> dict:
        out = {}
        for name in COMMON:
            out.update(getattr(self, name))
        out.update(self.commands.get(command, {}))
        return out


def parse_schedule(text, name="schedule", decreasing=True):
    """Comma-separated positive numbers, sorted as required."""
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",") if v.strip()]
        except ValueError:
            raise InputError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise InputError(f"{name} must be non-empty and positive")
    want = sorted(vals, reverse=decreasing)
    if vals != want or len(set(vals)) != len(vals):
        raise InputError(f"{name} must be strictly {'decreasing' if decreasing else 'increasing'}")
    return vals


def parse_subsets(text):
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            lo, hi = (float(x) for x in part.split(":"))
        except ValueError:
            raise InputError(f"bad subset {part!r}; expected lo:hi") from None
        out.append((lo, hi))
    return out


def _normalize(section):
    return {k.replace("-", "_"): v for k, v in section.items()}


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise InputError(f"cannot parse config {path}: {exc}") from None
    cfg = ExperimentConfig()
    pieces = []
    for name in parser.sections():
        sec = _normalize(parser[name])
        if name in COMMON:
            getattr(cfg, name).update(sec)
        elif name.startswith("piece."):
            try:
                idx = int(name.split(".", 1)[1])
            except ValueError:
                raise InputError(f"bad section name [{name}]") from None
            pieces.append((idx, sec))
        else:
            cfg.commands[" ".join(name.split())] = sec
    cfg.pieces = [sec for _, sec in sorted(pieces, key=lambda p: p[0])]
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    for scope in [cfg.operation, *cfg.commands.values()]:
        for key in ("eps", "cover_eps", "radii"):
            if key in scope:
                parse_schedule(scope[key], key)
        for key in ("rel_tol", "tol", "jump_tol"):
            if key in scope and not float(scope[key]) > 0:
                raise InputError(f"{key} must be positive")
    for sec in cfg.pieces:
        if "curve" not in sec:
            raise InputError("every [piece.N] section needs a curve")
        if "subsets" in sec:
            parse_subsets(sec["subsets"])
