"""Run configuration files.

The format is a small, line-oriented ``key = value`` language::

    # comment
    seed = 7
    output_dir = "out"

    [map]
    family = "two_shear"
    a = 1.2
    b = 1.2

    [map.params]        # sub-table, used by expression maps
    k = 0.3

Values are double-quoted strings (escapes ``\\"``, ``\\\\``, ``\\n``,
``\\t``), integers, floats, ``true``/``false`` and single-line arrays
``[v, v, ...]``. Keys are bare identifiers. Every error names its line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .maps import TorusMapSpec, spec_from_mapping
from .orbit import GridSpec

_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_SECTION = re.compile(r"\[\s*([A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)\s*\]$")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class _Cursor:
    def __init__(self, text, line):
        self.text = text
        self.i = 0
        self.line = line

    def skip_ws(self):
        while self.i < len(self.text) and self.text[self.i] in " \t":
            self.i += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def fail(self, msg):
        raise ConfigError(msg, self.line)


def _parse_value(cur: _Cursor):
    c = cur.peek()
    if c == '"':
        cur.i += 1
        out = []
        while True:
            if cur.i >= len(cur.text):
                cur.fail("unterminated string")
            ch = cur.text[cur.i]
            if ch == '"':
                cur.i += 1
                return "".join(out)
            if ch == "\\":
                nxt = cur.text[cur.i + 1 : cur.i + 2]
                if nxt not in _ESCAPES:
                    cur.fail(f"bad escape \\{nxt}")
                out.append(_ESCAPES[nxt])
                cur.i += 2
            else:
                out.append(ch)
                cur.i += 1
    if c == "[":
        cur.i += 1
        items = []
        if cur.peek() == "]":
            cur.i += 1
            return items
        while True:
            items.append(_parse_value(cur))
            c = cur.peek()
            if c == ",":
                cur.i += 1
                if cur.peek() == "]":
                    cur.i += 1
                    return items
            elif c == "]":
                cur.i += 1
                return items
            else:
                cur.fail("expected ',' or ']' in array")
    rest = cur.text[cur.i :]
    for word, val in (("true", True), ("false", False)):
        if rest.startswith(word) and not rest[len(word) : len(word) + 1].isalnum():
            cur.i += len(word)
            return val
    m = _NUMBER.match(rest)
    if m:
        cur.i += m.end()
        tok = m.group(0)
        if re.fullmatch(r"[+-]?\d+", tok):
            return int(tok)
        return float(tok)
    cur.fail(f"cannot parse value {rest.strip()!r}" if rest.strip() else "missing value")


def _strip_comment(line):
    in_str = False
    esc = False
    for i, ch in enumerate(line):
        if esc:
            esc = False
        elif ch == "\\" and in_str:
            esc = True
        elif ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return line[:i]
    return line


def parse_config_text(text: str):
    """Parse config text into nested dicts.

    Returns ``(data, lines)`` where ``lines`` maps ``(section, key)`` and
    ``(section, None)`` to the line where they were defined.
    """
    data: dict = {}
    lines: dict = {(): 0}
    table = data
    path: tuple = ()
    # split on newlines only: splitlines() would also break inside strings at \x0b, \u2028, ...
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = _strip_comment(raw.rstrip("\r")).strip(" \t")
        if not line:
            continue
        if line.startswith("["):
            m = _SECTION.match(line)
            if not m:
                raise ConfigError(f"malformed section header {line!r}", lineno)
            path = tuple(m.group(1).split("."))
            if (path, None) in lines:
                raise ConfigError(f"duplicate section [{m.group(1)}]", lineno)
            table = data
            for part in path:
                nxt = table.setdefault(part, {})
                if not isinstance(nxt, dict):
                    raise ConfigError(f"[{m.group(1)}] conflicts with key {part!r}", lineno)
                table = nxt
            lines[(path, None)] = lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, _, rest = line.partition("=")
        key = key.strip()
        if not _KEY.match(key):
            raise ConfigError(f"invalid key {key!r}", lineno)
        if key in table:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        cur = _Cursor(rest, lineno)
        value = _parse_value(cur)
        if cur.peek():
            raise ConfigError(f"unexpected text after value: {cur.text[cur.i:].strip()!r}", lineno)
        table[key] = value
        lines[(path, key)] = lineno
    return data, lines


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ConfigError(f"cannot write non-finite number {v!r}")
        return repr(v)
    if isinstance(v, str):
        out = v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    raise ConfigError(f"cannot write value of type {type(v).__name__}")


def dump_config_text(data: dict) -> str:
    """Inverse of :func:`parse_config_text` (comments are not preserved)."""
    out = []

    def emit(table, path):
        scalars = [(k, v) for k, v in table.items() if not isinstance(v, dict)]
        subs = [(k, v) for k, v in table.items() if isinstance(v, dict)]
        if path:
            if out:
                out.append("")
            out.append("[" + ".".join(path) + "]")
        for k, v in scalars:
            out.append(f"{k} = {_format_value(v)}")
        for k, v in subs:
            emit(v, path + (k,))

    emit(data, ())
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# run configuration

DEFAULT_TOLERANCES = {
    "interior_margin": 0.02,
    "newton_tol": 1e-12,
    "dedupe_radius": 1e-6,
    "periodicity_tol": 1e-9,
    "area_tol": 1e-9,
}

_ALLOWED = {
    (): {"seed", "output_dir", "threads"},
    ("map",): {"family", "alpha", "beta", "a", "b", "c1", "c2", "expr_x", "expr_y"},
    ("map", "params"): None,
    ("grid",): {"resolution", "offset"},
    ("rotset",): {"n_schedule", "directions", "n_ref", "refine"},
    ("leb",): {"method", "resolution", "samples"},
    ("deviate",): {"n_schedule", "fit_fraction", "inward_shift", "window"},
    ("staircase",): {"direction", "exact", "max_steps", "d_gamma"},
    ("periodic",): {"q", "t", "seed_resolution", "max_newton_iters"},
    ("tolerances",): set(DEFAULT_TOLERANCES),
}


@dataclass
class RunConfig:
    map: TorusMapSpec
    grid: GridSpec = field(default_factory=lambda: GridSpec(128))
    n_schedule: list = field(default_factory=lambda: [250, 500, 1000, 2000])
    directions: object = 16  # count or explicit list of angles
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "out"
    threads: int | None = None
    sections: dict = field(default_factory=dict)

    def section(self, name):
        return self.sections.get(name, {})

    def thetas(self):
        if isinstance(self.directions, list):
            return [float(t) for t in self.directions]
        count = int(self.directions)
        return [2.0 * math.pi * k / count for k in range(count)]


def _check_keys(data, lines, path=()):
    allowed = _ALLOWED.get(path, set())
    for key, value in data.items():
        sub = path + (key,)
        if isinstance(value, dict):
            if sub not in _ALLOWED:
                raise ConfigError(f"unknown section [{'.'.join(sub)}]", lines.get((sub, None)))
            if _ALLOWED[sub] is not None:
                _check_keys(value, lines, sub)
        elif allowed is not None and key not in allowed:
            where = "top level" if not path else f"[{'.'.join(path)}]"
            raise ConfigError(f"unknown key {key!r} at {where}", lines.get((path, key)))


def _typed(table, key, kind, lines, path, default=None):
    if key not in table:
        return default
    v = table[key]
    line = lines.get((path, key))
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{key} must be an integer", line)
    elif kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key} must be a number", line)
        v = float(v)
    elif kind is list:
        if not isinstance(v, list):
            raise ConfigError(f"{key} must be an array", line)
    elif kind is str:
        if not isinstance(v, str):
            raise ConfigError(f"{key} must be a string", line)
    elif kind is bool:
        if not isinstance(v, bool):
            raise ConfigError(f"{key} must be true or false", line)
    return v


def run_config_from_text(text: str) -> RunConfig:
    from .errors import ArgumentError, ExpressionError

    data, lines = parse_config_text(text)
    _check_keys(data, lines)
    if "map" not in data:
        raise ConfigError("missing section: [map]")
    map_line = lines.get((("map",), None))
    try:
        spec = spec_from_mapping(data["map"])
    except ConfigError as exc:
        if exc.line is None:
            raise ConfigError(exc.message, map_line) from None
        raise
    except (ArgumentError, ExpressionError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid map: {exc}", map_line) from None
    grid_t = data.get("grid", {})
    try:
        res = _typed(grid_t, "resolution", int, lines, ("grid",), 128)
        offset = _typed(grid_t, "offset", list, lines, ("grid",), None)
        grid = GridSpec(res, tuple(float(o) for o in offset) if offset is not None else None)
    except ArgumentError as exc:
        raise ConfigError(str(exc), lines.get((("grid",), None))) from None
    rot = data.get("rotset", {})
    sched = _typed(rot, "n_schedule", list, lines, ("rotset",), [250, 500, 1000, 2000])
    if not sched or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in sched):
        raise ConfigError("n_schedule must be a nonempty array of positive integers",
                          lines.get((("rotset",), "n_schedule")))
    directions = rot.get("directions", 16)
    if isinstance(directions, bool) or not isinstance(directions, (int, list)):
        raise ConfigError("directions must be a count or an array of angles",
                          lines.get((("rotset",), "directions")))
    tol = dict(DEFAULT_TOLERANCES)
    for k in data.get("tolerances", {}):
        tol[k] = _typed(data["tolerances"], k, float, lines, ("tolerances",))
    seed = _typed(data, "seed", int, lines, (), 0)
    threads = _typed(data, "threads", int, lines, (), None)
    out = _typed(data, "output_dir", str, lines, (), "out")
    sections = {k: v for k, v in data.items() if isinstance(v, dict)}
    return RunConfig(spec, grid, list(sched), directions, seed, tol, out, threads, sections)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return run_config_from_text(text)
