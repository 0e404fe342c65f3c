"""JSON files for groups, certificates, covers, pseudo-orbits and reports.

Every writer emits sorted keys, two-space indent and a trailing newline so
that equal objects give equal bytes.  Readers raise MalformedFile carrying a
``path:line:`` prefix that points at the offending spot.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .boundary import Cover
from .errors import BShadowError, InvalidInput
from .geometry import HyperbolicityCertificate
from .group import GroupContext
from .shadowing import PseudoOrbit, ShadowingConstants

PACKAGED_PREFIX = "builtin:"


class MalformedFile(InvalidInput):
    """A file that cannot be read or does not have the expected shape."""


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_json(path: str | Path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    return path


def _line_of(text: str, key: str | None) -> int:
    if key:
        needle = f'"{key}"'
        for n, line in enumerate(text.splitlines(), 1):
            if needle in line:
                return n
    return 1


def read_text(path: str | Path) -> tuple[str, str]:
    """(text, display name); ``builtin:NAME`` reads a file shipped with the package."""
    name = str(path)
    if name.startswith(PACKAGED_PREFIX):
        res = resources.files("bshadow") / "data" / name[len(PACKAGED_PREFIX):]
        if not res.is_file():
            raise MalformedFile(f"{name}:1: no such packaged file")
        return res.read_text(encoding="utf-8"), name
    p = Path(path)
    if not p.is_file():
        raise MalformedFile(f"{name}:1: file not found")
    try:
        return p.read_text(encoding="utf-8"), name
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"{name}:1: cannot read ({exc})") from None


def load_json(path: str | Path) -> tuple[dict, str, str]:
    """(data, text, display name) for a JSON object file."""
    text, name = read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{name}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise MalformedFile(f"{name}:1: expected a JSON object")
    return data, text, name


def _parse(name: str, text: str, build, what: str):
    """Run ``build``; turn key/type/value errors into anchored MalformedFile."""
    try:
        return build()
    except KeyError as exc:
        key = exc.args[0] if exc.args else None
        raise MalformedFile(f"{name}:{_line_of(text, None)}: {what} misses key {key!r}") from None
    except (TypeError, ValueError, BShadowError) as exc:
        msg = str(exc)
        key = next((k for k in _keys_in(text) if k in msg), None)
        raise MalformedFile(f"{name}:{_line_of(text, key)}: bad {what}: {msg}") from None


def _keys_in(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith('"') and '":' in line:
            out.append(line[1:line.index('":')])
    return out


def load_group(path: str | Path) -> GroupContext:
    data, text, name = load_json(path)
    return _parse(name, text, lambda: GroupContext.from_spec(data), "group file")


def load_certificate(path: str | Path) -> tuple[HyperbolicityCertificate, dict]:
    """The delta certificate and the full certificate document."""
    data, text, name = load_json(path)
    if "delta" not in data:
        raise MalformedFile(f"{name}:1: certificate misses key 'delta'")
    body = data["delta"] if isinstance(data["delta"], dict) else data
    return _parse(name, text, lambda: HyperbolicityCertificate.from_json(body), "certificate"), data


def load_constants(doc: dict) -> ShadowingConstants | None:
    raw = doc.get("constants")
    return None if raw is None else ShadowingConstants.from_json(raw)


def load_cover(path: str | Path, ctx: GroupContext) -> Cover:
    data, text, name = load_json(path)
    return _parse(name, text, lambda: Cover.from_json(ctx, data), "cover file")


def load_pseudo_orbit(path: str | Path, ctx: GroupContext, v_cover: Cover | None = None) -> PseudoOrbit:
    data, text, name = load_json(path)
    return _parse(name, text, lambda: PseudoOrbit.from_json(ctx, data, v_cover), "pseudo-orbit file")


def save_pseudo_orbit(path: str | Path, po: PseudoOrbit) -> Path:
    return save_json(path, po.to_json())
