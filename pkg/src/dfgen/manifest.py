"""Benchmark corpus description: programs, expected pair counts and golden
verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .context import ProgramContext
from .errors import DfgenError
from .frontend import load
from .frontend.ir import IRProgram
from .verdict import STATUSES


class ManifestError(DfgenError):
    pass


@dataclass
class CorpusEntry:
    path: Path
    pairs: int
    golden: dict[str, str] = field(default_factory=dict)
    golden_bounds: tuple[int, int] = (2, 2)

    @property
    def name(self) -> str:
        return self.path.stem

    def load(self) -> IRProgram:
        return load(self.path.read_text(), file=self.path.name)


@dataclass
class CorpusManifest:
    root: Path
    programs: list[CorpusEntry]

    def __iter__(self):
        return iter(self.programs)

    def get(self, name: str) -> CorpusEntry:
        for e in self.programs:
            if e.name == name:
                return e
        raise KeyError(name)


def corpus_dir() -> Path:
    return Path(str(resources.files("dfgen").joinpath("corpus")))


def load_manifest(path: str | Path | None = None, validate: bool = True) -> CorpusManifest:
    """Read ``manifest.json`` from a directory (the bundled corpus by default).
    A directory without a manifest yields every ``.dfc`` file it contains,
    with no expectations attached."""
    root = Path(path) if path is not None else corpus_dir()
    if root.is_file():
        root, file = root.parent, root
    else:
        file = root / "manifest.json"
    if not file.exists():
        entries = [CorpusEntry(p, -1) for p in sorted(root.glob("*.dfc"))]
        return CorpusManifest(root, entries)
    data = json.loads(file.read_text())
    entries = []
    for item in data["programs"]:
        g = item.get("golden") or {}
        entries.append(CorpusEntry(root / item["path"], int(item["pairs"]), dict(g.get("verdicts", {})),
                                   (int(g.get("unwind", 2)), int(g.get("depth", 2)))))
    m = CorpusManifest(root, entries)
    if validate:
        for e in m:
            _validate(e)
    return m


def _validate(e: CorpusEntry) -> None:
    if not e.path.exists():
        raise ManifestError(f"{e.path}: listed in the manifest but missing")
    ctx = ProgramContext(e.load())
    if e.pairs >= 0 and len(ctx.pairs) != e.pairs:
        raise ManifestError(f"{e.path.name}: expected {e.pairs} pairs, found {len(ctx.pairs)}")
    ids = set(ctx.ids.values())
    for pid, status in e.golden.items():
        if pid not in ids:
            raise ManifestError(f"{e.path.name}: golden verdict for unknown pair {pid}")
        if status not in STATUSES:
            raise ManifestError(f"{e.path.name}: bad golden verdict {status!r} for {pid}")
