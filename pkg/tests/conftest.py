import functools

import pytest
from hypothesis import settings

from dfgen.context import ProgramContext
from dfgen.dataflow import find_pair
from dfgen.frontend import load
from dfgen.manifest import corpus_dir, load_manifest

settings.register_profile("dfgen", deadline=None, max_examples=60)
settings.load_profile("dfgen")

CORPUS = corpus_dir()


@functools.lru_cache(maxsize=None)
def corpus_program(name: str):
    path = CORPUS / f"{name}.dfc"
    return load(path.read_text(), file=path.name)


@functools.lru_cache(maxsize=None)
def corpus_context(name: str) -> ProgramContext:
    return ProgramContext(corpus_program(name))


@functools.lru_cache(maxsize=None)
def manifest():
    return load_manifest()


def corpus_names() -> list[str]:
    return [e.name for e in manifest()]


def by_lines(ctx: ProgramContext, d: int, u: int, var: str, edge=None):
    return find_pair(ctx.prog, ctx.pairs, d, u, var, edge)


@pytest.fixture
def power() -> ProgramContext:
    return corpus_context("power")


@pytest.fixture
def triangle() -> ProgramContext:
    return corpus_context("triangle")
