import importlib.resources
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wquiv.groups import (
    GroupElement,
    cyclic_kind,
    free_abelian_kind,
    free_kind,
    identity,
    trivial_kind,
)
from wquiv.io import load_quiver, load_wqp
from wquiv.quiver import Arrow, Vertex, WeightedQuiver

ALL_KINDS = [trivial_kind(), cyclic_kind(5), free_abelian_kind(2), free_kind(2)]


def data_path(name: str):
    return importlib.resources.files("wquiv") / "data" / name


@pytest.fixture
def figure1():
    return load_quiver(data_path("figure1.json"))


@pytest.fixture
def figure1_qp():
    return load_wqp(data_path("figure1_qp.json"))


def build_quiver(kind, n, arrow_specs, frozen=()):
    """arrow_specs: [(src, dst, weight), ...]; weight None means identity."""
    vertices = tuple(Vertex(v, frozen=v in frozen) for v in range(1, n + 1))
    arrows = tuple(
        Arrow(i + 1, s, d, w if w is not None else identity(kind))
        for i, (s, d, w) in enumerate(arrow_specs)
    )
    return WeightedQuiver(kind, vertices, arrows)
