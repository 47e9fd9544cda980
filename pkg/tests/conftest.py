import pytest

from hashcube.ingest import IngestConfig, build_archive, generate_synthetic
from hashcube.hashing import HashingHead
from hashcube.labels import LabelHierarchy


@pytest.fixture(scope="session")
def toy6() -> LabelHierarchy:
    """Six-leaf hierarchy for operator and compaction tests."""
    return LabelHierarchy(
        [
            ("Alpha", [("A", ["a1", "a2", "a3"]), ("B", ["b1"])]),
            ("Beta", [("C", ["c1", "c2"])]),
        ]
    )


@pytest.fixture(scope="session")
def small_store(tmp_path_factory):
    """200-entry trained archive with band grids; shared across server tests."""
    manifest = generate_synthetic(seed=7, n=200, clusters=3, dim=32, with_bands=True)
    out = tmp_path_factory.mktemp("store") / "small"
    config = IngestConfig(seed=7, bits=32, train_steps=120, max_anchors=150)
    return build_archive(manifest, out, config=config)


@pytest.fixture(scope="session")
def big_store(tmp_path_factory):
    """1,200-entry archive built with a fixed head (no training); no bands."""
    manifest = generate_synthetic(seed=13, n=1200, clusters=5, dim=16)
    out = tmp_path_factory.mktemp("store") / "big"
    head = HashingHead.random(dim=16, bits=64, seed=13)
    return build_archive(manifest, out, head=head, config=IngestConfig(seed=13))
