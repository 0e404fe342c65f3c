import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bshadow import GroupContext, certify_delta, cover_for_l, derive_constants  # noqa: E402
from bshadow.io import load_group  # noqa: E402


@pytest.fixture(scope="session")
def f2():
    return GroupContext.free(2)


@pytest.fixture(scope="session")
def z2():
    return load_group("builtin:z2.json")


@pytest.fixture(scope="session")
def genus2():
    return load_group("builtin:genus2.json")


@pytest.fixture(scope="session")
def f2_cert(f2):
    return certify_delta(f2, 8)


@pytest.fixture(scope="session")
def genus2_cert(genus2):
    # delta is read off triangles in ball(2); ball(3) gives the same value
    return certify_delta(genus2, 2)


@pytest.fixture(scope="session")
def f2_constants(f2, f2_cert):
    return derive_constants(5, f2_cert, f2)


@pytest.fixture(scope="session")
def f2_covers(f2, f2_cert, f2_constants):
    u = cover_for_l(f2_constants.l, f2_cert, f2)
    v = cover_for_l(f2_constants.L, f2_cert, f2, kind="V-cover")
    return u, v
