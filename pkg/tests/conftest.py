import os

import pytest

# Small BLAS matvecs lose badly to thread fan-out. Import stylo first so both
# numpy's and scipy's BLAS pools exist, then pin them to one thread.
import stylo  # noqa: F401  (loads the compiled extension and its BLAS)

try:
    import threadpoolctl

    threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except Exception:
    pass

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def author_text():
    from stylo.corpus import normalize_text

    with open(os.path.join(DATA_DIR, "author.txt"), encoding="utf-8") as fh:
        return normalize_text(fh.read())
