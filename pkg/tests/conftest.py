import os
import tempfile

import pytest
from hypothesis import settings

# keep the on-disk cache out of the user's home directory
os.environ.setdefault("QMACV_CACHE_DIR", tempfile.mkdtemp(prefix="qmacv-test-cache-"))

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def no_cache(monkeypatch):
    monkeypatch.setenv("QMACV_CACHE_DIR", "")
