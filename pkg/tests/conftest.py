import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def out_env(tmp_path, monkeypatch):
    """Route experiment outputs into a temporary directory."""
    monkeypatch.setenv("COVERLAB_OUTPUT_DIR", str(tmp_path / "out"))
    return tmp_path / "out"
