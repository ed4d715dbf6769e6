import pytest

from lcnf_fpm.io import ManifestWriter


@pytest.fixture
def writer(tmp_path):
    """
    Description: A manifest writer for a throwaway command run under tmp_path.
    """
    out_dir = tmp_path / "run"
    out_dir.mkdir()
    return ManifestWriter(out_dir, "test", {"purpose": "service test"})
