import pytest

from qdistrib._kernels import backends


@pytest.fixture(params=sorted(backends()))
def backend(request):
    """Each available kernel implementation in turn."""
    return backends()[request.param]
