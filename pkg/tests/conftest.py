import json
import pathlib

import pytest

from raman_comb import kernels

HERE = pathlib.Path(__file__).parent


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture(scope="session")
def golden():
    return json.loads((HERE / "golden.json").read_text())
