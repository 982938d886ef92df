# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

import shlex
import sys
from pathlib import Path

from pytest import fixture

SCRIPT = Path(__file__).parents[2] / "src" / "hardycert.py"


@fixture(scope="module")
def hardy_cert(request):
    """Command that runs hardy-cert: an installed entry point or the source script."""
    binary = request.config.getoption("--hardy-cert-bin")
    if binary:
        return shlex.split(binary)
    return [sys.executable, str(SCRIPT)]
