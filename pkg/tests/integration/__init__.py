# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.
import logging
import subprocess


def run_cli(command: list[str], *args: str, cwd=None) -> subprocess.CompletedProcess:
    """Run the hardy-cert command line and return the finished process."""
    result = subprocess.run(
        [*command, *args],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        cwd=cwd,
        timeout=600,
    )
    logging.debug("hardy-cert %s -> %d\n%s", " ".join(args), result.returncode, result.stderr)
    return result
