#!/usr/bin/env python3
"""Run the full acceptance battery and propagate its exit status.

Each criterion prints one PASS/FAIL line; the pytest exit code is the
script's exit code, so this doubles as a CI gate.
"""

import pathlib
import subprocess
import sys


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    cmd = [sys.executable, "-m", "pytest",
           str(root / "tests" / "test_acceptance.py"), "-v", "-s"]
    return subprocess.call(cmd, cwd=root)


if __name__ == "__main__":
    sys.exit(main())
