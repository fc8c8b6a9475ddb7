#!/usr/bin/env python3
"""polyopf - ACOPF bound toolkit entry point.

Equivalent to the installed ``polyopf`` command.
"""

from polyopf.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
