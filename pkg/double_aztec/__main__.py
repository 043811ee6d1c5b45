"""CLI module entrypoint."""

from double_aztec.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
