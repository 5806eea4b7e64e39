"""Allow ``python -m qgraph`` to behave like the ``qgraph`` script."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
