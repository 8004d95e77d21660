#!/usr/bin/env python
"""dipolesim's command-line utility for running scenarios."""


def main():
    """Run scenario commands."""
    try:
        from cli.app import main as run_cli
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the dipolesim CLI. Are the requirements installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    run_cli()


if __name__ == "__main__":
    main()
