"""Rate regions of state-dependent multiple-access channels with asymmetric state knowledge."""

__version__ = "0.1.0"


def data_file(name: str) -> str:
    """Path of a bundled channel or inequality-system file."""
    from importlib.resources import files

    return str(files(__name__) / "data" / name)
