"""Error taxonomy shared by the library and the CLI.

Each error class carries the process exit code the CLI maps it to:
format errors -> 3, domain/precondition errors -> 4, resource caps -> 5.
Usage errors (exit 2) are argparse's job and never reach these classes.
"""


class WeylLabError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class FormatError(WeylLabError):
    """Malformed or inconsistent file content (headers, payload, CSV)."""

    exit_code = 3


class DomainError(WeylLabError):
    """Parameter outside its admissible range, or a broken precondition."""

    exit_code = 4


class ShapeError(DomainError):
    """Mismatched grids, lengths, or index ranges."""


class ResourceError(WeylLabError):
    """A configured size/level cap would be exceeded."""

    exit_code = 5


class NumericError(WeylLabError):
    """Ill-conditioned solve or non-finite intermediate result."""
