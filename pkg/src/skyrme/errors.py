"""Exception hierarchy.

Every error class carries a distinct process exit code so the CLI can map
failures to grep-stable one-line diagnostics.
"""


class SkyrmeError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(SkyrmeError):
    """Bad CLI arguments or config file."""

    exit_code = 2


class UnsupportedAlgebraError(SkyrmeError):
    """Requested family/rank outside the supported table."""

    exit_code = 3


class LogRangeError(SkyrmeError):
    """Group element outside the principal branch of the logarithm,
    or a lattice field too rough for unambiguous link logs / lifts."""

    exit_code = 4


class FlatnessError(SkyrmeError):
    """Connection fails the flatness gate where a flat one is required."""

    exit_code = 5


class AtlasError(SkyrmeError):
    """Developing-map atlas inconsistent (overlap constancy violated)."""

    exit_code = 6


class HolonomyMismatchError(SkyrmeError):
    """Two connections do not have the same holonomy representation."""

    exit_code = 7


class CertificationError(SkyrmeError):
    """Non-integral Killing trace or normalizing-constant table mismatch."""

    exit_code = 8


class SectorError(SkyrmeError):
    """Sector cannot be resolved or drifted during a run."""

    exit_code = 9


class PartialBracketError(SkyrmeError):
    """Operation needs ad of an element outside the supported bracket domain."""

    exit_code = 10


class NoLiftError(SkyrmeError):
    """No covering-group lift table for this group."""

    exit_code = 11


class FileFormatError(SkyrmeError):
    """Malformed SKYF/SKYA file."""

    exit_code = 12


class LineSearchError(SkyrmeError):
    """Armijo backtracking stalled."""

    exit_code = 13


class GeneratorError(SkyrmeError):
    """Test-field generator precondition violated (e.g. axis does not close)."""

    exit_code = 14


class ConstructionError(SkyrmeError):
    """Internal consistency failure while building an algebra; fatal."""

    exit_code = 15
