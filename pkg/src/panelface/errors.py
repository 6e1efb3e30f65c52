"""Error vocabulary shared by the library, the service, and the CLI.

Every failure mode has its own exception class; the class name doubles as
the machine-readable error code on the wire, so nothing ever surfaces as a
generic failure.
"""

from __future__ import annotations


class PanelfaceError(Exception):
    """Base class. ``code`` is the wire-level token, ``retryable`` tells a
    client whether the same request may succeed later."""

    retryable: bool = False

    @property
    def code(self) -> str:
        return type(self).__name__


# --- geometry ---------------------------------------------------------------

class DegenerateLandmarks(PanelfaceError):
    """Landmark hull has zero width or height."""


class PanelTooSmall(PanelfaceError):
    """Panel is smaller than the minimum croppable side."""


class SideTooSmall(PanelfaceError):
    """Requested square side is below the minimum croppable side."""


class SpecOutOfBounds(PanelfaceError):
    """A crop spec no longer fits its panel (stale spec)."""


# --- preparation ------------------------------------------------------------

class AdapterUnavailable(PanelfaceError):
    """Detector engine missing or unreachable."""

    retryable = True


class AdapterProtocolError(PanelfaceError):
    """Detector produced a structurally malformed face document."""


# --- reenactment ------------------------------------------------------------

class EngineUnknown(PanelfaceError):
    """No engine registered under the requested name."""


class EngineFailure(PanelfaceError):
    """External engine crashed, timed out, or returned an error."""

    retryable = True


class InvalidSource(PanelfaceError):
    """Source image is not a 512x512x3 canonical face."""


# --- mapping session --------------------------------------------------------

class EmptyPerformance(PanelfaceError):
    """Driving performance has zero frames."""


class UnreadableMedia(PanelfaceError):
    """Input media could not be decoded."""


class ZeroFrames(PanelfaceError):
    """Media decoded to zero frames."""


class InvalidIndex(PanelfaceError):
    """Frame index outside the driving performance."""


class FrameNotGenerated(PanelfaceError):
    """Requested frame has no up-to-date reenacted result."""


class ParamOutOfRange(PanelfaceError):
    """Retarget parameter outside [0, 1]."""


class NothingSelected(PanelfaceError):
    """Commit attempted with no keyframe selected."""


class StaleSelection(PanelfaceError):
    """Selected frame was generated with outdated parameters."""


class SessionCommitted(PanelfaceError):
    """Mutation attempted on a committed (immutable) session."""


# --- composition ------------------------------------------------------------

class MismatchedPanel(PanelfaceError):
    """Mapped face does not reference the panel being composed."""


# --- project store ----------------------------------------------------------

class IOFailure(PanelfaceError):
    """Filesystem write failed."""


class MissingManifest(PanelfaceError):
    """Directory does not contain a project manifest."""


class IntegrityError(PanelfaceError):
    """Asset missing or content hash mismatch."""


class VersionUnsupported(PanelfaceError):
    """Manifest schema version is not supported."""


# --- service ----------------------------------------------------------------

class NotFound(PanelfaceError):
    """Referenced panel, region, session, or asset does not exist."""
