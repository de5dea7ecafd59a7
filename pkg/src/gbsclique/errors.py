"""Error types shared across the package.

Validation failures (bad inputs, malformed files, unphysical parameters)
and resource-guard rejections (work that would exceed the configured
enumeration or evaluation budgets) are distinct so the CLI can map them
to different exit codes.
"""


class ValidationError(ValueError):
    """Input rejected: malformed, out of range, or unphysical."""


class ResourceGuardError(RuntimeError):
    """Requested computation exceeds a configured resource guard."""
