"""patchlens: interactive triage of auto-generated patches via runtime comparison."""

__version__ = "0.1.0"
