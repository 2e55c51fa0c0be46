"""plaguesim: agent-based simulator of virtual plagues in a synthetic MMOG population."""

__version__ = "0.1.0"
