"""Grid-world simulator for cleaning expanding contaminations with a finite-state robot."""

__version__ = "0.1.0"
