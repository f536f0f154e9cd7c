"""Byproduct tracking and no-signaling audits for measurement-based quantum computation."""

from . import aklt, cluster, core, nosignal, qmath

__all__ = ["aklt", "cluster", "core", "nosignal", "qmath"]
__version__ = "0.1.0"
