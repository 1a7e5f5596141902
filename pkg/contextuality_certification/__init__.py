"""Certification toolkit for Bell, steering and preparation-noncontextuality scenarios on qubit pairs."""
from .errors import CertificationError

__all__ = ["CertificationError"]
