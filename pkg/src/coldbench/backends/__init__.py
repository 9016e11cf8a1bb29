"""Simulated storage backends behind a uniform GET/PUT API."""
from .base import (
    Callback,
    CostLedger,
    DuplicateFileError,
    OpOutcome,
    PreloadError,
    StorageBackend,
    StorageError,
    UnknownFileError,
)
from .cache import CacheConfig, CacheTier
from .cloud import CloudTier, CloudTierConfig
from .hybrid import HybridArchive, HybridConfig
from .tape import TapeConfig, TapeLibrary

__all__ = [
    "Callback",
    "CacheConfig",
    "CacheTier",
    "CloudTier",
    "CloudTierConfig",
    "CostLedger",
    "DuplicateFileError",
    "HybridArchive",
    "HybridConfig",
    "OpOutcome",
    "PreloadError",
    "StorageBackend",
    "StorageError",
    "TapeConfig",
    "TapeLibrary",
    "UnknownFileError",
]
