"""tsadloader: thin consumer-side reader for tsadforge datasets."""

from .reader import (
    DatasetHandle,
    DigestMismatch,
    IndexOutOfRange,
    LoadedSample,
    SchemaError,
    load_sample,
    open_dataset,
)

__version__ = "0.1.0"
