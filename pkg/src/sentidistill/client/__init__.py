from .api import (
    CollectStats,
    DistillSample,
    EndpointDown,
    GenRequest,
    PermanentError,
    ProtocolError,
    TeacherClient,
    TeacherClientError,
    TransientExhausted,
    read_samples,
)
from .cache import CacheCollisionError, ResponseCache, cache_key

__all__ = [
    "CollectStats",
    "DistillSample",
    "EndpointDown",
    "GenRequest",
    "PermanentError",
    "ProtocolError",
    "TeacherClient",
    "TeacherClientError",
    "TransientExhausted",
    "read_samples",
    "CacheCollisionError",
    "ResponseCache",
    "cache_key",
]
