"""Fingerprinting kernels with a compiled fast path.

The compiled extension (``_simhash``) is used when it was built; otherwise the
pure-Python twin takes over transparently.  ``SENTIDISTILL_PURE=1`` forces the
fallback, which the kernel benchmark uses to compare both backends.
"""

import os

from . import pure

DEFAULT_SEED = 0
DEFAULT_SHINGLE_SIZE = 3

if os.environ.get("SENTIDISTILL_PURE") == "1":
    _impl = pure
    BACKEND = "python"
else:
    try:
        from . import _simhash as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = pure
        BACKEND = "python"

fnv1a64 = _impl.fnv1a64
fingerprint_tokens = _impl.fingerprint_tokens
hamming64 = _impl.hamming64
hamming_within = _impl.hamming_within
