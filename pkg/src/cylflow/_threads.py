"""Thread-count plumbing. Kernels are serial and FFT batches split over
independent 1-D transforms, so results never depend on the count."""

import os

_workers = 1


def set_threads(n: int) -> int:
    global _workers
    if n is None or n <= 0:
        n = os.cpu_count() or 1
    _workers = int(n)
    return _workers


def fft_workers() -> int:
    return _workers
