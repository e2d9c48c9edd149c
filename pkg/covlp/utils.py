import hashlib
import time
from contextlib import contextmanager
from typing import Iterator

from loguru import logger


class Stopwatch:
    def __init__(self):
        """Wall clock measurement filled in by the stopwatch context manager."""
        self.started = time.perf_counter()
        self.seconds = 0.0

    def stop(self) -> float:
        self.seconds = time.perf_counter() - self.started
        return self.seconds


@contextmanager
def stopwatch(label: str) -> Iterator[Stopwatch]:
    """Context manager timing the wrapped expression.

    Examples
    --------
    with stopwatch("binpack-solve") as watch:
        solve()
    print(watch.seconds)
    """
    watch = Stopwatch()
    try:
        yield watch
    finally:
        watch.stop()
        logger.debug(f"{label} finished in {watch.seconds:.3f} s")


def md5_digest(payload: str) -> str:
    """Stable identifier for a canonical text payload."""
    return hashlib.md5(payload.encode("utf-8")).hexdigest()
