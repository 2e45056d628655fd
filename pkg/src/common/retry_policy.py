"""
Exponential backoff for transient failures (dataset downloads).

Whether an error is worth another attempt is decided by its category:
network and system errors are retried, everything else is raised at once.
"""
import time
from typing import Any, Callable, Iterator, List

from src.common.error_categorization import categorize_error
from src.common.structured_logging import LogContext, get_structured_logger

logger = get_structured_logger(__name__)


class RetryExhaustedError(Exception):
    """Every attempt failed with a retryable error."""


class RetryPolicy:
    """
    Call a function up to `max_retries + 1` times.

    The k-th wait (k = 0, 1, ...) lasts base_delay * backoff_multiplier**k
    seconds, capped at max_delay. `sleep` is injectable for tests.
    """

    def __init__(
        self,
        max_retries: int = 3,
        base_delay: float = 1.0,
        max_delay: float = 30.0,
        backoff_multiplier: float = 2.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.max_retries = max_retries
        self.base_delay = base_delay
        self.max_delay = max_delay
        self.backoff_multiplier = backoff_multiplier
        self._sleep = sleep

    def delays(self) -> Iterator[float]:
        """The wait before each retry, in order."""
        for attempt in range(self.max_retries):
            yield min(self.base_delay * self.backoff_multiplier ** attempt, self.max_delay)

    def execute(self, func: Callable, *args, **kwargs) -> Any:
        """
        Run `func(*args, **kwargs)` under the policy.

        Raises:
            The original exception when it is not retryable
            RetryExhaustedError: the last retryable failure, chained as __cause__
        """
        waits: List[float] = list(self.delays())
        attempts = len(waits) + 1
        for attempt in range(attempts):
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                category, retryable = categorize_error(e)
                if not retryable:
                    raise
                context = LogContext(operation="retry", extra_data={
                    "attempt": f"{attempt + 1}/{attempts}", "category": category.value,
                })
                if attempt == attempts - 1:
                    logger.error(f"Giving up: {e}", context)
                    raise RetryExhaustedError(f"Failed after {attempts} attempts. Last error: {e}") from e
                logger.warning(f"Transient failure, retrying in {waits[attempt]:.1f}s: {e}", context)
                self._sleep(waits[attempt])
            else:
                if attempt:
                    logger.info(f"Succeeded after {attempt} retries", LogContext(operation="retry"))
                return result
