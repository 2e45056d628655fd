"""
Test cases for RetryPolicy functionality.
"""
import pytest
from unittest.mock import Mock

from src.common.error_categorization import DataError, NetworkError
from src.common.retry_policy import RetryExhaustedError, RetryPolicy


class TestRetryPolicy:
    """Test suite for RetryPolicy class."""

    def setup_method(self):
        self.sleep = Mock()

    def test_retry_policy_initialization(self):
        """Test that RetryPolicy initializes with correct defaults."""
        policy = RetryPolicy()
        assert policy.max_retries == 3
        assert policy.base_delay == 1.0
        assert policy.max_delay == 30.0
        assert policy.backoff_multiplier == 2.0

    def test_retry_succeeds_on_first_attempt(self):
        """Test that successful functions execute without retry."""
        policy = RetryPolicy(sleep=self.sleep)
        mock_func = Mock(return_value="success")

        assert policy.execute(mock_func) == "success"
        assert mock_func.call_count == 1
        self.sleep.assert_not_called()

    def test_retry_succeeds_after_transient_failure(self):
        """Test that network errors are retried until success."""
        policy = RetryPolicy(max_retries=3, sleep=self.sleep)
        mock_func = Mock(side_effect=[
            NetworkError("Server error 503"),
            ConnectionResetError("connection reset"),
            b"payload",
        ])

        assert policy.execute(mock_func) == b"payload"
        assert mock_func.call_count == 3
        assert self.sleep.call_count == 2

    def test_non_retryable_error_is_raised_immediately(self):
        """Test that data errors are never retried."""
        policy = RetryPolicy(max_retries=3, sleep=self.sleep)
        mock_func = Mock(side_effect=DataError("checksum mismatch"))

        with pytest.raises(DataError, match="checksum mismatch"):
            policy.execute(mock_func)
        assert mock_func.call_count == 1
        self.sleep.assert_not_called()

    def test_retry_exhausted_raises(self):
        """Test that persistent transient errors exhaust the policy."""
        policy = RetryPolicy(max_retries=2, sleep=self.sleep)
        mock_func = Mock(side_effect=NetworkError("down"))

        with pytest.raises(RetryExhaustedError) as excinfo:
            policy.execute(mock_func)
        assert mock_func.call_count == 3
        assert isinstance(excinfo.value.__cause__, NetworkError)

    def test_exponential_backoff_is_capped(self):
        """Test delays grow geometrically and stop at max_delay."""
        policy = RetryPolicy(max_retries=4, base_delay=1.0, max_delay=5.0,
                             backoff_multiplier=2.0, sleep=self.sleep)
        mock_func = Mock(side_effect=NetworkError("down"))

        with pytest.raises(RetryExhaustedError):
            policy.execute(mock_func)
        delays = [call.args[0] for call in self.sleep.call_args_list]
        assert delays == [1.0, 2.0, 4.0, 5.0]

    def test_delay_schedule(self):
        """Test the wait list has one entry per retry."""
        policy = RetryPolicy(max_retries=3, base_delay=0.5, backoff_multiplier=3.0)
        assert list(policy.delays()) == [0.5, 1.5, 4.5]
        assert list(RetryPolicy(max_retries=0).delays()) == []

    def test_arguments_are_forwarded(self):
        """Test that positional and keyword arguments reach the function."""
        policy = RetryPolicy(sleep=self.sleep)
        mock_func = Mock(return_value=1)
        policy.execute(mock_func, "url", timeout=3)
        mock_func.assert_called_once_with("url", timeout=3)
