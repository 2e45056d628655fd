"""
Downloads raw dataset files named by manifests and verifies their SHA-256.
"""
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import requests

from src.common.error_categorization import DataError, NetworkError
from src.common.retry_policy import RetryPolicy
from src.common.structured_logging import LogContext, get_structured_logger
from src.data.manifest import DatasetManifest

logger = get_structured_logger(__name__)

DEFAULT_TIMEOUT = 30.0
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class FetchResult:
    name: str
    path: Path
    sha256: str
    verified: Optional[bool]  # None when the manifest carries no checksum
    downloaded: bool


def file_sha256(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _check_digest(manifest: DatasetManifest, digest: str) -> Optional[bool]:
    if not manifest.sha256:
        return None
    return digest.lower() == manifest.sha256.lower()


class DatasetFetcher:
    """
    Fetches manifest URLs with requests, retrying transient failures.

    Server errors (5xx) and connection problems are retried; client errors
    (4xx) and checksum mismatches are not.
    """

    def __init__(
        self,
        session: Optional[requests.Session] = None,
        retry_policy: Optional[RetryPolicy] = None,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self.session = session or requests.Session()
        self.retry_policy = retry_policy or RetryPolicy(max_retries=3, base_delay=1.0)
        self.timeout = timeout

    def _download(self, url: str) -> bytes:
        try:
            response = self.session.get(url, timeout=self.timeout)
        except requests.RequestException as e:
            raise NetworkError(f"Request to {url} failed: {e}", details={"url": url}) from e
        if response.status_code >= 500:
            raise NetworkError(
                f"Server error {response.status_code} for {url}",
                details={"url": url, "status": response.status_code},
            )
        if response.status_code >= 400:
            raise DataError(f"Dataset not available at {url} (HTTP {response.status_code})")
        return response.content

    def fetch(self, manifest: DatasetManifest, force: bool = False) -> FetchResult:
        """
        Make sure the manifest's file exists locally and matches its checksum.

        An existing file is kept unless `force` is set or its checksum is wrong.

        Raises:
            DataError: no URL to download from, HTTP 4xx or checksum mismatch
            RetryExhaustedError: transient failures outlasted the retry policy
        """
        path = manifest.resolved_path()
        context = LogContext(dataset=manifest.name, operation="fetch")

        if path.is_file() and not force:
            digest = file_sha256(path)
            verified = _check_digest(manifest, digest)
            if verified is not False:
                logger.info("Dataset already present", context)
                return FetchResult(manifest.name, path, digest, verified, downloaded=False)
            logger.warning("Local file checksum mismatch, downloading again", context)

        if not manifest.url:
            raise DataError(f"Manifest '{manifest.name}' has no url and {path} is missing or invalid")

        payload = self.retry_policy.execute(self._download, manifest.url)
        digest = hashlib.sha256(payload).hexdigest()
        verified = _check_digest(manifest, digest)
        if verified is False:
            raise DataError(
                f"Checksum mismatch for {manifest.name}: expected {manifest.sha256}, got {digest}"
            )

        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
        context.extra_data = {"bytes": len(payload), "sha256": digest}
        logger.info(f"Downloaded {manifest.url}", context)
        return FetchResult(manifest.name, path, digest, verified, downloaded=True)
