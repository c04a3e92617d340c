from pathlib import Path
from typing import Optional

import requests
from dagster import ConfigurableResource, get_dagster_logger

from liquid_delegation.errors import InvalidInputError


class InputSourceResource(ConfigurableResource):
    """Reads profile, CNF, points and script documents from local paths or http(s) URLs."""

    base_dir: str = "."
    timeout: float = 30.0
    token: Optional[str] = None

    @property
    def headers(self):
        if not self.token:
            return {}
        return {"Authorization": f"Bearer {self.token}"}

    def read_text(self, location: str) -> str:
        if location.startswith(("http://", "https://")):
            return self._fetch(location)
        path = Path(location)
        if not path.is_absolute():
            path = Path(self.base_dir) / path
        try:
            return path.read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidInputError(f"cannot read {path}: {e}") from e

    def _fetch(self, url: str) -> str:
        try:
            with requests.Session() as session:
                session.headers.update(self.headers)
                response = session.get(url, timeout=self.timeout)
                response.raise_for_status()
        except requests.exceptions.RequestException as e:
            get_dagster_logger().error(f"Error fetching {url}: {e}")
            raise InvalidInputError(f"cannot fetch {url}: {e}") from e
        get_dagster_logger().info(f"Fetched {len(response.text)} characters from {url}")
        return response.text
