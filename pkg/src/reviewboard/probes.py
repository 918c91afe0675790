"""Paper-presence probes. Injected as a capability so tests can script outcomes."""

from __future__ import annotations

import requests


class HttpPaperProbe:
    """Checks that a paper actually exists at its URL before a review is accepted."""

    def __init__(self, timeout: float = 10.0):
        self.timeout = timeout

    def __call__(self, url: str) -> bool:
        try:
            response = requests.head(url, timeout=self.timeout, allow_redirects=True)
            if response.status_code == 405:
                response = requests.get(url, timeout=self.timeout, stream=True)
            return response.status_code < 400
        except requests.RequestException:
            return False


class FakeProbe:
    """Scripted probe: maps URL to outcome; unknown URLs use the default."""

    def __init__(self, outcomes=None, default: bool = True):
        self.outcomes = dict(outcomes or {})
        self.default = default
        self.calls: list[str] = []

    def __call__(self, url: str) -> bool:
        self.calls.append(url)
        return self.outcomes.get(url, self.default)
