"""Debounced live result counts emitted while the user edits the graph.

Each mutation restarts a per-session debounce timer; when it fires, one
count query runs against the session backend and the result is broadcast to
all subscribers, tagged with the graph version it was computed for. Counts
that finish after a newer mutation are discarded. Endpoint failures are
events, not errors: the session stays editable.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class FeedbackEvent:
    type: str
    version_tag: str
    count: int | None = None
    error: str | None = None

    def to_json(self) -> dict:
        out = {"type": self.type, "version_tag": self.version_tag}
        if self.count is not None:
            out["count"] = self.count
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class _SessionFeed:
    timer: threading.Timer | None = None
    latest_tag: str = ""
    subscribers: list[queue.Queue] = field(default_factory=list)
    issued_counts: int = 0


class FeedbackHub:
    """count_fn(session_id) -> (version_tag, count); raises on backend failure."""

    def __init__(self, count_fn: Callable[[str], tuple[str, int]], debounce_ms: int = 300):
        self.count_fn = count_fn
        self.default_debounce_ms = debounce_ms
        self._feeds: dict[str, _SessionFeed] = {}
        self._lock = threading.Lock()

    def _feed(self, session_id: str) -> _SessionFeed:
        with self._lock:
            if session_id not in self._feeds:
                self._feeds[session_id] = _SessionFeed()
            return self._feeds[session_id]

    def subscribe(self, session_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        feed = self._feed(session_id)
        with self._lock:
            feed.subscribers.append(q)
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        feed = self._feed(session_id)
        with self._lock:
            if q in feed.subscribers:
                feed.subscribers.remove(q)

    def issued_counts(self, session_id: str) -> int:
        return self._feed(session_id).issued_counts

    def notify(self, session_id: str, version_tag: str, debounce_ms: int | None = None) -> None:
        """Record a mutation; (re)start the debounce window."""
        feed = self._feed(session_id)
        delay = (self.default_debounce_ms if debounce_ms is None else debounce_ms) / 1000.0
        with self._lock:
            feed.latest_tag = version_tag
            if feed.timer is not None:
                feed.timer.cancel()
            feed.timer = threading.Timer(delay, self._fire, args=(session_id, version_tag))
            feed.timer.daemon = True
            feed.timer.start()

    def _fire(self, session_id: str, scheduled_tag: str) -> None:
        feed = self._feed(session_id)
        with self._lock:
            if feed.latest_tag != scheduled_tag:
                return  # a newer mutation rescheduled the window
            feed.issued_counts += 1
        try:
            version_tag, count = self.count_fn(session_id)
            event = FeedbackEvent("count", version_tag, count=count)
        except Exception as exc:
            event = FeedbackEvent("error", scheduled_tag, error=str(exc))
            version_tag = scheduled_tag
        with self._lock:
            if feed.latest_tag != scheduled_tag:
                return  # stale: a newer mutation landed while counting
            subscribers = list(feed.subscribers)
        for q in subscribers:
            q.put(event)

    def shutdown(self) -> None:
        with self._lock:
            for feed in self._feeds.values():
                if feed.timer is not None:
                    feed.timer.cancel()
