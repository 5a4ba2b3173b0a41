import time

from protoquery.feedback import FeedbackHub


class CountingBackend:
    def __init__(self):
        self.calls = 0
        self.tag = "v0"
        self.count = 0
        self.fail = False
        self.delay = 0.0

    def __call__(self, session_id: str):
        self.calls += 1
        if self.delay:
            time.sleep(self.delay)
        if self.fail:
            raise RuntimeError("endpoint down")
        return self.tag, self.count


def drain(q, timeout=2.0):
    events = []
    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            events.append(q.get(timeout=0.05))
            return events
        except Exception:
            continue
    return events


def test_two_rapid_mutations_issue_one_count():
    backend = CountingBackend()
    hub = FeedbackHub(backend, debounce_ms=80)
    q = hub.subscribe("s")
    backend.tag, backend.count = "v2", 7
    hub.notify("s", "v1")
    hub.notify("s", "v2")  # within the debounce window
    time.sleep(0.3)
    assert backend.calls == 1
    events = drain(q)
    assert len(events) == 1
    assert events[0].type == "count"
    assert events[0].count == 7
    hub.shutdown()


def test_spaced_mutations_issue_two_counts():
    backend = CountingBackend()
    hub = FeedbackHub(backend, debounce_ms=40)
    hub.subscribe("s")
    hub.notify("s", "v1")
    time.sleep(0.15)
    hub.notify("s", "v2")
    time.sleep(0.15)
    assert backend.calls == 2
    hub.shutdown()


def test_stale_count_discarded_when_mutation_lands_mid_query():
    backend = CountingBackend()
    backend.delay = 0.15
    hub = FeedbackHub(backend, debounce_ms=20)
    q = hub.subscribe("s")
    backend.tag, backend.count = "v1", 1
    hub.notify("s", "v1")
    time.sleep(0.08)  # the count for v1 is now in flight
    backend.tag, backend.count = "v2", 2
    hub.notify("s", "v2")  # lands before the in-flight count finishes
    time.sleep(0.5)
    events = []
    while not q.empty():
        events.append(q.get_nowait())
    # the in-flight v1 count was discarded; only the v2 count was emitted
    assert [(e.version_tag, e.count) for e in events] == [("v2", 2)]
    assert backend.calls == 2
    hub.shutdown()


def test_final_event_matches_final_graph():
    backend = CountingBackend()
    hub = FeedbackHub(backend, debounce_ms=30)
    q = hub.subscribe("s")
    for i in range(1, 5):
        backend.tag, backend.count = f"v{i}", i
        hub.notify("s", f"v{i}")
        time.sleep(0.01)
    time.sleep(0.3)
    events = []
    while not q.empty():
        events.append(q.get_nowait())
    assert events, "expected at least the final event"
    assert events[-1].version_tag == "v4"
    assert events[-1].count == 4
    hub.shutdown()


def test_backend_error_becomes_error_event_not_crash():
    backend = CountingBackend()
    backend.fail = True
    hub = FeedbackHub(backend, debounce_ms=20)
    q = hub.subscribe("s")
    hub.notify("s", "v1")
    time.sleep(0.2)
    events = []
    while not q.empty():
        events.append(q.get_nowait())
    assert len(events) == 1
    assert events[0].type == "error"
    assert "endpoint down" in events[0].error
    hub.shutdown()


def test_unsubscribe_stops_delivery():
    backend = CountingBackend()
    hub = FeedbackHub(backend, debounce_ms=10)
    q = hub.subscribe("s")
    hub.unsubscribe("s", q)
    hub.notify("s", "v1")
    time.sleep(0.1)
    assert q.empty()
    hub.shutdown()
