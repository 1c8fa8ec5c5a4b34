"""
Termination Database Miner - Event System
Notes emitted by mining, search and extension.

Decouples the engine from its reporting: the CLI subscribes and prints,
tests inspect the history.
"""

from typing import Any, Callable, Dict, List
from dataclasses import dataclass, field


# ─── Event Types ─────────────────────────────────────────────────────

class EventType:
    """Well-known event names."""

    # Mining
    DEFINITION_ACCEPTED = "definition_accepted"
    DEFINITION_REJECTED = "definition_rejected"
    ENTRY_ADDED = "entry_added"
    ENTRY_SKIPPED = "entry_skipped"
    ENTRY_REPLACED = "entry_replaced"

    # Search
    PASS_STARTED = "pass_started"
    PASS_FAILED = "pass_failed"
    SCHEMES_USED = "schemes_used"
    BOOK_REQUIRED = "book_required"
    FALLBACK_USED = "fallback_used"
    NO_MATCH = "no_match"

    # Extension
    DATABASE_EXTENDED = "database_extended"


@dataclass
class Event:
    """A single event instance."""
    type: str
    data: Dict[str, Any] = field(default_factory=dict)
    source: str = ""


# ─── Event Bus ───────────────────────────────────────────────────────

class EventBus:
    """
    Simple pub/sub event bus.

    Usage:
        bus = EventBus()
        bus.subscribe(EventType.SCHEMES_USED, print_note)
        bus.emit(Event(EventType.SCHEMES_USED, {"names": ["evens"]}))
    """

    def __init__(self):
        self._listeners: Dict[str, List[Callable[[Event], None]]] = {}
        self._history: List[Event] = []

    def subscribe(self, event_type: str, handler: Callable[[Event], None]):
        self._listeners.setdefault(event_type, []).append(handler)

    def emit(self, event: Event):
        self._history.append(event)
        for handler in self._listeners.get(event.type, []):
            handler(event)

    def of_type(self, event_type: str) -> List[Event]:
        return [e for e in self._history if e.type == event_type]

    @property
    def history(self) -> List[Event]:
        return list(self._history)
