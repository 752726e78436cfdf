"""Scene library (directory of scene files) and in-memory session store."""

from __future__ import annotations

import threading
import uuid
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from .dialogue import Session
from .scene import Scene, SceneError, load_scene


class LibraryError(Exception):
    pass


class SceneLibrary:
    """Read-only collection of scenes loaded from a directory at startup."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise LibraryError(f"scene directory {self.directory} does not exist")
        self._scenes: dict[str, Scene] = {}
        for path in sorted(self.directory.glob("*.json")):
            try:
                scene = load_scene(path.read_bytes())
            except SceneError as err:
                raise LibraryError(f"invalid scene file {path}: {err}") from err
            if scene.id in self._scenes:
                raise LibraryError(f"duplicate scene id {scene.id!r} in {path}")
            self._scenes[scene.id] = scene

    def ids(self) -> list[str]:
        return sorted(self._scenes)

    def get(self, scene_id: str) -> Scene:
        return self._scenes[scene_id]

    def __contains__(self, scene_id: str) -> bool:
        return scene_id in self._scenes


class SessionStore:
    """Process-lifetime session map with per-session mutual exclusion."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self, scene: Scene) -> str:
        session_id = uuid.uuid4().hex
        with self._registry_lock:
            self._sessions[session_id] = Session(scene)
            self._locks[session_id] = threading.Lock()
        return session_id

    def __contains__(self, session_id: str) -> bool:
        with self._registry_lock:
            return session_id in self._sessions

    @contextmanager
    def locked(self, session_id: str) -> Iterator[Session]:
        with self._registry_lock:
            session = self._sessions[session_id]
            lock = self._locks[session_id]
        with lock:
            yield session
