"""File system service for reading inputs and writing experiment artifacts."""

import logging
import os
import shutil
import tempfile
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Set

from ..utils.path_utils import normalize_path

logger = logging.getLogger(__name__)


class FileSystemService(ABC):
    """Base class for file system operations."""

    @abstractmethod
    def create_directory(self, path: str) -> bool:
        """Create a directory and its parents.

        Args:
            path: Directory path to create

        Returns:
            bool: True if successful
        """
        pass

    @abstractmethod
    def write_file(self, path: str, content: str) -> bool:
        """Write text to a file atomically, creating parent directories.

        Readers never observe a partially written file.

        Args:
            path: File path to write to
            content: Text content

        Returns:
            bool: True if successful
        """
        pass

    @abstractmethod
    def read_file(self, path: str) -> str:
        """Read text from a file.

        Args:
            path: File path to read from

        Returns:
            str: File content

        Raises:
            FileNotFoundError: If the file does not exist
        """
        pass

    @abstractmethod
    def check_permissions(self, path: str) -> bool:
        """Check read/write access to a path, or to its nearest existing parent.

        Args:
            path: Path to check

        Returns:
            bool: True if we have read/write access
        """
        pass

    @abstractmethod
    def delete(self, path: str) -> bool:
        """Delete a file or directory tree.

        Args:
            path: Path to delete

        Returns:
            bool: True if successful
        """
        pass

    @abstractmethod
    def exists(self, path: str) -> bool:
        pass

    @abstractmethod
    def is_file(self, path: str) -> bool:
        pass

    @abstractmethod
    def is_directory(self, path: str) -> bool:
        pass

    @abstractmethod
    def list_files(self, directory: str, recursive: bool = False) -> List[str]:
        """List files in a directory, sorted, with forward slashes.

        Args:
            directory: Directory to list files from
            recursive: Whether to descend into subdirectories

        Returns:
            List[str]: File paths
        """
        pass

    @abstractmethod
    def list_directories(self, directory: str) -> List[str]:
        """List the immediate subdirectories of a directory, sorted.

        Args:
            directory: Directory to inspect

        Returns:
            List[str]: Subdirectory paths
        """
        pass


class RealFileSystemService(FileSystemService):
    """Real file system implementation."""

    def create_directory(self, path: str) -> bool:
        try:
            os.makedirs(path, exist_ok=True)
            return True
        except OSError as e:
            logger.error(f"Cannot create directory {path}: {e}")
            return False

    def write_file(self, path: str, content: str) -> bool:
        parent = os.path.dirname(path) or "."
        if not self.create_directory(parent):
            return False
        handle, temp_path = tempfile.mkstemp(
            prefix=f".{os.path.basename(path)}.", suffix=".tmp", dir=parent
        )
        try:
            with os.fdopen(handle, "w", encoding="utf-8", newline="") as f:
                f.write(content)
            os.replace(temp_path, path)
            return True
        except OSError as e:
            logger.error(f"Cannot write {path}: {e}")
            try:
                os.remove(temp_path)
            except OSError:
                pass
            return False

    def read_file(self, path: str) -> str:
        if not os.path.isfile(path):
            raise FileNotFoundError(f"File not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return f.read()

    def check_permissions(self, path: str) -> bool:
        path = os.path.abspath(path)
        while not os.path.exists(path):
            parent = os.path.dirname(path)
            if parent == path:
                return False
            path = parent
        return os.access(path, os.R_OK | os.W_OK)

    def delete(self, path: str) -> bool:
        try:
            if os.path.isfile(path):
                os.remove(path)
            elif os.path.isdir(path):
                shutil.rmtree(path)
            return True
        except OSError as e:
            logger.error(f"Cannot delete {path}: {e}")
            return False

    def exists(self, path: str) -> bool:
        return os.path.exists(path)

    def is_file(self, path: str) -> bool:
        return os.path.isfile(path)

    def is_directory(self, path: str) -> bool:
        return os.path.isdir(path)

    def list_files(self, directory: str, recursive: bool = False) -> List[str]:
        files = []
        try:
            if recursive:
                for root, _, filenames in os.walk(directory):
                    files.extend(normalize_path(os.path.join(root, name)) for name in filenames)
            else:
                for entry in os.listdir(directory):
                    path = os.path.join(directory, entry)
                    if os.path.isfile(path):
                        files.append(normalize_path(path))
        except OSError as e:
            logger.warning(f"Error listing files in {directory}: {e}")
        return sorted(files)

    def list_directories(self, directory: str) -> List[str]:
        try:
            entries = os.listdir(directory)
        except OSError as e:
            logger.warning(f"Error listing directories in {directory}: {e}")
            return []
        return sorted(
            normalize_path(os.path.join(directory, entry))
            for entry in entries
            if os.path.isdir(os.path.join(directory, entry))
        )


class MockFileSystemService(FileSystemService):
    """In-memory file system for tests."""

    def __init__(self) -> None:
        self._files: Dict[str, str] = {}
        self._directories: Set[str] = set()
        self._read_only: Set[str] = set()

    @staticmethod
    def _key(path: str) -> str:
        return normalize_path(os.path.normpath(path))

    def _add_parents(self, path: str) -> None:
        parent = os.path.dirname(path)
        while parent and parent not in self._directories:
            self._directories.add(parent)
            parent = os.path.dirname(parent)

    def create_directory(self, path: str) -> bool:
        key = self._key(path)
        if self._blocked(key):
            return False
        self._directories.add(key)
        self._add_parents(key)
        return True

    def write_file(self, path: str, content: str) -> bool:
        key = self._key(path)
        if self._blocked(key):
            return False
        self._files[key] = content
        self._add_parents(key)
        return True

    def read_file(self, path: str) -> str:
        key = self._key(path)
        if key not in self._files:
            raise FileNotFoundError(f"File not found: {path}")
        return self._files[key]

    def set_read_only(self, path: str) -> None:
        """Refuse writes at ``path`` and below."""
        self._read_only.add(self._key(path))

    def _blocked(self, key: str) -> bool:
        return any(key == root or key.startswith(root + "/") for root in self._read_only)

    def check_permissions(self, path: str) -> bool:
        return not self._blocked(self._key(path))

    def delete(self, path: str) -> bool:
        key = self._key(path)
        if key in self._files:
            del self._files[key]
            return True
        if key in self._directories:
            prefix = key + "/"
            self._files = {p: c for p, c in self._files.items() if not p.startswith(prefix)}
            self._directories = {
                d for d in self._directories if d != key and not d.startswith(prefix)
            }
            return True
        return False

    def exists(self, path: str) -> bool:
        key = self._key(path)
        return key in self._files or key in self._directories

    def is_file(self, path: str) -> bool:
        return self._key(path) in self._files

    def is_directory(self, path: str) -> bool:
        return self._key(path) in self._directories

    def list_files(self, directory: str, recursive: bool = False) -> List[str]:
        key = self._key(directory)
        if recursive:
            return sorted(p for p in self._files if p.startswith(key + "/"))
        return sorted(p for p in self._files if os.path.dirname(p) == key)

    def list_directories(self, directory: str) -> List[str]:
        key = self._key(directory)
        return sorted(d for d in self._directories if os.path.dirname(d) == key)

    @property
    def files(self) -> Dict[str, str]:
        """Snapshot of every stored file keyed by normalized path."""
        return dict(self._files)


def default_fs_service(fs_service: Optional[FileSystemService] = None) -> FileSystemService:
    return fs_service if fs_service is not None else RealFileSystemService()
