"""Unit tests for file utilities."""

import os
import tempfile
from pathlib import Path

import pytest

from dcaport.utils.file_utils import (
    compute_file_hash,
    ensure_parent_dir,
    read_text_file,
    validate_file_path,
)
from dcaport.utils.exceptions import FileAccessError


class TestFileUtils:
    """Test cases for file utility functions."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.test_file = Path(self.temp_dir) / "test.txt"
        self.test_content = "This is test content for hashing.\n"
        self.test_file.write_text(self.test_content)

    def teardown_method(self):
        """Clean up test fixtures."""
        for root, dirs, files in os.walk(self.temp_dir, topdown=False):
            for name in files:
                os.remove(os.path.join(root, name))
            for name in dirs:
                os.rmdir(os.path.join(root, name))
        os.rmdir(self.temp_dir)

    def test_validate_file_path_success(self):
        """Test successful file path validation."""
        result = validate_file_path(str(self.test_file))
        assert result.exists()
        assert result.is_file()

    def test_validate_file_path_not_exists(self):
        """Test validation of non-existent file."""
        with pytest.raises(FileAccessError):
            validate_file_path("/nonexistent/path/file.txt")

    def test_validate_file_path_is_directory(self):
        """Test validation fails for directory."""
        with pytest.raises(FileAccessError):
            validate_file_path(self.temp_dir)

    def test_read_text_file(self):
        """Test reading a text file."""
        assert read_text_file(self.test_file) == self.test_content

    def test_read_text_file_too_large(self):
        """Test size limit enforcement."""
        with pytest.raises(FileAccessError, match="too large"):
            read_text_file(self.test_file, max_size=4)

    def test_compute_file_hash_sha256(self):
        """Test SHA256 hash computation."""
        hash_value = compute_file_hash(self.test_file, 'sha256')
        assert len(hash_value) == 64
        assert hash_value == compute_file_hash(self.test_file)

    def test_compute_file_hash_changes_with_content(self):
        """Test that the digest identifies the content."""
        before = compute_file_hash(self.test_file)
        self.test_file.write_text("other content\n")
        assert compute_file_hash(self.test_file) != before

    def test_compute_file_hash_invalid_algorithm(self):
        """Test hash computation with invalid algorithm."""
        with pytest.raises(ValueError):
            compute_file_hash(self.test_file, 'invalid_algo')

    def test_ensure_parent_dir(self):
        """Test creation of missing parent directories."""
        target = Path(self.temp_dir) / "a" / "b" / "out.txt"
        result = ensure_parent_dir(target)
        assert result == target
        assert target.parent.is_dir()
