"""
Document I/O: JSON/YAML loading, atomic writes and schema validation.
"""
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

import yaml
from jsonschema import ValidationError, validate

from utils.errors import DataError, SchemaError
from utils.logger import Logger
from utils.schemas import SCHEMA_VERSION

logger = Logger.get_logger(__name__)

PathLike = Union[str, Path]


class DataManager:
    """Read and write the pipeline's JSON/YAML documents."""

    @staticmethod
    def load_json(file_path: PathLike) -> Any:
        """
        Load data from JSON file.

        Args:
            file_path: Path to JSON file

        Returns:
            Parsed JSON document

        Raises:
            DataError: If the file is missing or not valid JSON
        """
        logger.debug(f"Loading JSON data from: {file_path}")
        try:
            with open(file_path, "r") as file:
                return json.load(file)
        except FileNotFoundError as e:
            raise DataError(f"file not found: {file_path}") from e
        except json.JSONDecodeError as e:
            raise DataError(f"malformed JSON in {file_path}: {e}") from e

    @staticmethod
    def load_yaml(file_path: PathLike) -> Any:
        """
        Load data from YAML file.

        Args:
            file_path: Path to YAML file

        Returns:
            Parsed YAML document
        """
        logger.debug(f"Loading YAML data from: {file_path}")
        try:
            with open(file_path, "r") as file:
                return yaml.safe_load(file)
        except FileNotFoundError as e:
            raise DataError(f"file not found: {file_path}") from e
        except yaml.YAMLError as e:
            raise DataError(f"malformed YAML in {file_path}: {e}") from e

    @classmethod
    def load_document(cls, file_path: PathLike) -> Any:
        """Load JSON, or YAML when the suffix is .yaml/.yml."""
        if Path(file_path).suffix.lower() in (".yaml", ".yml"):
            return cls.load_yaml(file_path)
        return cls.load_json(file_path)

    @staticmethod
    @contextmanager
    def atomic_path(file_path: PathLike) -> Iterator[Path]:
        """
        Yield a temporary path next to ``file_path``; on success it replaces the target.

        Args:
            file_path: Final destination

        Yields:
            Temporary file path to write to
        """
        target = Path(file_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
        os.close(fd)
        tmp_path = Path(tmp_name)
        try:
            yield tmp_path
            os.replace(tmp_path, target)
        finally:
            if tmp_path.exists():
                tmp_path.unlink()

    @classmethod
    def write_text(cls, text: str, file_path: PathLike) -> None:
        """Write text atomically."""
        with cls.atomic_path(file_path) as tmp:
            tmp.write_text(text)
        logger.debug(f"Wrote {file_path}")

    @classmethod
    def save_json(cls, data: Dict[str, Any], file_path: PathLike) -> None:
        """
        Save data to JSON file atomically.

        Floats are written with Python's shortest round-trip representation.

        Args:
            data: Dictionary to save
            file_path: Path to save JSON file
        """
        logger.info(f"Saving JSON data to: {file_path}")
        cls.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n", file_path)

    @staticmethod
    def validate(document: Any, schema: Dict[str, Any], what: str,
                 expected_version: Optional[int] = SCHEMA_VERSION) -> None:
        """
        Validate a document against its JSON schema and schema_version.

        Required-ness of schema_version is left to the schema itself.

        Args:
            document: Parsed document
            schema: JSON schema
            what: Human readable document kind for error messages
            expected_version: Required schema_version, or None to skip the check

        Raises:
            SchemaError: If validation fails
        """
        try:
            validate(instance=document, schema=schema)
        except ValidationError as e:
            logger.error(f"{what} failed schema validation: {e.message}")
            raise SchemaError(f"{what} failed schema validation: {e.message}") from e

        if expected_version is not None and "schema_version" in document:
            version = document["schema_version"]
            if version != expected_version:
                raise SchemaError(
                    f"{what} has schema_version {version!r}, expected {expected_version}"
                )
