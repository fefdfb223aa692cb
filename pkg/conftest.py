"""
Pytest configuration and fixtures for the crowd anomaly test suite.
"""
import os
from datetime import datetime
from pathlib import Path

import allure
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from config.config import Config
from config.pipeline_config import PipelineConfig
from utils.logger import Logger
from tests.soft_assert import SoftAssert
from video.cubes import CubeSpec
from video.frame_io import FrameSequence, write_frame_sequence
from video.synthetic import SyntheticConfig, generate_synthetic_sequence

logger = Logger.get_logger(__name__)

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.register_profile("ci", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

# Track test execution statistics
test_stats = {
    "total": 0,
    "passed": 0,
    "failed": 0,
    "skipped": 0,
    "start_time": None,
    "end_time": None
}

SCENE_SEED = 7


@pytest.fixture(scope="session")
def config():
    """Provide configuration object."""
    return Config()


@pytest.fixture(scope="session")
def pipeline_config() -> PipelineConfig:
    """Configuration resolved from the environment with no flags or file."""
    return PipelineConfig.resolve()


@pytest.fixture(scope="function")
def soft_assert() -> SoftAssert:
    """
    Create soft assertion instance.

    Returns:
        SoftAssert instance
    """
    return SoftAssert()


@pytest.fixture(scope="function")
def rng() -> np.random.Generator:
    """Seeded generator so numeric tests are repeatable."""
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def scene_config() -> SyntheticConfig:
    """Default synthetic scene."""
    return SyntheticConfig()


@pytest.fixture(scope="session")
def scene(scene_config):
    """(frames, labels) of the default scene at the default seed."""
    return generate_synthetic_sequence(scene_config, SCENE_SEED)


@pytest.fixture(scope="session")
def small_scene_config() -> SyntheticConfig:
    """Reduced scene for fast end-to-end tests."""
    return SyntheticConfig(width=32, height=32, n_particles=30, n_frames=32, dispersal_frame=16)


@pytest.fixture(scope="session")
def small_cube() -> CubeSpec:
    return CubeSpec(p=8, q=8)


@pytest.fixture(scope="function")
def frame_dir(tmp_path):
    """
    Factory writing a FrameSequence to a fresh directory.

    Returns:
        Callable (frames array, name) -> directory path
    """
    def _write(frames: np.ndarray, name: str = "frames") -> Path:
        directory = tmp_path / name
        write_frame_sequence(FrameSequence(frames), directory)
        return directory

    return _write


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """
    Hook to record results and attach the failure text to the allure report.
    """
    outcome = yield
    report = outcome.get_result()

    if report.when == "call":
        # Update test statistics
        if report.failed:
            test_stats["failed"] += 1
            logger.error(f"Test FAILED: {item.nodeid}")
            allure.attach(
                str(report.longrepr),
                name=f"Failure - {item.name}",
                attachment_type=allure.attachment_type.TEXT
            )

        elif report.passed:
            test_stats["passed"] += 1
            logger.info(f"Test PASSED: {item.nodeid}")

        elif report.skipped:
            test_stats["skipped"] += 1
            logger.warning(f"Test SKIPPED: {item.nodeid}")


@pytest.fixture(autouse=True)
def test_metadata(request):
    """Add test metadata to Allure report."""
    # Add markers as labels
    for marker in request.node.iter_markers():
        allure.dynamic.label(marker.name, marker.name)


def pytest_configure(config):
    """Configure pytest with custom settings."""
    # Create necessary directories
    Path("reports/allure-results").mkdir(parents=True, exist_ok=True)
    Path("reports/html-report").mkdir(parents=True, exist_ok=True)
    Config.LOG_DIR.mkdir(parents=True, exist_ok=True)

    # Initialize test statistics
    test_stats["start_time"] = datetime.now()
    test_stats["total"] = 0
    test_stats["passed"] = 0
    test_stats["failed"] = 0
    test_stats["skipped"] = 0

    logger.info("Test execution started")
    Config.display_config()


def pytest_collection_modifyitems(items):
    """Hook to modify test collection."""
    test_stats["total"] = len(items)
    logger.info(f"Collected {len(items)} tests")


def pytest_sessionfinish(session, exitstatus):
    """Hook called after whole test run finished."""
    test_stats["end_time"] = datetime.now()
    start = test_stats["start_time"] or test_stats["end_time"]
    duration = (test_stats["end_time"] - start).total_seconds()

    logger.info(f"Test execution finished with status: {exitstatus}")
    logger.info(f"Total: {test_stats['total']}, "
                f"Passed: {test_stats['passed']}, "
                f"Failed: {test_stats['failed']}, "
                f"Skipped: {test_stats['skipped']}")
    logger.info(f"Duration: {duration:.2f} seconds")
