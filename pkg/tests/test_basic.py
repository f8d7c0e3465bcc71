"""
Basic tests for Waveguide Imaging.

These tests verify that the package can be imported and basic functionality works.
"""

import pytest


def test_package_import():
    """Test that the main package can be imported."""
    import waveguide_imaging
    # Test that version is defined and is a string
    assert hasattr(waveguide_imaging, '__version__')
    assert isinstance(waveguide_imaging.__version__, str)
    assert len(waveguide_imaging.__version__) > 0
    assert waveguide_imaging.__author__ == "Patroclo Picchiaduro"


def test_main_function_exists():
    """Test that the main function exists and is callable."""
    from waveguide_imaging import main
    assert callable(main)


def test_version_utilities():
    """Version helpers agree with the package metadata."""
    import waveguide_imaging
    from waveguide_imaging.utils import get_version, get_version_info, get_full_version_string

    assert get_version() == waveguide_imaging.__version__
    assert get_version_info()["author"] == "Patroclo Picchiaduro"
    assert get_full_version_string().endswith(waveguide_imaging.__version__)


def test_logger_names():
    """Module loggers live under the package root logger."""
    from waveguide_imaging.utils import get_logger

    logger = get_logger("test")
    assert logger is not None
    assert logger.name == "waveguide_imaging.test"


def test_settings_from_environment(monkeypatch):
    """WGI_THREADS caps the worker count; bad values fall back to the default."""
    from waveguide_imaging.utils import get_settings, worker_count

    monkeypatch.setenv("WGI_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(1) == 1
    monkeypatch.setenv("WGI_THREADS", "zero")
    with pytest.warns(UserWarning):
        settings = get_settings()
    assert settings.threads >= 1
    monkeypatch.setenv("WGI_MEMORY_BUDGET_GIB", "0.5")
    assert get_settings().memory_budget_bytes == 512 * 1024 ** 2


def test_map_row_blocks_is_thread_independent(monkeypatch):
    """Block results come back in block order for any worker count."""
    from waveguide_imaging.utils import map_row_blocks

    one = map_row_blocks(lambda a, b: (a, b), 10, 3, threads=1)
    many = map_row_blocks(lambda a, b: (a, b), 10, 3, threads=4)
    assert one == many == [(0, 3), (3, 6), (6, 9), (9, 10)]


def test_validators():
    """Basic validator functionality."""
    from waveguide_imaging.utils import NumericValidator, ValidationError

    assert NumericValidator.require_positive("2.5", "pitch") == 2.5
    with pytest.raises(ValidationError):
        NumericValidator.require_positive(0, "pitch")
    with pytest.raises(ValidationError):
        NumericValidator.require_finite([1.0, float("nan")], "values")
    with pytest.raises(ValidationError):
        NumericValidator.require_fraction(1.0, "fraction")


def test_output_dir_validation(tmp_path):
    """Output directories are created on demand; files are rejected."""
    from waveguide_imaging.utils import ValidationError, validate_output_dir

    target = tmp_path / "a" / "b"
    assert validate_output_dir(str(target)) == str(target.resolve())
    assert target.is_dir()
    file_path = tmp_path / "file.txt"
    file_path.write_text("x")
    with pytest.raises(ValidationError):
        validate_output_dir(str(file_path))


def test_exceptions():
    """Custom exceptions carry details and CLI exit codes."""
    from waveguide_imaging.utils.exceptions import (
        ValidationError, ConfigurationError, DivergenceError, MemoryBudgetError,
        PipelineStageError, SystemLimitError, WaveguideImagingError,
    )

    with pytest.raises(ValidationError):
        raise ValidationError("Test validation error")

    error = ConfigurationError("bad file", {"file": "x.json"})
    assert error.details == {"file": "x.json"}
    assert "x.json" in str(error)
    assert error.exit_code == 1
    assert DivergenceError("grows").exit_code == 2
    assert issubclass(MemoryBudgetError, SystemLimitError)

    wrapped = PipelineStageError("l1", DivergenceError("grows"))
    assert isinstance(wrapped, WaveguideImagingError)
    assert wrapped.exit_code == 2
    assert "l1" in str(wrapped)
