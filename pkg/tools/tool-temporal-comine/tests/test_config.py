"""Tests for configuration, run context, validation and the error hierarchy."""

import logging
from decimal import Decimal

import pytest

from temporal_comine.config import RuntimeConfig
from temporal_comine.context import (
    RunContextFilter,
    get_current_run_id,
    get_current_worker,
    run_context,
    worker_context,
)
from temporal_comine.errors import (
    ComineError,
    GraphFormatError,
    GraphReadError,
    OracleGuardError,
    QueryError,
    TreeError,
)
from temporal_comine.validation import QueryValidator


class TestRuntimeConfig:
    """Tests for environment-driven configuration."""

    def test_defaults(self, monkeypatch):
        names = (
            "COMINE_INTER_INTRVL",
            "COMINE_INTRA_INTRVL",
            "COMINE_IDLE_FRAC",
            "COMINE_SM_THRESHOLD",
            "COMINE_MERGE_RUN_SIZE",
            "COMINE_LOG_LEVEL",
        )
        for name in names:
            monkeypatch.delenv(name, raising=False)
        config = RuntimeConfig.from_env()
        assert config.inter_interval == 4096
        assert config.intra_interval == 64
        assert config.idle_fraction == 0.25
        assert config.sm_threshold == 0.44
        assert config.merge_run_size == 100_000
        assert config.log_level == "WARNING"

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("COMINE_INTER_INTRVL", "512")
        monkeypatch.setenv("COMINE_IDLE_FRAC", "0.5")
        monkeypatch.setenv("COMINE_LOG_LEVEL", "debug")
        config = RuntimeConfig.from_env()
        assert config.inter_interval == 512
        assert config.idle_fraction == 0.5
        assert config.log_level == "DEBUG"

    def test_blank_variable_uses_default(self, monkeypatch):
        monkeypatch.setenv("COMINE_INTRA_INTRVL", " ")
        assert RuntimeConfig.from_env().intra_interval == 64

    def test_malformed_variable_rejected(self, monkeypatch):
        monkeypatch.setenv("COMINE_INTRA_INTRVL", "often")
        with pytest.raises(ValueError, match="COMINE_INTRA_INTRVL"):
            RuntimeConfig.from_env()

    @pytest.mark.parametrize(
        "overrides",
        [
            {"inter_interval": 0},
            {"intra_interval": -1},
            {"idle_fraction": 0.0},
            {"chunks_per_worker": 0},
            {"sm_threshold": 1.5},
            {"merge_run_size": 0},
        ],
    )
    def test_invalid_values_rejected(self, overrides):
        with pytest.raises(ValueError):
            RuntimeConfig(**overrides)

    def test_replace(self):
        config = RuntimeConfig(inter_interval=100)
        assert config.replace(inter_interval=200).inter_interval == 200
        assert config.inter_interval == 100


class TestRunContext:
    """Tests for log-correlation context variables."""

    def test_run_id_scoped_to_block(self):
        assert get_current_run_id() is None
        with run_context("abc123") as run_id:
            assert run_id == "abc123"
            assert get_current_run_id() == "abc123"
        assert get_current_run_id() is None

    def test_generated_run_ids_differ(self):
        with run_context() as first, run_context() as second:
            assert first != second
            assert get_current_run_id() == second

    def test_worker_context(self):
        with worker_context(3):
            assert get_current_worker() == 3
        assert get_current_worker() is None

    def test_filter_tags_records(self):
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "msg", None, None)
        with run_context("r1"), worker_context(2):
            assert RunContextFilter().filter(record)
        assert (record.run_id, record.worker) == ("r1", "w2")

    def test_filter_outside_run(self):
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "msg", None, None)
        RunContextFilter().filter(record)
        assert (record.run_id, record.worker) == ("-", "main")


class TestQueryValidator:
    """Tests for query parameter validation."""

    @pytest.fixture
    def validator(self):
        return QueryValidator()

    @pytest.mark.parametrize("name", ["tri", "M_3", "four-cycle", "q.1", "I", "Ix", "i1", "I1a"])
    def test_valid_names(self, validator, name):
        assert validator.validate_motif_name(f" {name} ") == name

    @pytest.mark.parametrize("name", ["", "3cycle", "a b", "x" * 65])
    def test_invalid_names(self, validator, name):
        with pytest.raises(QueryError):
            validator.validate_motif_name(name)

    @pytest.mark.parametrize("name", ["I1", "I12"])
    def test_grouping_node_labels_reserved(self, validator, name):
        with pytest.raises(QueryError, match="reserved") as exc_info:
            validator.validate_motif_name(name, 4)
        assert exc_info.value.line == 4

    def test_delta(self, validator):
        assert validator.validate_delta(" 2.5 ") == Decimal("2.5")
        with pytest.raises(QueryError, match="positive"):
            validator.validate_delta("-1")
        with pytest.raises(QueryError, match="Infinity"):
            validator.validate_delta("Infinity")

    def test_balance_accepts_hyphen(self, validator):
        assert validator.validate_balance("Context-Split") == "context_split"
        with pytest.raises(QueryError):
            validator.validate_balance("round_robin")

    def test_threads_bounds(self, validator):
        assert validator.validate_threads("8") == 8
        for bad in ("0", "many", 2000):
            with pytest.raises(QueryError):
                validator.validate_threads(bad)

    def test_motif_edges(self, validator):
        with pytest.raises(QueryError, match="too large"):
            validator.validate_motif_edges("big", [("a", "b")] * 13)
        with pytest.raises(QueryError, match="no edges"):
            validator.validate_motif_edges("none", [])

    def test_path(self, validator):
        assert validator.validate_path(" data/g.txt ") == "data/g.txt"
        with pytest.raises(QueryError):
            validator.validate_path("bad\x00path")

    def test_motif_count(self, validator):
        with pytest.raises(QueryError, match="too many"):
            validator.validate_motif_count(QueryValidator.MAX_MOTIFS + 1)


class TestErrors:
    """Tests for the exception hierarchy."""

    def test_exit_codes(self):
        assert QueryError("x").exit_code == 3
        assert GraphFormatError("x").exit_code == 4
        assert GraphReadError("x").exit_code == 4
        assert OracleGuardError("x").exit_code == 5
        assert TreeError("x").exit_code == 6

    def test_line_in_message(self):
        error = QueryError("bad", line=7)
        assert str(error) == "line 7: bad"
        assert error.line == 7
        assert isinstance(error, ComineError)
        assert isinstance(error, ValueError)
