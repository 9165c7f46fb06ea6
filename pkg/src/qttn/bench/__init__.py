"""Benchmark harness: configuration files, records, reports and the command line."""

from .config import BenchConfig, ConfigError, expand_grid, parse_config
from .records import BenchmarkRecord, execute, read_records
from .report import ReportRow, build_report

__all__ = ["BenchConfig", "ConfigError", "expand_grid", "parse_config", "BenchmarkRecord", "execute",
           "read_records", "ReportRow", "build_report"]
