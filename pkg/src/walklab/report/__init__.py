"""JSON reports and CSV series."""

from .csv_out import write_csv, write_dict_csv
from .json_out import (
    SCHEMA_VERSION,
    STATUS_DIAGNOSTIC_FAILURE,
    STATUS_ERROR,
    STATUS_OK,
    build_report,
    dumps_report,
    read_report,
    strip_wall_clock,
    to_jsonable,
    write_report,
)

__all__ = [
    "write_csv",
    "write_dict_csv",
    "SCHEMA_VERSION",
    "STATUS_DIAGNOSTIC_FAILURE",
    "STATUS_ERROR",
    "STATUS_OK",
    "build_report",
    "dumps_report",
    "read_report",
    "strip_wall_clock",
    "to_jsonable",
    "write_report",
]
