# decoherence_lab/report_collector.py

import logging
import os
import time
import traceback
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from .errors import OutputWriteError

PHASES = ("setup", "simulation", "output")


class WarningCollector(logging.Handler):
    """Keeps every WARNING-or-worse record emitted while attached."""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: List[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(f"{record.name}: {record.getMessage()}")


class RunReport:
    """Collects run data (phases, outputs, summary numbers, warnings, errors) for metadata.txt."""

    def __init__(self, scenario: str, parameters: Dict[str, Any]):
        self.report: Dict[str, Any] = {
            "status": "in_progress",
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "scenario": scenario,
            "parameters": parameters,
            "execution_phases": {name: {"status": "not_started", "duration_ms": 0} for name in PHASES},
            "outputs": [],
            "summary": {},
            "warnings": [],
            "errors": [],
            "performance_metrics": {"total_duration_ms": 0},
        }
        self.start_time = time.time()
        self.phase_start_times: Dict[str, float] = {}

    def start_phase(self, phase_name: str):
        self.phase_start_times[phase_name] = time.time()
        self.report["execution_phases"][phase_name]["status"] = "in_progress"

    def complete_phase(self, phase_name: str, success: bool = True):
        if phase_name in self.phase_start_times:
            duration = (time.time() - self.phase_start_times[phase_name]) * 1000
            self.report["execution_phases"][phase_name]["duration_ms"] = int(duration)
        self.report["execution_phases"][phase_name]["status"] = "success" if success else "failure"

    def add_error(self, phase: str, error_type: str, message: str, exception: Optional[Exception] = None):
        entry = {"phase": phase, "error_type": error_type, "message": message}
        if exception:
            entry["traceback"] = "".join(traceback.format_exception(type(exception), exception, exception.__traceback__))
        self.report["errors"].append(entry)

    def add_output(self, path: str):
        self.report["outputs"].append(path)

    def add_summary(self, key: str, value: Any):
        self.report["summary"][key] = value

    def set_warnings(self, messages: List[str]):
        self.report["warnings"] = list(messages)

    def add_metric(self, key: str, value: Any):
        self.report["performance_metrics"][key] = value

    @property
    def outputs(self) -> List[str]:
        return list(self.report["outputs"])

    def finalize(self, success: bool) -> Dict[str, Any]:
        self.report["status"] = "success" if success else "failure"
        self.report["performance_metrics"]["total_duration_ms"] = int((time.time() - self.start_time) * 1000)
        self.report["completion_timestamp"] = datetime.now(timezone.utc).isoformat()
        return self.report

    def flatten(self) -> Dict[str, str]:
        """Dotted keys -> printable values; lists are indexed."""
        flat: Dict[str, str] = {}

        def walk(prefix: str, value: Any):
            if isinstance(value, dict):
                for key, item in value.items():
                    walk(f"{prefix}.{key}" if prefix else str(key), item)
            elif isinstance(value, (list, tuple)):
                if not value:
                    flat[prefix] = "[]"
                for i, item in enumerate(value):
                    walk(f"{prefix}.{i}", item)
            elif isinstance(value, float):
                flat[prefix] = f"{value:.12g}"
            else:
                flat[prefix] = str(value).replace("\n", "\\n")

        walk("", self.report)
        return flat

    def write_metadata(self, path: str) -> str:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                for key, value in sorted(self.flatten().items()):
                    f.write(f"{key} = {value}\n")
        except OSError as e:
            raise OutputWriteError(f"Cannot write run metadata to {path}: {e}") from e
        return os.path.basename(path)
