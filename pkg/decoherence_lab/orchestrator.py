# decoherence_lab/orchestrator.py

import logging
import os
from typing import Any, Dict, Optional

from pydantic import ValidationError

from .config import ScenarioConfig, format_validation_error
from .errors import ConfigValidationError
from .logging_config import LIBRARY_LOGGER, attach_library_logging, close_run_logger, setup_run_logger
from .plugins.arrival_plugin import ArrivalPlugin
from .plugins.base import ScenarioPlugin
from .plugins.bouncer_plugin import BouncerPlugin
from .plugins.ehrenfest_plugin import EhrenfestPlugin
from .plugins.entropy_plugin import EntropyPlugin
from .plugins.interference_plugin import InterferencePlugin
from .plugins.tunnel_plugin import TunnelPlugin
from .plugins.wigner_plugin import WignerPlugin
from .report_collector import RunReport, WarningCollector
from .utils import Timer

logger = logging.getLogger(__name__)

METADATA_FILE = "metadata.txt"
LOG_FILE = "run.log"
DEFAULT_UNITS = "hbar = m = 1"
UNITS = {
    "bouncer": "natural: length (hbar^2/2m^2g)^(1/3), time (2hbar/mg^2)^(1/3)",
    "entropy": "natural: length (hbar^2/2m^2g)^(1/3), time (2hbar/mg^2)^(1/3)",
}

PLUGIN_REGISTRY: Dict[str, ScenarioPlugin] = {
    p.name: p for p in [
        InterferencePlugin(),
        TunnelPlugin(),
        BouncerPlugin(),
        ArrivalPlugin(),
        EntropyPlugin(),
        WignerPlugin(),
        EhrenfestPlugin(),
    ]
}


def _remove_outputs(output_dir: str, filenames, run_logger: logging.Logger) -> None:
    for filename in filenames:
        path = os.path.join(output_dir, filename)
        if os.path.exists(path):
            try:
                os.remove(path)
            except OSError as e:
                run_logger.warning(f"Could not remove partial output {path}: {e}")


def run_scenario(
    config: ScenarioConfig,
    output_dir: Optional[str] = None,
    run_logger: Optional[logging.Logger] = None,
) -> Dict[str, Any]:
    """
    Runs one scenario for every gamma_inv in the config.

    Writes the plugin's CSV files, `run.log` and `metadata.txt` into the
    output directory. On failure every file the run created is removed and
    the exception propagates.

    Args:
        config: validated scenario configuration.
        output_dir: overrides config.output_dir.
        run_logger: an existing logger to use instead of a per-run one.

    Returns:
        The finalized run report.
    """
    output_dir = output_dir or config.output_dir
    os.makedirs(output_dir, exist_ok=True)
    owns_logger = run_logger is None
    if owns_logger:
        run_logger = setup_run_logger(
            f"decoherence_lab.run.{config.scenario}", os.path.join(output_dir, LOG_FILE), config.log_level
        )
    attach_library_logging(run_logger)

    collector = WarningCollector()
    library = logging.getLogger(LIBRARY_LOGGER)
    library.addHandler(collector)
    run_logger.addHandler(collector)

    plugin = PLUGIN_REGISTRY[config.scenario]
    report = RunReport(scenario=config.scenario, parameters=config.model_dump(mode="json"))
    run_logger.info("=" * 20 + f" SCENARIO '{plugin.name}' " + "=" * 20)
    run_logger.info(plugin.description)

    phase = "setup"
    try:
        with Timer(run_logger, "Total scenario run"):
            report.start_phase("setup")
            run_logger.info(f"Output directory: {os.path.abspath(output_dir)}")
            run_logger.info(f"gamma_inv values: {config.gamma_inv_list}, map order: {config.map_order.value}")
            report.add_summary("units", UNITS.get(config.scenario, DEFAULT_UNITS))
            report.complete_phase("setup")

            phase = "simulation"
            report.start_phase("simulation")
            try:
                files = plugin.execute(config, output_dir, report, run_logger)
            except ValidationError as e:
                raise ConfigValidationError(
                    f"Parameters rejected by the '{plugin.name}' scenario: {format_validation_error(e)}"
                ) from e
            report.complete_phase("simulation")

            phase = "output"
            report.start_phase("output")
            run_logger.info(f"Wrote {len(files)} CSV file(s)")
            report.complete_phase("output")
            report.finalize(success=True)
            report.set_warnings(collector.messages)
            report.add_output(report.write_metadata(os.path.join(output_dir, METADATA_FILE)))
        return report.report
    except Exception as e:
        report.add_error(phase, type(e).__name__, str(e), e)
        report.complete_phase(phase, success=False)
        report.finalize(success=False)
        report.set_warnings(collector.messages)
        run_logger.error(f"Scenario '{config.scenario}' failed during {phase}: {e}")
        _remove_outputs(output_dir, report.outputs + [METADATA_FILE], run_logger)
        raise
    finally:
        library.removeHandler(collector)
        run_logger.removeHandler(collector)
        if owns_logger:
            close_run_logger(run_logger)
            if report.report["status"] != "success":
                _remove_outputs(output_dir, [LOG_FILE], logger)
