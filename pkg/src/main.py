import sys
from typing import Sequence

from exceptions import (
    BudgetExceededError,
    ConfigError,
    InvalidInputError,
    InvalidParametersError,
    ReproducibilityError,
)
from exp_harness import load_settings, replay, run_probe, run_sweep, write_probe, write_results
from service.logger import logger, setup_logging
from settings import settings

EXIT_OK = 0
EXIT_REPRODUCIBILITY = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def main(argv: Sequence[str] | None = None) -> int:
    """Run a sweep, a probe or a replay; return the process exit code."""
    setup_logging(settings.LOG_LEVEL, to_file=False)
    try:
        harness = load_settings(argv)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    setup_logging(harness.log_level)

    try:
        if harness.replay is not None:
            replay(harness.replay)
            logger.success(f"Replay of {harness.replay} passed")
            return EXIT_OK

        cfg, grid = harness.to_experiment(), harness.to_grid()
        if harness.probe is not None:
            logger.info(f"Running {harness.probe} probe over {len(grid)} grid point(s)")
            write_probe(run_probe(harness.probe, cfg, grid), harness.probe, cfg)
        else:
            logger.info(f"Running sweep over {len(grid)} grid point(s), {cfg.trials} trials each")
            write_results(run_sweep(cfg, grid, progress=True), cfg)
    except ReproducibilityError as e:
        logger.error(f"Replay failed at step {e.step}: {e}")
        return EXIT_REPRODUCIBILITY
    except (ConfigError, InvalidParametersError, BudgetExceededError, InvalidInputError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        sys.exit(130)
