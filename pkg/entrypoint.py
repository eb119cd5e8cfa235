import logging
import sys

from backend.run import main as run_cli

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s %(levelname)s: %(message)s",
    handlers=[logging.StreamHandler(sys.stdout)]
)

LOG: logging.Logger = logging.getLogger(__name__)


def main() -> int:
    LOG.info("Starting the Kaczmarz solver...")
    exit_code: int = run_cli(sys.argv[1:])
    LOG.info(f"Kaczmarz solver has finished with exit code {exit_code}.")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
