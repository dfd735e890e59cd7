import asyncio
import logging
import sys

from rauzy_lab.app import amain
from rauzy_lab.arguments import Parser, config_files, config_path
from rauzy_lab.exceptions import RauzyLabError


def main() -> None:
    try:
        with config_files(config_path()) as files:
            parser = Parser(config_files=files, auto_env_var_prefix="RAUZY_LAB_")
            parser.parse_args()
    except RauzyLabError as e:
        logging.error("%s", e)
        sys.exit(e.exit_code)

    logging.basicConfig(level=parser.log_level, format="[%(levelname)s] %(message)s", stream=sys.stderr)
    try:
        code = asyncio.run(amain(parser))
    except KeyboardInterrupt:
        logging.info("Gracefully exited on keyboard interrupt")
        return
    except RauzyLabError as e:
        logging.error("%s", e)
        sys.exit(e.exit_code)
    sys.exit(code)


if __name__ == "__main__":
    main()
