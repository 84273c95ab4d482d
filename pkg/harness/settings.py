import os
from typing import Optional

# Allow overriding the output directory via env; the config file value is the fallback
OUTPUT_DIR_ENV = "FOCK_OUTPUT_DIR"


def resolve_output_dir(config_dir: str, cli_dir: Optional[str] = None) -> str:
    """--out beats the environment, which beats the config file"""
    if cli_dir:
        return cli_dir
    return os.getenv(OUTPUT_DIR_ENV) or config_dir
