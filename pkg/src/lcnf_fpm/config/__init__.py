import logging
import os

from dotenv import load_dotenv

from .log_config import setup_logger

load_dotenv()

setup_logger(
    enable_file=os.getenv("LCNF_FPM_LOG_TO_FILE", "").lower() in ("1", "true", "yes"),
    log_dir=os.getenv("LCNF_FPM_LOG_DIR", "logs"),
)
logger = logging.getLogger("lcnf_fpm")
