import logging
import sys
from datetime import datetime
import os

from utils.config import LOG_LEVEL, LOG_TO_FILE, LOG_DIR

# Create logger
logger = logging.getLogger('hotelling')
logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
logger.propagate = False

# Create formatter with line numbers
formatter = logging.Formatter(
    '%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

if not logger.handlers:
    # stdout 保留給報表輸出，日誌一律寫到 stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logger.level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if LOG_TO_FILE:
        # 確保logs目錄存在
        os.makedirs(LOG_DIR, exist_ok=True)
        file_handler = logging.FileHandler(
            os.path.join(LOG_DIR, f'hotelling_{datetime.now().strftime("%Y%m%d")}.log'),
            encoding='utf-8'  # 指定 UTF-8 編碼
        )
        file_handler.setLevel(logger.level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
