import os
from loguru import logger as _logger

logger = _logger.bind(name='plcauchy')
# 设置 PLCAUCHY_LOG_FILE 时才写文件日志
if os.environ.get("PLCAUCHY_LOG_FILE"):
    logger.add(os.environ["PLCAUCHY_LOG_FILE"])

__all__ = ['logger']
