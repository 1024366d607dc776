#!/usr/bin/env python3
"""
plcauchy 命令行入口（未安装包时使用）
用法: python scripts/plcauchy_cli.py solve --config configs/ex_p2_flat.toml
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from plcauchy.cli import main

if __name__ == '__main__':
    main()
