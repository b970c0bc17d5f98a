"""``list``: registered problems and their parameter schemas."""

import sys
from typing import Optional, TextIO

from services.problems import list_problems


def cmd_list(stream: Optional[TextIO] = None) -> int:
    stream = stream or sys.stdout
    for name, schema in list_problems():
        print(name, file=stream)
        if not schema:
            print("  (sem parâmetros)", file=stream)
        for spec in schema:
            suffix = f"  # {spec.description}" if spec.description else ""
            print(f"  {spec.describe()}{suffix}", file=stream)
    return 0
