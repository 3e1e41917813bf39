"""
Command-line interface entry point for dcaport.
"""

import sys

from dcaport.cli import main

if __name__ == '__main__':
    sys.exit(main())
